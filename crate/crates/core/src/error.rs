use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),

    #[error("non-integral dimension: {what} = {value}")]
    NonIntegralDimensions { what: &'static str, value: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("track {track} moves at {speed:.3} m/s at t = {time:.3} s, at or above the Nyquist velocity {nyquist:.3} m/s")]
    KinematicsExceedNyquist { track: usize, time: f64, speed: f64, nyquist: f64 },

    #[error("range grid too coarse: spacing {spacing} m exceeds a quarter of the envelope width {width} m")]
    GridTooCoarse { spacing: f64, width: f64 },

    #[error("non-finite sample at time index {time}, range index {range}")]
    NonFiniteInput { time: usize, range: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("range gate [{start}, {end}] m is not inside the grid [{min}, {max}] m")]
    GateOutsideGrid { start: f64, end: f64, min: f64, max: f64 },

    #[error("window of {window} samples is longer than the series ({samples} samples)")]
    WindowLongerThanSeries { window: usize, samples: usize },

    #[error("spectrogram has {found} Doppler rows, expected {expected}")]
    WrongRowCount { expected: usize, found: usize },

    #[error("spectrogram has {found} usable frames, need {needed}")]
    InsufficientFrames { needed: usize, found: usize },

    #[error("input shape {found:?} does not match expected {expected:?}")]
    WrongInputShape { expected: (usize, usize), found: (usize, usize) },

    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),

    #[error("label {0} is not one of the model's classes")]
    UnknownLabel(u32),

    #[error("sample {0} has no label")]
    MissingLabel(usize),

    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("class {label} has {count} samples, not divisible by k = {k}")]
    IndivisibleClassCount { label: u32, count: usize, k: usize },

    #[error("invalid evaluation request: {0}")]
    InvalidEvaluation(String),

    #[error("empty confusion matrix")]
    EmptyMatrix,

    #[error("seed {seed}, fold {fold}: {source}")]
    InFold { seed: u64, fold: usize, source: Box<Error> },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// A format error attributed to `path`.
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }

    /// True for failures of the numerics themselves rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        if let Error::InFold { source, .. } = self {
            return source.is_numerical();
        }
        matches!(self, Error::Divergence { .. } | Error::NonFiniteInput { .. } | Error::KinematicsExceedNyquist { .. })
    }
}
