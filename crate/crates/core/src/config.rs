//! Flat key-value experiment configuration in TOML.
//!
//! Every scalar is a top-level key named after the field it sets. Clutter
//! scatterers and identities are arrays of tables (`[[clutter]]`,
//! `[[identity]]`). Missing keys take their defaults. Scalar keys can be
//! overridden from the command line as `key=value` pairs, applied after the
//! file is read.

use serde::Deserialize;
use toml::{Table, Value};

use crate::cnn::Hyperparams;
use crate::dsp::{ImagePipeline, DEFAULT_DYNAMIC_RANGE_DB, DEFAULT_GATE};
use crate::error::{Error, Result};
use crate::params::RadarParams;
use crate::synth::{ClutterScatterer, GaitProfile, Scenario, TrialJitter};

pub const DEFAULT_TRIALS_PER_IDENTITY: usize = 100;
pub const DEFAULT_FOLDS: usize = 10;
pub const DEFAULT_N_SEEDS: usize = 10;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    center_frequency: Option<f64>,
    bandwidth: Option<f64>,
    time_sampling_interval: Option<f64>,
    range_sampling_interval: Option<f64>,
    propagation_speed: Option<f64>,
    observation_time: Option<f64>,
    window_width: Option<f64>,
    beamwidth_e_plane: Option<f64>,
    beamwidth_h_plane: Option<f64>,

    start_range: Option<f64>,
    chair_range: Option<f64>,
    noise_std: Option<f64>,
    jitter_walk_speed: Option<f64>,
    jitter_cadence: Option<f64>,
    jitter_amplitude: Option<f64>,
    jitter_phase: Option<bool>,
    clutter: Option<Vec<ClutterScatterer>>,
    trials_per_identity: Option<usize>,

    gate_start: Option<f64>,
    gate_end: Option<f64>,
    hop_samples: Option<usize>,
    dynamic_range_db: Option<f64>,

    #[serde(alias = "lr")]
    learning_rate: Option<f64>,
    momentum: Option<f64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    #[serde(alias = "k")]
    folds: Option<usize>,
    n_seeds: Option<usize>,

    identity: Option<Vec<GaitProfile>>,
}

/// Scalar keys accepted in files and as overrides, including aliases.
pub const SCALAR_KEYS: &[&str] = &[
    "center_frequency",
    "bandwidth",
    "time_sampling_interval",
    "range_sampling_interval",
    "propagation_speed",
    "observation_time",
    "window_width",
    "beamwidth_e_plane",
    "beamwidth_h_plane",
    "start_range",
    "chair_range",
    "noise_std",
    "jitter_walk_speed",
    "jitter_cadence",
    "jitter_amplitude",
    "jitter_phase",
    "trials_per_identity",
    "gate_start",
    "gate_end",
    "hop_samples",
    "dynamic_range_db",
    "learning_rate",
    "lr",
    "momentum",
    "epochs",
    "batch_size",
    "folds",
    "k",
    "n_seeds",
];

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub radar: RadarParams,
    pub scenario: Scenario,
    pub trials_per_identity: usize,
    pub pipeline: PipelineSettings,
    /// Training settings; the seed field is left at 0 and set per command.
    pub hyperparams: Hyperparams,
    pub folds: usize,
    pub n_seeds: usize,
    pub identities: Vec<GaitProfile>,
}

/// Image pipeline settings. `hop_samples` of `None` means half a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSettings {
    pub gate: (f64, f64),
    pub hop_samples: Option<usize>,
    pub dynamic_range_db: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            radar: RadarParams::default(),
            scenario: Scenario::default(),
            trials_per_identity: DEFAULT_TRIALS_PER_IDENTITY,
            pipeline: PipelineSettings { gate: DEFAULT_GATE, hop_samples: None, dynamic_range_db: DEFAULT_DYNAMIC_RANGE_DB },
            hyperparams: Hyperparams::default(),
            folds: DEFAULT_FOLDS,
            n_seeds: DEFAULT_N_SEEDS,
            identities: GaitProfile::default_set(),
        }
    }
}

/// Parses an override value as a TOML literal (integer, float, boolean,
/// quoted string); anything else is taken as a bare string.
fn override_value(text: &str) -> Value {
    match format!("v = {text}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(text.into())),
        Err(_) => Value::String(text.into()),
    }
}

impl Config {
    /// Parses configuration text. Syntax errors and bad keys are reported with
    /// their line and column.
    pub fn parse(text: &str) -> Result<Config> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text` and then applies `key=value` style overrides.
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Config> {
        // Deserializing from the text directly keeps span information for
        // diagnostics; overrides are merged at the table level afterwards.
        toml::from_str::<RawConfig>(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut table: Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for (key, value) in overrides {
            let key = key.replace('-', "_");
            if !SCALAR_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown override key `{key}`")));
            }
            let canonical = match key.as_str() {
                "lr" => "learning_rate",
                "k" => "folds",
                other => other,
            };
            table.remove(if canonical == key { alias_of(&key) } else { key.as_str() });
            table.insert(canonical.to_string(), override_value(value));
        }
        let raw = RawConfig::deserialize(Value::Table(table)).map_err(|e| Error::Config(format!("override: {e}")))?;
        raw.resolve()
    }

    pub fn read(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| in_file(path, e))
    }

    pub fn read_with_overrides(path: Option<&std::path::Path>, overrides: &[(String, String)]) -> Result<Config> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                Self::parse_with_overrides(&text, overrides).map_err(|e| in_file(p, e))
            }
            None => Self::parse_with_overrides("", overrides),
        }
    }

    pub fn image_pipeline(&self) -> Result<ImagePipeline> {
        self.image_pipeline_for(&self.radar)
    }

    /// Pipeline settings applied to recordings made with `params`, e.g. the
    /// parameters read from a frame file header.
    pub fn image_pipeline_for(&self, params: &RadarParams) -> Result<ImagePipeline> {
        let mut p = ImagePipeline::new(params)?;
        p.gate = self.pipeline.gate;
        p.dynamic_range_db = self.pipeline.dynamic_range_db;
        if let Some(h) = self.pipeline.hop_samples {
            p.hop_samples = h;
        }
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.scenario.validate()?;
        self.hyperparams.validate()?;
        let (g0, g1) = self.pipeline.gate;
        if !(g0 < g1) {
            return Err(Error::Config(format!("gate_start {g0} must be below gate_end {g1}")));
        }
        if !(self.pipeline.dynamic_range_db > 0.0) {
            return Err(Error::Config("dynamic_range_db must be positive".into()));
        }
        if self.pipeline.hop_samples == Some(0) {
            return Err(Error::Config("hop_samples must be positive".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be at least 1".into()));
        }
        let mut labels: Vec<_> = self.identities.iter().map(|p| p.identity_label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("identity labels must be unique".into()));
        }
        for p in &self.identities {
            p.validate(&self.scenario, &self.radar)?;
        }
        Ok(())
    }
}

fn alias_of(key: &str) -> &str {
    match key {
        "learning_rate" => "lr",
        "folds" => "k",
        _ => key,
    }
}

fn in_file(path: &std::path::Path, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    }
}

impl RawConfig {
    fn resolve(self) -> Result<Config> {
        let d = Config::default();
        let r = d.radar;
        let radar = RadarParams {
            center_frequency: self.center_frequency.unwrap_or(r.center_frequency),
            bandwidth: self.bandwidth.unwrap_or(r.bandwidth),
            time_sampling_interval: self.time_sampling_interval.unwrap_or(r.time_sampling_interval),
            range_sampling_interval: self.range_sampling_interval.unwrap_or(r.range_sampling_interval),
            propagation_speed: self.propagation_speed.unwrap_or(r.propagation_speed),
            observation_time: self.observation_time.unwrap_or(r.observation_time),
            window_width: self.window_width.unwrap_or(r.window_width),
            beamwidth_e_plane: self.beamwidth_e_plane.unwrap_or(r.beamwidth_e_plane),
            beamwidth_h_plane: self.beamwidth_h_plane.unwrap_or(r.beamwidth_h_plane),
        };
        let s = d.scenario;
        let j = s.jitter;
        let scenario = Scenario {
            start_range: self.start_range.unwrap_or(s.start_range),
            chair_range: self.chair_range.unwrap_or(s.chair_range),
            clutter: self.clutter.unwrap_or(s.clutter),
            noise_std: self.noise_std.unwrap_or(s.noise_std),
            jitter: TrialJitter {
                walk_speed: self.jitter_walk_speed.unwrap_or(j.walk_speed),
                cadence: self.jitter_cadence.unwrap_or(j.cadence),
                amplitude: self.jitter_amplitude.unwrap_or(j.amplitude),
                redraw_phase: self.jitter_phase.unwrap_or(j.redraw_phase),
            },
        };
        let p = d.pipeline;
        let pipeline = PipelineSettings {
            gate: (self.gate_start.unwrap_or(p.gate.0), self.gate_end.unwrap_or(p.gate.1)),
            hop_samples: self.hop_samples.or(p.hop_samples),
            dynamic_range_db: self.dynamic_range_db.unwrap_or(p.dynamic_range_db),
        };
        let h = d.hyperparams;
        let hyperparams = Hyperparams {
            learning_rate: self.learning_rate.unwrap_or(h.learning_rate),
            momentum: self.momentum.unwrap_or(h.momentum),
            epochs: self.epochs.unwrap_or(h.epochs),
            batch_size: self.batch_size.unwrap_or(h.batch_size),
            seed: 0,
        };
        let config = Config {
            radar,
            scenario,
            trials_per_identity: self.trials_per_identity.unwrap_or(d.trials_per_identity),
            pipeline,
            hyperparams,
            folds: self.folds.unwrap_or(d.folds),
            n_seeds: self.n_seeds.unwrap_or(d.n_seeds),
            identities: self.identity.unwrap_or(d.identities),
        };
        config.validate()?;
        Ok(config)
    }
}
