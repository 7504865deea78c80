//! Raw echoes to micro-Doppler images: analytic signal along range,
//! background subtraction, range-gated STFT and 8-bit quantization.

mod analytic;
mod image;
mod stft;

use num_complex::Complex64;

pub use analytic::analytic_signal;
pub use image::{to_image, SpectrogramImage, IMAGE_COLS, IMAGE_ROWS};
pub use stft::{hann, hann_window, stft_spectrogram, Spectrogram};

use crate::error::{Error, Result};
use crate::params::RadarParams;

/// Default range gate, m.
pub const DEFAULT_GATE: (f64, f64) = (2.5, 8.0);
/// Default image dynamic range, dB.
pub const DEFAULT_DYNAMIC_RANGE_DB: f64 = 40.0;

/// Real-valued pulse-compressed signal s₀(t, r), time-major
/// (`n_times` rows of `n_ranges` samples). Time axis starts at 0 with spacing
/// 1/f_s; the range axis starts at `range_start` with spacing Δr.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrameSeries {
    params: RadarParams,
    n_times: usize,
    n_ranges: usize,
    range_start: f64,
    samples: Vec<f64>,
}

impl RawFrameSeries {
    pub fn new(params: RadarParams, n_times: usize, n_ranges: usize, range_start: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != n_times * n_ranges {
            return Err(Error::GridMismatch(format!("{} samples for a {n_times}×{n_ranges} grid", samples.len())));
        }
        Ok(RawFrameSeries { params, n_times, n_ranges, range_start, samples })
    }

    pub fn zeros(params: RadarParams, n_times: usize, n_ranges: usize, range_start: f64) -> Self {
        let samples = vec![0.0; n_times * n_ranges];
        RawFrameSeries { params, n_times, n_ranges, range_start, samples }
    }

    pub fn params(&self) -> &RadarParams {
        &self.params
    }
    pub fn n_times(&self) -> usize {
        self.n_times
    }
    pub fn n_ranges(&self) -> usize {
        self.n_ranges
    }
    pub fn range_start(&self) -> f64 {
        self.range_start
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }
    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
    pub fn row(&self, t: usize) -> &[f64] {
        &self.samples[t * self.n_ranges..(t + 1) * self.n_ranges]
    }
    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.samples[t * self.n_ranges..(t + 1) * self.n_ranges]
    }
    pub fn get(&self, t: usize, r: usize) -> f64 {
        self.samples[t * self.n_ranges + r]
    }
    pub fn time(&self, t: usize) -> f64 {
        t as f64 * self.params.time_sampling_interval
    }
    pub fn range(&self, r: usize) -> f64 {
        self.range_start + r as f64 * self.params.range_sampling_interval
    }

    fn same_grid(&self, other: &RawFrameSeries) -> bool {
        self.n_times == other.n_times
            && self.n_ranges == other.n_ranges
            && self.range_start == other.range_start
            && self.params.range_sampling_interval == other.params.range_sampling_interval
            && self.params.time_sampling_interval == other.params.time_sampling_interval
    }
}

/// Complex analytic signal s(t, r) on the same grid as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSeries {
    params: RadarParams,
    n_times: usize,
    n_ranges: usize,
    range_start: f64,
    samples: Vec<Complex64>,
}

impl AnalyticSeries {
    pub fn params(&self) -> &RadarParams {
        &self.params
    }
    pub fn n_times(&self) -> usize {
        self.n_times
    }
    pub fn n_ranges(&self) -> usize {
        self.n_ranges
    }
    pub fn range_start(&self) -> f64 {
        self.range_start
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn row(&self, t: usize) -> &[Complex64] {
        &self.samples[t * self.n_ranges..(t + 1) * self.n_ranges]
    }
    pub fn get(&self, t: usize, r: usize) -> Complex64 {
        self.samples[t * self.n_ranges + r]
    }
    pub fn range(&self, r: usize) -> f64 {
        self.range_start + r as f64 * self.params.range_sampling_interval
    }

    pub fn real_part(&self) -> RawFrameSeries {
        RawFrameSeries {
            params: self.params,
            n_times: self.n_times,
            n_ranges: self.n_ranges,
            range_start: self.range_start,
            samples: self.samples.iter().map(|z| z.re).collect(),
        }
    }
}

/// Subtracts a background (empty-room) recording. No DC-notch or other
/// slow-time filtering is applied, so static or slow body echoes survive.
pub fn remove_clutter(raw: &RawFrameSeries, background: &RawFrameSeries) -> Result<RawFrameSeries> {
    if !raw.same_grid(background) {
        return Err(Error::GridMismatch(format!(
            "signal is {}×{} from {} m, background is {}×{} from {} m",
            raw.n_times, raw.n_ranges, raw.range_start, background.n_times, background.n_ranges, background.range_start
        )));
    }
    let samples = raw.samples.iter().zip(&background.samples).map(|(a, b)| a - b).collect();
    Ok(RawFrameSeries { samples, ..raw.clone_header() })
}

impl RawFrameSeries {
    fn clone_header(&self) -> RawFrameSeries {
        RawFrameSeries {
            params: self.params,
            n_times: self.n_times,
            n_ranges: self.n_ranges,
            range_start: self.range_start,
            samples: Vec::new(),
        }
    }
}

/// Settings for the raw-to-image conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePipeline {
    pub gate: (f64, f64),
    pub hop_samples: usize,
    pub dynamic_range_db: f64,
}

impl ImagePipeline {
    /// Gate and dynamic range at their defaults, hop of half a window.
    pub fn new(params: &RadarParams) -> Result<Self> {
        Ok(ImagePipeline { gate: DEFAULT_GATE, hop_samples: params.window_len()? / 2, dynamic_range_db: DEFAULT_DYNAMIC_RANGE_DB })
    }

    pub fn spectrogram(&self, raw: &RawFrameSeries, background: Option<&RawFrameSeries>) -> Result<Spectrogram> {
        let analytic = match background {
            Some(bg) => analytic_signal(&remove_clutter(raw, bg)?)?,
            None => analytic_signal(raw)?,
        };
        stft_spectrogram(&analytic, self.gate, self.hop_samples)
    }

    pub fn image(&self, raw: &RawFrameSeries, background: Option<&RawFrameSeries>) -> Result<SpectrogramImage> {
        to_image(&self.spectrogram(raw, background)?, self.dynamic_range_db)
    }
}
