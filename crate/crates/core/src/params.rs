//! Radar constants, the Doppler velocity axis, and the sizing rules that fix
//! every downstream array dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation speed used throughout (vacuum speed of light, rounded).
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Relative slack when deciding whether a product of floats is an integer.
const INTEGRAL_TOLERANCE: f64 = 1e-9;

/// UWB radar and measurement constants. Field names double as the keys of
/// the configuration file; all values are SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarParams {
    /// Center frequency f_o, Hz.
    pub center_frequency: f64,
    /// 10-dB bandwidth B, Hz.
    pub bandwidth: f64,
    /// Slow-time sampling interval 1/f_s, s.
    pub time_sampling_interval: f64,
    /// Range bin spacing, m.
    pub range_sampling_interval: f64,
    /// Propagation speed c, m/s.
    pub propagation_speed: f64,
    /// Observation time T_o, s.
    pub observation_time: f64,
    /// STFT window width t_o, s.
    pub window_width: f64,
    /// Antenna E-plane beamwidth, degrees. Metadata only.
    pub beamwidth_e_plane: f64,
    /// Antenna H-plane beamwidth, degrees. Metadata only.
    pub beamwidth_h_plane: f64,
}

impl Default for RadarParams {
    fn default() -> Self {
        RadarParams {
            center_frequency: 4.2e9,
            bandwidth: 2.2e9,
            time_sampling_interval: 5e-3,
            range_sampling_interval: 9.12e-3,
            propagation_speed: SPEED_OF_LIGHT,
            observation_time: 8.0,
            window_width: 0.16,
            beamwidth_e_plane: 32.0,
            beamwidth_h_plane: 34.0,
        }
    }
}

fn as_integer(what: &'static str, value: f64) -> Result<usize> {
    let rounded = value.round();
    if !value.is_finite() || value < 0.0 || (value - rounded).abs() > INTEGRAL_TOLERANCE * rounded.max(1.0) {
        return Err(Error::NonIntegralDimensions { what, value });
    }
    Ok(rounded as usize)
}

impl RadarParams {
    pub fn validate(&self) -> Result<()> {
        self.check_positive(false)?;
        self.window_len().map(|_| ())
    }

    fn check_positive(&self, allow_empty_observation: bool) -> Result<()> {
        let fields = [
            ("center_frequency", self.center_frequency),
            ("bandwidth", self.bandwidth),
            ("time_sampling_interval", self.time_sampling_interval),
            ("range_sampling_interval", self.range_sampling_interval),
            ("propagation_speed", self.propagation_speed),
            ("window_width", self.window_width),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        let t = self.observation_time;
        let ok = t.is_finite() && (t > 0.0 || (allow_empty_observation && t == 0.0));
        if !ok {
            return Err(Error::InvalidParams(format!("observation_time must be positive, got {t}")));
        }
        Ok(())
    }

    /// Slow-time sampling rate f_s, Hz.
    pub fn sampling_rate(&self) -> f64 {
        1.0 / self.time_sampling_interval
    }

    /// Free-space wavenumber k = 2π·f_o/c, rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.center_frequency / self.propagation_speed
    }

    /// Range resolution c/(2B), m.
    pub fn range_resolution(&self) -> f64 {
        self.propagation_speed / (2.0 * self.bandwidth)
    }

    /// STFT window length L = f_s·t_o in samples.
    pub fn window_len(&self) -> Result<usize> {
        as_integer("window_width * sampling_rate", self.window_width * self.sampling_rate())
    }

    /// Velocity spacing of adjacent Doppler bins, c/(2·f_o·t_o). Half of
    /// [`doppler_resolution`] because the Hann window's effective width is t_o/2.
    pub fn velocity_per_bin(&self) -> f64 {
        self.propagation_speed / (2.0 * self.center_frequency * self.window_width)
    }

    /// Converts a Doppler frequency in Hz to radial velocity in m/s.
    pub fn doppler_to_velocity(&self, doppler_hz: f64) -> f64 {
        doppler_hz * self.propagation_speed / (2.0 * self.center_frequency)
    }

    pub fn velocity_axis(&self) -> Result<VelocityAxis> {
        self.validate()?;
        Ok(VelocityAxis {
            bin_count: self.window_len()?,
            velocity_per_bin: self.velocity_per_bin(),
            orientation: Orientation::ApproachingPositive,
        })
    }
}

/// One-sided maximum unambiguous Doppler velocity c·f_s/(4·f_o).
pub fn nyquist_velocity(params: &RadarParams) -> Result<f64> {
    params.check_positive(false)?;
    Ok(params.propagation_speed * params.sampling_rate() / (4.0 * params.center_frequency))
}

/// Doppler velocity resolution c/(f_o·t_o).
pub fn doppler_resolution(params: &RadarParams) -> Result<f64> {
    params.check_positive(false)?;
    Ok(params.propagation_speed / (params.center_frequency * params.window_width))
}

/// Image size `(doppler_bins, time_frames)` = (f_s·t_o, T_o/(t_o/2)).
pub fn image_dimensions(params: &RadarParams) -> Result<(usize, usize)> {
    params.check_positive(false)?;
    let bins = params.window_len()?;
    let frames = as_integer("observation_time / (window_width / 2)", params.observation_time / (params.window_width / 2.0))?;
    Ok((bins, frames))
}

/// Number of slow-time samples M_s = T_o·f_s.
pub fn raw_sample_count(params: &RadarParams) -> Result<usize> {
    params.check_positive(true)?;
    as_integer("observation_time * sampling_rate", params.observation_time * params.sampling_rate())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Motion toward the antennas maps to positive velocity.
    ApproachingPositive,
}

/// Doppler axis of a spectrogram. Row 0 holds the highest positive velocity;
/// rows descend to −v_nyq in the last row, so the span is [−v_nyq, +v_nyq).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityAxis {
    pub bin_count: usize,
    pub velocity_per_bin: f64,
    pub orientation: Orientation,
}

impl VelocityAxis {
    /// Signed bin index (in units of `velocity_per_bin`) displayed in `row`.
    pub fn bin_index(&self, row: usize) -> i64 {
        (self.bin_count as i64 + 1) / 2 - 1 - row as i64
    }

    pub fn velocity(&self, row: usize) -> f64 {
        self.bin_index(row) as f64 * self.velocity_per_bin
    }

    pub fn zero_row(&self) -> usize {
        self.bin_count.div_ceil(2) - 1
    }

    /// The row whose velocity bin contains `velocity`.
    pub fn row_of(&self, velocity: f64) -> Option<usize> {
        let idx = (velocity / self.velocity_per_bin).round() as i64;
        let row = self.zero_row() as i64 - idx;
        (0..self.bin_count as i64).contains(&row).then_some(row as usize)
    }

    /// FFT output bin (0-based, unshifted) that lands in `row`.
    pub fn fft_bin(&self, row: usize) -> usize {
        self.bin_index(row).rem_euclid(self.bin_count as i64) as usize
    }

    pub fn nyquist(&self) -> f64 {
        self.velocity_per_bin * self.bin_count as f64 / 2.0
    }
}
