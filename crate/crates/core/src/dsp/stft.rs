use num_complex::Complex64;
use rustfft::FftPlanner;

use super::AnalyticSeries;
use crate::error::{Error, Result};
use crate::params::VelocityAxis;

/// Continuous Hann window of width `width` centered on t = 0.
pub fn hann(t: f64, width: f64) -> f64 {
    if t.abs() <= width / 2.0 {
        0.5 * (1.0 + (2.0 * std::f64::consts::PI * t / width).cos())
    } else {
        0.0
    }
}

/// `len` samples of [`hann`] at offsets (n − (len−1)/2) sample periods.
pub fn hann_window(len: usize) -> Vec<f64> {
    let center = (len as f64 - 1.0) / 2.0;
    (0..len).map(|n| hann(n as f64 - center, len as f64)).collect()
}

/// Range-integrated power spectrogram S(t, v_d).
///
/// `values` is row-major, `doppler_bins` rows by `frame_times.len()` columns;
/// row order follows [`VelocityAxis`] (row 0 is the most positive velocity).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub values: Vec<f64>,
    pub velocity_axis: VelocityAxis,
    pub frame_times: Vec<f64>,
    pub range_gate: (f64, f64),
    pub hop_samples: usize,
    pub window_len: usize,
}

impl Spectrogram {
    pub fn doppler_bins(&self) -> usize {
        self.velocity_axis.bin_count
    }

    pub fn frames(&self) -> usize {
        self.frame_times.len()
    }

    pub fn get(&self, row: usize, frame: usize) -> f64 {
        self.values[row * self.frames() + frame]
    }

    /// Sum over Doppler rows at one frame.
    pub fn frame_energy(&self, frame: usize) -> f64 {
        (0..self.doppler_bins()).map(|r| self.get(r, frame)).sum()
    }

    /// Row with the largest value in `frame` (lowest row on ties).
    pub fn argmax_row(&self, frame: usize) -> usize {
        let mut best = 0;
        for r in 1..self.doppler_bins() {
            if self.get(r, frame) > self.get(best, frame) {
                best = r;
            }
        }
        best
    }

    /// Long-format CSV (`time_s,velocity_mps,power`) for inspection.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s,velocity_mps,power\n");
        for (f, t) in self.frame_times.iter().enumerate() {
            for r in 0..self.doppler_bins() {
                out.push_str(&format!("{t},{},{:e}\n", self.velocity_axis.velocity(r), self.get(r, f)));
            }
        }
        out
    }
}

/// Range-gated STFT power spectrogram.
///
/// Frame `j` is centered on slow-time sample `j·hop_samples` and covers
/// samples `[c − L/2, c + L/2)` (zero outside the series), weighted by the
/// L-sample Hann window. Per gated range bin the L-point DFT power is
/// accumulated as `Δr/L·|X|²`, so every frame satisfies Parseval:
/// its column sum equals `Δr·Σ|w·s|²` over the gate.
pub fn stft_spectrogram(analytic: &AnalyticSeries, gate: (f64, f64), hop_samples: usize) -> Result<Spectrogram> {
    let params = analytic.params;
    let axis = params.velocity_axis()?;
    let len = axis.bin_count;
    let n_t = analytic.n_times;
    if len > n_t {
        return Err(Error::WindowLongerThanSeries { window: len, samples: n_t });
    }
    if hop_samples == 0 {
        return Err(Error::InvalidParams("hop_samples must be at least 1".into()));
    }

    let (r1, r2) = gate;
    let min = analytic.range(0);
    let max = analytic.range(analytic.n_ranges - 1);
    let dr = params.range_sampling_interval;
    let slack = 1e-9 * dr;
    if !(r1 < r2 && r1 >= min - slack && r2 <= max + slack) {
        return Err(Error::GateOutsideGrid { start: r1, end: r2, min, max });
    }
    let bins: Vec<usize> = (0..analytic.n_ranges)
        .filter(|&j| {
            let r = analytic.range(j);
            r >= r1 - slack && r <= r2 + slack
        })
        .collect();

    // Gate-local range-major copy so each range bin's slow-time history is contiguous.
    let mut history = vec![Complex64::default(); bins.len() * n_t];
    for t in 0..n_t {
        let row = analytic.row(t);
        for (g, &j) in bins.iter().enumerate() {
            history[g * n_t + t] = row[j];
        }
    }

    let window = hann_window(len);
    let n_frames = n_t.div_ceil(hop_samples);
    let mut fft_planner = FftPlanner::<f64>::new();
    let fft = fft_planner.plan_fft_forward(len);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut buf = vec![Complex64::default(); len];
    let mut power = vec![0.0; len];
    let mut values = vec![0.0; len * n_frames];
    let scale = dr / len as f64;

    for frame in 0..n_frames {
        let start = (frame * hop_samples) as isize - (len / 2) as isize;
        power.fill(0.0);
        for g in 0..bins.len() {
            let h = &history[g * n_t..(g + 1) * n_t];
            for (n, b) in buf.iter_mut().enumerate() {
                let idx = start + n as isize;
                *b = if idx >= 0 && (idx as usize) < n_t { h[idx as usize] * window[n] } else { Complex64::default() };
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (p, z) in power.iter_mut().zip(&buf) {
                *p += z.norm_sqr();
            }
        }
        for row in 0..len {
            values[row * n_frames + frame] = scale * power[axis.fft_bin(row)];
        }
    }

    let frame_times = (0..n_frames).map(|f| (f * hop_samples) as f64 * params.time_sampling_interval).collect();
    Ok(Spectrogram { values, velocity_axis: axis, frame_times, range_gate: gate, hop_samples, window_len: len })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{analytic_signal, RawFrameSeries};
    use crate::params::RadarParams;

    #[test]
    fn hann_endpoints() {
        let t_o = 0.16;
        assert_eq!(hann(0.0, t_o), 1.0);
        assert!(hann(t_o / 2.0, t_o).abs() < 1e-16);
        assert!(hann(-t_o / 2.0, t_o).abs() < 1e-16);
        assert_eq!(hann(0.0801, t_o), 0.0);
    }

    #[test]
    fn discrete_window_is_symmetric() {
        let w = hann_window(32);
        for n in 0..16 {
            assert!((w[n] - w[31 - n]).abs() < 1e-15);
        }
        assert!(w.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    fn zero_analytic(n_t: usize, n_r: usize) -> AnalyticSeries {
        let raw = RawFrameSeries::zeros(RadarParams::default(), n_t, n_r, 0.0);
        analytic_signal(&raw).unwrap()
    }

    #[test]
    fn zero_input_gives_zero_spectrogram() {
        let s = stft_spectrogram(&zero_analytic(64, 40), (0.05, 0.3), 16).unwrap();
        assert_eq!(s.frames(), 4);
        assert_eq!(s.doppler_bins(), 32);
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gate_and_window_errors() {
        let a = zero_analytic(64, 40);
        assert!(matches!(stft_spectrogram(&a, (0.3, 0.05), 16), Err(Error::GateOutsideGrid { .. })));
        assert!(matches!(stft_spectrogram(&a, (0.05, 1.0), 16), Err(Error::GateOutsideGrid { .. })));
        let short = zero_analytic(20, 4);
        assert!(matches!(stft_spectrogram(&short, (0.0, 0.02), 16), Err(Error::WindowLongerThanSeries { window: 32, samples: 20 })));
    }
}
