//! Independent O(n²) oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mdid_core::dsp::{hann, ImagePipeline};
use mdid_core::synth::{capture_background, dataset_plan, render_echo, render_trial, TrialJitter};
use mdid_core::{GaitProfile, Label, RadarParams, RawFrameSeries, ScattererTrack, Scenario, SpectrogramImage};
use num_complex::Complex64;
use rayon::prelude::*;

/// Direct DFT, `sign` = −1 forward, +1 inverse (unnormalized).
pub fn dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = x.len();
    let twiddle: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64)).collect();
    (0..n).map(|k| x.iter().enumerate().map(|(j, v)| v * twiddle[(j * k) % n]).sum()).collect()
}

/// Analytic signal of one real range profile by direct DFT: keep DC (and the
/// Nyquist bin of an even length), double the positive half, drop the rest.
pub fn analytic_row(row: &[f64]) -> Vec<Complex64> {
    let n = row.len();
    let x: Vec<Complex64> = row.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut spec = dft(&x, -1.0);
    for (k, s) in spec.iter_mut().enumerate() {
        let w = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            1.0
        } else if k < n.div_ceil(2) {
            2.0
        } else {
            0.0
        };
        *s *= w / n as f64;
    }
    dft(&spec, 1.0)
}

/// Brute-force spectrogram column centred on slow-time sample `center`:
/// returns (velocity, power) for Doppler bins −L/2..L/2−1, where power is the
/// range-gated sum of |windowed DFT|² scaled by Δr/L.
pub fn oracle_column(raw: &RawFrameSeries, gate: (f64, f64), center: usize) -> Vec<(f64, f64)> {
    let p = raw.params();
    let len = (p.window_width / p.time_sampling_interval).round() as usize;
    let dt = p.time_sampling_interval;
    let dr = p.range_sampling_interval;
    let start = center as isize - (len / 2) as isize;
    let rows: Vec<Option<Vec<Complex64>>> = (0..len)
        .map(|n| {
            let t = start + n as isize;
            (t >= 0 && (t as usize) < raw.n_times()).then(|| analytic_row(raw.row(t as usize)))
        })
        .collect();
    let gated: Vec<usize> = (0..raw.n_ranges())
        .filter(|&j| {
            let r = raw.range(j);
            r >= gate.0 - 1e-9 * dr && r <= gate.1 + 1e-9 * dr
        })
        .collect();
    let half = len as i64 / 2;
    (-half..half)
        .map(|m| {
            let mut power = 0.0;
            for &j in &gated {
                let mut acc = Complex64::default();
                for (n, row) in rows.iter().enumerate() {
                    if let Some(row) = row {
                        let w = hann((n as f64 - (len as f64 - 1.0) / 2.0) * dt, p.window_width);
                        let phase = -2.0 * PI * (m as f64) * n as f64 / len as f64;
                        acc += row[j] * w * Complex64::from_polar(1.0, phase);
                    }
                }
                power += acc.norm_sqr();
            }
            let doppler = m as f64 / (len as f64 * dt);
            let velocity = doppler * p.propagation_speed / (2.0 * p.center_frequency);
            (velocity, power * dr / len as f64)
        })
        .collect()
}

pub fn quiet_scenario() -> Scenario {
    Scenario { clutter: Vec::new(), noise_std: 0.0, jitter: TrialJitter::none(), ..Scenario::default() }
}

/// Noise-free echo of a single point scatterer moving at constant radial
/// velocity `approach_speed` (positive = approaching) from `start`.
pub fn constant_velocity_echo(params: &RadarParams, start: f64, approach_speed: f64) -> RawFrameSeries {
    let n_t = (params.observation_time / params.time_sampling_interval).round() as usize;
    let track = ScattererTrack {
        ranges: (0..n_t).map(|i| start - approach_speed * i as f64 * params.time_sampling_interval).collect(),
        reflectivity: 1.0,
    };
    render_echo(&[track], &quiet_scenario(), params, 0).unwrap()
}

/// Renders a labelled image dataset trial by trial so raw echoes never
/// accumulate in memory.
pub fn image_dataset(
    profiles: &[GaitProfile],
    scenario: &Scenario,
    params: &RadarParams,
    trials: usize,
    seed: u64,
) -> Vec<(SpectrogramImage, Label)> {
    let background = capture_background(scenario, params, seed).unwrap();
    let pipeline = ImagePipeline::new(params).unwrap();
    dataset_plan(profiles, trials, seed)
        .unwrap()
        .par_iter()
        .map(|spec| {
            let raw = render_trial(&profiles[spec.profile_index], scenario, params, spec.seed).unwrap();
            let image = pipeline.image(&raw, Some(&background)).unwrap();
            (image.with_label(spec.label), spec.label)
        })
        .collect()
}
