//! Synthetic pulse-compressed UWB returns of walkers.
//!
//! Each identity walks from `start_range` toward a chair at `chair_range`,
//! stops, and sits down. The body is five point scatterers: a torso and four
//! limbs (two legs, two arms) swinging about the torso at the gait cadence.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::RawFrameSeries;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::params::{nyquist_velocity, raw_sample_count, RadarParams};
use crate::seed::{derive_seed, TAG_BACKGROUND, TAG_NOISE, TAG_TRACKS, TAG_TRIAL};

/// Duration of the raised-cosine speed-up and slow-down at either end of the walk, s.
pub const RAMP_TIME: f64 = 0.5;
/// Range covered beyond `start_range` by the rendered grid, m.
pub const RANGE_MARGIN: f64 = 2.0;
/// Envelope support in standard deviations; beyond it the Gaussian is < 2e-8.
const ENVELOPE_SUPPORT: f64 = 6.0;

/// Kinematic parameters of one synthetic identity. Limb arrays are ordered
/// left leg, right leg, left arm, right arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitProfile {
    pub identity_label: Label,
    /// Steady walking speed, m/s.
    pub walk_speed: f64,
    /// Gait cycle frequency, Hz.
    pub cadence: f64,
    /// Radial swing amplitude of the legs, m.
    pub leg_swing_amplitude: f64,
    /// Radial swing amplitude of the arms, m.
    pub arm_swing_amplitude: f64,
    pub limb_phase_offsets: [f64; 4],
    pub torso_reflectivity: f64,
    pub limb_reflectivities: [f64; 4],
    pub sit_start_time: f64,
    pub sit_duration: f64,
    /// How far the torso recedes from the radar while sitting down, m.
    pub sit_displacement: f64,
}

impl GaitProfile {
    /// Six identities with cadences ≥ 0.2 Hz apart and walk speeds 0.1 m/s apart.
    pub fn default_set() -> Vec<GaitProfile> {
        // (speed, cadence, leg, arm, sit start, sit duration, sit displacement)
        let table = [
            (0.85, 1.9, 0.13, 0.08, 6.0, 1.0, 0.35),
            (0.95, 2.3, 0.11, 0.06, 6.3, 0.9, 0.30),
            (1.05, 1.5, 0.14, 0.09, 5.8, 1.2, 0.40),
            (1.15, 2.5, 0.10, 0.05, 6.1, 0.8, 0.25),
            (1.25, 1.7, 0.12, 0.07, 5.6, 1.1, 0.38),
            (1.35, 2.1, 0.12, 0.09, 5.9, 1.0, 0.32),
        ];
        table
            .iter()
            .enumerate()
            .map(|(i, &(walk_speed, cadence, leg, arm, sit_start_time, sit_duration, sit_displacement))| GaitProfile {
                identity_label: Label(i as u32 + 1),
                walk_speed,
                cadence,
                leg_swing_amplitude: leg,
                arm_swing_amplitude: arm,
                limb_phase_offsets: [0.0, PI, PI, 0.0],
                torso_reflectivity: 1.0,
                limb_reflectivities: [0.5, 0.5, 0.3, 0.3],
                sit_start_time,
                sit_duration,
                sit_displacement,
            })
            .collect()
    }

    fn limb_amplitudes(&self) -> [f64; 4] {
        let (l, a) = (self.leg_swing_amplitude, self.arm_swing_amplitude);
        [l, l, a, a]
    }

    /// Time at which the torso comes to rest in front of the chair.
    pub fn walk_end_time(&self, scenario: &Scenario) -> f64 {
        (scenario.start_range - scenario.chair_range) / self.walk_speed + RAMP_TIME
    }

    pub fn validate(&self, scenario: &Scenario, params: &RadarParams) -> Result<()> {
        let nyquist = nyquist_velocity(params)?;
        let bad = |msg: String| Err(Error::InvalidProfile(format!("identity {}: {msg}", self.identity_label)));
        if !(self.walk_speed > 0.0 && self.walk_speed < nyquist) {
            return bad(format!("walk_speed {} outside (0, {nyquist})", self.walk_speed));
        }
        if !(self.cadence > 0.0) {
            return bad(format!("cadence {} must be positive", self.cadence));
        }
        if !(self.leg_swing_amplitude >= 0.0 && self.arm_swing_amplitude >= 0.0) {
            return bad("swing amplitudes must be nonnegative".into());
        }
        if !(self.sit_duration > 0.0 && self.sit_start_time >= 0.0 && self.sit_displacement >= 0.0) {
            return bad("sit timing must be nonnegative with a positive duration".into());
        }
        if self.sit_start_time + self.sit_duration > params.observation_time + 1e-12 {
            return bad(format!(
                "sitting ends at {} s, after the {} s observation",
                self.sit_start_time + self.sit_duration,
                params.observation_time
            ));
        }
        let distance = scenario.start_range - scenario.chair_range;
        if distance < self.walk_speed * RAMP_TIME {
            return bad(format!("walk of {distance} m too short for the speed ramps"));
        }
        let walk_end = self.walk_end_time(scenario);
        if walk_end > self.sit_start_time + 1e-12 {
            return bad(format!("reaches the chair at {walk_end:.3} s, after sitting starts at {} s", self.sit_start_time));
        }
        Ok(())
    }
}

/// Relative per-trial perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialJitter {
    /// Relative σ of the multiplicative walk-speed perturbation.
    pub walk_speed: f64,
    pub cadence: f64,
    /// Applied independently to the leg and arm amplitudes.
    pub amplitude: f64,
    /// Redraw the gait starting phase uniformly on [0, 2π) each trial.
    pub redraw_phase: bool,
}

impl Default for TrialJitter {
    fn default() -> Self {
        TrialJitter { walk_speed: 0.05, cadence: 0.05, amplitude: 0.05, redraw_phase: true }
    }
}

impl TrialJitter {
    pub fn none() -> Self {
        TrialJitter { walk_speed: 0.0, cadence: 0.0, amplitude: 0.0, redraw_phase: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterScatterer {
    pub range: f64,
    pub reflectivity: f64,
}

/// The room: walk geometry, static clutter, receiver noise and trial jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start_range: f64,
    pub chair_range: f64,
    pub clutter: Vec<ClutterScatterer>,
    pub noise_std: f64,
    pub jitter: TrialJitter,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            start_range: 7.0,
            chair_range: 3.5,
            clutter: vec![
                ClutterScatterer { range: 0.25, reflectivity: 4.0 },
                ClutterScatterer { range: 1.6, reflectivity: 1.2 },
                ClutterScatterer { range: 4.8, reflectivity: 0.8 },
                ClutterScatterer { range: 8.4, reflectivity: 2.5 },
            ],
            noise_std: 0.05,
            jitter: TrialJitter::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.start_range > self.chair_range && self.chair_range > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "need start_range > chair_range > 0, got {} and {}",
                self.start_range, self.chair_range
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidScenario(format!("noise_std must be nonnegative, got {}", self.noise_std)));
        }
        let j = &self.jitter;
        if !(j.walk_speed >= 0.0 && j.cadence >= 0.0 && j.amplitude >= 0.0) {
            return Err(Error::InvalidScenario("jitter scales must be nonnegative".into()));
        }
        Ok(())
    }

    /// Number of range bins covering at least [0, start_range + 2 m], rounded
    /// up to a length with no prime factor above 5 so range FFTs stay fast.
    pub fn range_bins(&self, params: &RadarParams) -> usize {
        let needed = ((self.start_range + RANGE_MARGIN) / params.range_sampling_interval).ceil() as usize + 1;
        (needed..).find(|&n| is_5_smooth(n)).unwrap_or(needed)
    }
}

fn is_5_smooth(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Range history of one point scatterer, sampled at f_s over T_o.
#[derive(Debug, Clone, PartialEq)]
pub struct ScattererTrack {
    pub ranges: Vec<f64>,
    pub reflectivity: f64,
}

/// Torso motion: raised-cosine speed-up, constant walk, raised-cosine stop,
/// then a raised-cosine recession while sitting.
struct TorsoSchedule {
    start: f64,
    speed: f64,
    walk_end: f64,
    sit_start: f64,
    sit_duration: f64,
    sit_displacement: f64,
}

impl TorsoSchedule {
    fn walked(&self, t: f64) -> f64 {
        let (v, ramp) = (self.speed, RAMP_TIME);
        let cruise_end = self.walk_end - ramp;
        if t <= 0.0 {
            0.0
        } else if t < ramp {
            0.5 * v * (t - ramp / PI * (PI * t / ramp).sin())
        } else if t < cruise_end {
            0.5 * v * ramp + v * (t - ramp)
        } else if t < self.walk_end {
            let tau = t - cruise_end;
            0.5 * v * ramp + v * (cruise_end - ramp) + 0.5 * v * (tau + ramp / PI * (PI * tau / ramp).sin())
        } else {
            v * (self.walk_end - ramp)
        }
    }

    /// Approach speed normalized by the walking speed, in [0, 1].
    fn gait_envelope(&self, t: f64) -> f64 {
        let ramp = RAMP_TIME;
        let cruise_end = self.walk_end - ramp;
        if t <= 0.0 || t >= self.walk_end {
            0.0
        } else if t < ramp {
            0.5 * (1.0 - (PI * t / ramp).cos())
        } else if t < cruise_end {
            1.0
        } else {
            0.5 * (1.0 + (PI * (t - cruise_end) / ramp).cos())
        }
    }

    fn recession(&self, t: f64) -> f64 {
        let u = t - self.sit_start;
        if u <= 0.0 {
            0.0
        } else if u < self.sit_duration {
            0.5 * self.sit_displacement * (1.0 - (PI * u / self.sit_duration).cos())
        } else {
            self.sit_displacement
        }
    }

    fn range(&self, t: f64) -> f64 {
        self.start - self.walked(t) + self.recession(t)
    }
}

fn jittered(rng: &mut ChaCha8Rng, value: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return value;
    }
    let z: f64 = rng.sample(StandardNormal);
    value * (1.0 + sigma * z).max(0.5)
}

/// Five scatterer tracks (torso first, then the four limbs) for one trial.
/// `seed` fixes the trial's jitter draws.
pub fn simulate_tracks(profile: &GaitProfile, scenario: &Scenario, params: &RadarParams, seed: u64) -> Result<Vec<ScattererTrack>> {
    params.validate()?;
    scenario.validate()?;
    profile.validate(scenario, params)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_TRACKS]));
    let j = scenario.jitter;
    let mut p = profile.clone();
    p.walk_speed = jittered(&mut rng, p.walk_speed, j.walk_speed);
    p.cadence = jittered(&mut rng, p.cadence, j.cadence);
    p.leg_swing_amplitude = jittered(&mut rng, p.leg_swing_amplitude, j.amplitude);
    p.arm_swing_amplitude = jittered(&mut rng, p.arm_swing_amplitude, j.amplitude);
    let phase0 = if j.redraw_phase { rng.gen_range(0.0..2.0 * PI) } else { 0.0 };
    // A slow trial may no longer reach the chair before sitting;
    // report against the jittered values.
    p.validate(scenario, params)?;

    let schedule = TorsoSchedule {
        start: scenario.start_range,
        speed: p.walk_speed,
        walk_end: p.walk_end_time(scenario),
        sit_start: p.sit_start_time,
        sit_duration: p.sit_duration,
        sit_displacement: p.sit_displacement,
    };

    let n = raw_sample_count(params)?;
    let dt = params.time_sampling_interval;
    let torso: Vec<f64> = (0..n).map(|i| schedule.range(i as f64 * dt)).collect();

    let mut tracks = vec![ScattererTrack { ranges: torso.clone(), reflectivity: p.torso_reflectivity }];
    for (limb, (&amp, &phase)) in p.limb_amplitudes().iter().zip(&p.limb_phase_offsets).enumerate() {
        let ranges = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                let swing = amp * (2.0 * PI * p.cadence * t + phase + phase0).sin();
                torso[i] + schedule.gait_envelope(t) * swing
            })
            .collect();
        tracks.push(ScattererTrack { ranges, reflectivity: p.limb_reflectivities[limb] });
    }

    let nyquist = nyquist_velocity(params)?;
    for (k, track) in tracks.iter().enumerate() {
        for (i, w) in track.ranges.windows(2).enumerate() {
            let speed = (w[1] - w[0]).abs() / dt;
            if speed >= nyquist {
                return Err(Error::KinematicsExceedNyquist { track: k, time: i as f64 * dt, speed, nyquist });
            }
        }
    }
    Ok(tracks)
}

/// Gaussian envelope standard deviation for a full width at half maximum of c/(2B).
pub fn envelope_sigma(params: &RadarParams) -> f64 {
    params.range_resolution() / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Adds `a·g(r − center)·cos(2k(r − center))` to `row` over the envelope support.
fn add_point_echo(row: &mut [f64], params: &RadarParams, range_start: f64, center: f64, amplitude: f64) {
    let dr = params.range_sampling_interval;
    let sigma = envelope_sigma(params);
    let two_k = 2.0 * params.wavenumber();
    let reach = ENVELOPE_SUPPORT * sigma;
    let lo = (((center - reach - range_start) / dr).floor().max(0.0)) as usize;
    let hi = ((((center + reach - range_start) / dr).ceil()) as isize).min(row.len() as isize - 1);
    if hi < 0 {
        return;
    }
    for (j, v) in row.iter_mut().enumerate().take(hi as usize + 1).skip(lo) {
        let x = range_start + j as f64 * dr - center;
        *v += amplitude * (-0.5 * (x / sigma).powi(2)).exp() * (two_k * x).cos();
    }
}

fn clutter_profile(scenario: &Scenario, params: &RadarParams, n_ranges: usize) -> Vec<f64> {
    let mut row = vec![0.0; n_ranges];
    for c in &scenario.clutter {
        add_point_echo(&mut row, params, 0.0, c.range, c.reflectivity);
    }
    row
}

fn check_grid(params: &RadarParams) -> Result<()> {
    let width = params.range_resolution();
    if params.range_sampling_interval > width / 4.0 {
        return Err(Error::GridTooCoarse { spacing: params.range_sampling_interval, width });
    }
    Ok(())
}

fn noise_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[TAG_NOISE]))
}

fn add_noise(samples: &mut [f64], std: f64, rng: &mut ChaCha8Rng) {
    if std > 0.0 {
        for v in samples {
            let z: f64 = rng.sample(StandardNormal);
            *v += std * z;
        }
    }
}

/// Renders s₀(t, r) = Σ aᵢ·g(r − Rᵢ(t))·cos(2k(r − Rᵢ(t))) + clutter(r) + noise
/// on the grid [0, start_range + 2 m] × [0, T_o).
pub fn render_echo(tracks: &[ScattererTrack], scenario: &Scenario, params: &RadarParams, seed: u64) -> Result<RawFrameSeries> {
    params.validate()?;
    scenario.validate()?;
    check_grid(params)?;
    let n_t = raw_sample_count(params)?;
    if let Some(bad) = tracks.iter().position(|t| t.ranges.len() != n_t) {
        return Err(Error::GridMismatch(format!("track {bad} has {} samples, expected {n_t}", tracks[bad].ranges.len())));
    }
    let n_r = scenario.range_bins(params);
    let clutter = clutter_profile(scenario, params, n_r);

    let mut out = RawFrameSeries::zeros(*params, n_t, n_r, 0.0);
    for t in 0..n_t {
        let row = out.row_mut(t);
        row.copy_from_slice(&clutter);
        for track in tracks {
            add_point_echo(row, params, 0.0, track.ranges[t], track.reflectivity);
        }
    }
    add_noise(out.samples_mut(), scenario.noise_std, &mut noise_rng(seed));
    Ok(out)
}

/// Empty-room recording: clutter plus noise, averaged over slow time into a
/// single profile that is repeated on every row.
pub fn capture_background(scenario: &Scenario, params: &RadarParams, seed: u64) -> Result<RawFrameSeries> {
    params.validate()?;
    scenario.validate()?;
    check_grid(params)?;
    let n_t = raw_sample_count(params)?;
    let n_r = scenario.range_bins(params);
    let mut profile = clutter_profile(scenario, params, n_r);

    if scenario.noise_std > 0.0 && n_t > 0 {
        let mut rng = noise_rng(derive_seed(seed, &[TAG_BACKGROUND]));
        let mut mean = vec![0.0; n_r];
        let mut row = vec![0.0; n_r];
        for _ in 0..n_t {
            row.fill(0.0);
            add_noise(&mut row, scenario.noise_std, &mut rng);
            for (m, v) in mean.iter_mut().zip(&row) {
                *m += v;
            }
        }
        for (p, m) in profile.iter_mut().zip(&mean) {
            *p += m / n_t as f64;
        }
    }

    let mut out = RawFrameSeries::zeros(*params, n_t, n_r, 0.0);
    for t in 0..n_t {
        out.row_mut(t).copy_from_slice(&profile);
    }
    Ok(out)
}

/// Seed of trial `trial` of identity `label`; independent of generation order.
pub fn trial_seed(seed: u64, label: Label, trial: usize) -> u64 {
    derive_seed(seed, &[TAG_TRIAL, u64::from(label.0), trial as u64])
}

/// One jittered, noisy trial rendered with the given trial seed.
pub fn render_trial(profile: &GaitProfile, scenario: &Scenario, params: &RadarParams, trial_seed: u64) -> Result<RawFrameSeries> {
    let tracks = simulate_tracks(profile, scenario, params, trial_seed)?;
    render_echo(&tracks, scenario, params, trial_seed)
}

/// One trial descriptor of a dataset: which identity, which repetition, which seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSpec {
    pub profile_index: usize,
    pub label: Label,
    pub trial: usize,
    pub seed: u64,
}

/// Enumerates the trials of a dataset, identity-major.
pub fn dataset_plan(profiles: &[GaitProfile], trials_per_identity: usize, seed: u64) -> Result<Vec<TrialSpec>> {
    if profiles.is_empty() {
        return Err(Error::InvalidProfile("no identities given".into()));
    }
    let mut labels: Vec<Label> = profiles.iter().map(|p| p.identity_label).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != profiles.len() {
        return Err(Error::InvalidProfile("identity labels must be distinct".into()));
    }
    Ok(profiles
        .iter()
        .enumerate()
        .flat_map(|(profile_index, p)| {
            (0..trials_per_identity).map(move |trial| TrialSpec {
                profile_index,
                label: p.identity_label,
                trial,
                seed: trial_seed(seed, p.identity_label, trial),
            })
        })
        .collect())
}

/// Renders every trial in memory. A default-sized trial is ≈12.6 MB, so
/// large datasets should rather be streamed through [`dataset_plan`] and
/// [`render_trial`].
pub fn generate_dataset(
    profiles: &[GaitProfile],
    scenario: &Scenario,
    params: &RadarParams,
    trials_per_identity: usize,
    seed: u64,
) -> Result<Vec<(RawFrameSeries, Label)>> {
    if trials_per_identity == 0 {
        return Err(Error::InvalidProfile("trials_per_identity must be at least 1".into()));
    }
    dataset_plan(profiles, trials_per_identity, seed)?
        .into_par_iter()
        .map(|spec| Ok((render_trial(&profiles[spec.profile_index], scenario, params, spec.seed)?, spec.label)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> Scenario {
        Scenario { noise_std: 0.0, jitter: TrialJitter::none(), ..Scenario::default() }
    }

    fn still_limbs(profile: &GaitProfile) -> GaitProfile {
        GaitProfile { leg_swing_amplitude: 0.0, arm_swing_amplitude: 0.0, sit_displacement: 0.0, ..profile.clone() }
    }

    #[test]
    fn default_profiles_are_separated() {
        let set = GaitProfile::default_set();
        assert_eq!(set.len(), 6);
        for (i, a) in set.iter().enumerate() {
            for b in &set[i + 1..] {
                assert!((a.cadence - b.cadence).abs() >= 0.15 - 1e-12);
                assert!((a.walk_speed - b.walk_speed).abs() >= 0.1 - 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_profile_gives_monotone_torso_and_copied_limbs() {
        let params = RadarParams::default();
        let p = still_limbs(&GaitProfile::default_set()[2]);
        let tracks = simulate_tracks(&p, &quiet(), &params, 1).unwrap();
        assert_eq!(tracks.len(), 5);
        let dt = params.time_sampling_interval;
        for w in tracks[0].ranges.windows(2) {
            let approach = (w[0] - w[1]) / dt;
            assert!(approach >= -1e-9 && approach <= p.walk_speed + 1e-9, "{approach}");
        }
        for limb in &tracks[1..] {
            assert_eq!(limb.ranges, tracks[0].ranges);
        }
    }

    #[test]
    fn torso_reaches_chair_before_sitting() {
        let params = RadarParams::default();
        let scenario = quiet();
        for p in GaitProfile::default_set() {
            let tracks = simulate_tracks(&p, &scenario, &params, 0).unwrap();
            let idx = (p.sit_start_time / params.time_sampling_interval).floor() as usize - 1;
            let r = tracks[0].ranges[idx];
            assert!((r - scenario.chair_range).abs() <= 0.05, "identity {}: {r}", p.identity_label);
            let end = *tracks[0].ranges.last().unwrap();
            assert!((end - scenario.chair_range - p.sit_displacement).abs() < 1e-9);
        }
    }

    #[test]
    fn schedule_integrates_to_walk_distance() {
        let s = TorsoSchedule {
            start: 7.0,
            speed: 1.1,
            walk_end: 3.5 / 1.1 + RAMP_TIME,
            sit_start: 6.0,
            sit_duration: 1.0,
            sit_displacement: 0.3,
        };
        // Midpoint-rule integral of the speed profile gives the distance walked.
        let n = 200_000;
        let h = s.walk_end / n as f64;
        let walked: f64 = (0..n).map(|i| s.speed * s.gait_envelope((i as f64 + 0.5) * h) * h).sum();
        assert!((walked - 3.5).abs() < 1e-6, "{walked}");
        assert!((s.walked(s.walk_end) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn tracks_are_deterministic_and_seed_dependent() {
        let params = RadarParams::default();
        let scenario = Scenario::default();
        let p = &GaitProfile::default_set()[0];
        let a = simulate_tracks(p, &scenario, &params, 9).unwrap();
        let b = simulate_tracks(p, &scenario, &params, 9).unwrap();
        let c = simulate_tracks(p, &scenario, &params, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn excessive_swing_is_rejected() {
        let params = RadarParams::default();
        let p = GaitProfile { leg_swing_amplitude: 0.4, ..GaitProfile::default_set()[3].clone() };
        assert!(matches!(simulate_tracks(&p, &quiet(), &params, 0), Err(Error::KinematicsExceedNyquist { .. })));
    }

    #[test]
    fn invalid_profiles_rejected() {
        let params = RadarParams::default();
        let base = GaitProfile::default_set()[0].clone();
        let cases = [
            GaitProfile { walk_speed: 0.0, ..base.clone() },
            GaitProfile { walk_speed: 4.0, ..base.clone() },
            GaitProfile { cadence: -1.0, ..base.clone() },
            GaitProfile { arm_swing_amplitude: -0.1, ..base.clone() },
            GaitProfile { sit_start_time: 7.5, ..base.clone() },
            GaitProfile { sit_start_time: 3.0, ..base.clone() },
        ];
        for p in cases {
            assert!(matches!(simulate_tracks(&p, &quiet(), &params, 0), Err(Error::InvalidProfile(_))), "{p:?}");
        }
        let bad = Scenario { chair_range: 8.0, ..quiet() };
        assert!(matches!(simulate_tracks(&base, &bad, &params, 0), Err(Error::InvalidScenario(_))));
    }

    #[test]
    fn static_scene_rows_are_identical() {
        let params = RadarParams::default();
        let scenario = Scenario { clutter: vec![ClutterScatterer { range: 4.0, reflectivity: 1.0 }], ..quiet() };
        let raw = render_echo(&[], &scenario, &params, 0).unwrap();
        let first = raw.row(0).to_vec();
        for t in 1..raw.n_times() {
            assert_eq!(raw.row(t), &first[..]);
        }
        // envelope peak at the scatterer
        let peak = (0..raw.n_ranges()).max_by(|&a, &b| first[a].abs().total_cmp(&first[b].abs())).unwrap();
        assert!((raw.range(peak) - 4.0).abs() <= params.range_sampling_interval);
        assert!(raw.range(raw.n_ranges() - 1) >= scenario.start_range + RANGE_MARGIN);
    }

    #[test]
    fn background_without_noise_is_clutter() {
        let params = RadarParams::default();
        let scenario = quiet();
        let bg = capture_background(&scenario, &params, 3).unwrap();
        let clutter = render_echo(&[], &scenario, &params, 3).unwrap();
        assert_eq!(bg, clutter);
        let empty = Scenario { clutter: vec![], ..quiet() };
        assert!(capture_background(&empty, &params, 3).unwrap().samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn background_subtraction_removes_static_energy() {
        let params = RadarParams::default();
        let scenario = quiet();
        let p = &GaitProfile::default_set()[1];
        let tracks = simulate_tracks(p, &scenario, &params, 5).unwrap();
        let with_clutter = render_echo(&tracks, &scenario, &params, 5).unwrap();
        let bg = capture_background(&scenario, &params, 5).unwrap();
        let clean = render_echo(&tracks, &Scenario { clutter: vec![], ..quiet() }, &params, 5).unwrap();
        let cleaned = crate::dsp::remove_clutter(&with_clutter, &bg).unwrap();
        let residual: f64 = cleaned.samples().iter().zip(clean.samples()).map(|(a, b)| (a - b).powi(2)).sum();
        let energy: f64 = clean.samples().iter().map(|v| v * v).sum();
        assert!(residual < 1e-12 * energy, "{residual} vs {energy}");
    }

    #[test]
    fn energy_is_local_to_the_track() {
        let params = RadarParams::default();
        let scenario = Scenario { clutter: vec![], ..quiet() };
        let track = ScattererTrack { ranges: (0..1600).map(|i| 5.0 - 0.0005 * i as f64).collect(), reflectivity: 1.0 };
        let raw = render_echo(std::slice::from_ref(&track), &scenario, &params, 0).unwrap();
        let width = params.range_resolution();
        let (mut near, mut total) = (0.0, 0.0);
        for t in 0..raw.n_times() {
            for r in 0..raw.n_ranges() {
                let e = raw.get(t, r).powi(2);
                total += e;
                if (raw.range(r) - track.ranges[t]).abs() <= 3.0 * width {
                    near += e;
                }
            }
        }
        assert!(near >= 0.99 * total);
    }

    #[test]
    fn coarse_grid_rejected() {
        let params = RadarParams { range_sampling_interval: 0.02, ..RadarParams::default() };
        assert!(matches!(render_echo(&[], &quiet(), &params, 0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn dataset_shape_and_determinism() {
        let params = RadarParams { observation_time: 8.0, ..RadarParams::default() };
        let profiles = GaitProfile::default_set();
        let plan = dataset_plan(&profiles, 100, 42).unwrap();
        assert_eq!(plan.len(), 600);
        let mut seeds: Vec<u64> = plan.iter().map(|s| s.seed).collect();
        seeds.sort();
        seeds.dedup();
        assert_eq!(seeds.len(), 600);

        let small = &profiles[..2];
        let a = generate_dataset(small, &Scenario::default(), &params, 1, 42).unwrap();
        let b = generate_dataset(small, &Scenario::default(), &params, 1, 42).unwrap();
        let c = generate_dataset(small, &Scenario::default(), &params, 1, 43).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
        assert_ne!(a[0].0, c[0].0);
        assert_eq!(a[1].1, Label(2));
    }

    #[test]
    fn single_unjittered_trial_matches_direct_render() {
        let params = RadarParams::default();
        let scenario = quiet();
        let p = GaitProfile::default_set()[4].clone();
        let data = generate_dataset(std::slice::from_ref(&p), &scenario, &params, 1, 7).unwrap();
        let seed = trial_seed(7, p.identity_label, 0);
        let tracks = simulate_tracks(&p, &scenario, &params, seed).unwrap();
        assert_eq!(data[0].0, render_echo(&tracks, &scenario, &params, seed).unwrap());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let mut set = GaitProfile::default_set();
        set[1].identity_label = Label(1);
        assert!(dataset_plan(&set, 1, 0).is_err());
        assert!(dataset_plan(&[], 1, 0).is_err());
    }
}
