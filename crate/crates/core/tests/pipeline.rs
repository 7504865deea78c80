mod common;

use common::{analytic_row, constant_velocity_echo, quiet_scenario};
use mdid_core::dsp::{analytic_signal, stft_spectrogram, to_image, ImagePipeline, IMAGE_COLS, IMAGE_ROWS};
use mdid_core::eval::make_folds;
use mdid_core::synth::{render_trial, simulate_tracks};
use mdid_core::{ClassScores, GaitProfile, Label, RadarParams, RawFrameSeries, Spectrogram};
use proptest::prelude::*;

fn short_params(seconds: f64) -> RadarParams {
    RadarParams { observation_time: seconds, ..RadarParams::default() }
}

#[test]
fn receding_target_reads_below_zero_row() {
    let params = short_params(2.0);
    let raw = constant_velocity_echo(&params, 3.0, -0.8);
    let spec = ImagePipeline::new(&params).unwrap().spectrogram(&raw, None).unwrap();
    let axis = &spec.velocity_axis;
    for f in 4..spec.frames() - 4 {
        let v = axis.velocity(spec.argmax_row(f));
        assert!((v + 0.8).abs() <= axis.velocity(0) - axis.velocity(1), "frame {f}: {v}");
    }
}

#[test]
fn eight_second_trial_gives_full_image() {
    let params = RadarParams::default();
    let profile = &GaitProfile::default_set()[0];
    let raw = render_trial(profile, &quiet_scenario(), &params, 3).unwrap();
    assert_eq!(raw.n_times(), 1600);
    let image = ImagePipeline::new(&params).unwrap().image(&raw, None).unwrap();
    assert_eq!((IMAGE_ROWS, IMAGE_COLS), (32, 100));
    assert_eq!(image.pixels().len(), 3200);
    assert!(image.pixels().contains(&255));
}

/// The torso moves away from the radar while sitting down, so the sit
/// interval carries mostly negative velocities.
#[test]
fn sitting_recedes() {
    let params = RadarParams::default();
    let scenario = quiet_scenario();
    let profile = &GaitProfile::default_set()[2];
    let tracks = simulate_tracks(profile, &scenario, &params, 0).unwrap();
    let torso = &tracks[0].ranges;
    let dt = params.time_sampling_interval;
    let start = ((profile.sit_start_time) / dt).ceil() as usize;
    let end = (((profile.sit_start_time + profile.sit_duration) / dt) as usize).min(torso.len() - 1);
    assert!(torso[end] > torso[start], "range must grow while sitting");

    let raw = render_trial(profile, &scenario, &params, 0).unwrap();
    let spec = ImagePipeline::new(&params).unwrap().spectrogram(&raw, None).unwrap();
    let axis = &spec.velocity_axis;
    let (mut weighted, mut total) = (0.0, 0.0);
    for (f, &t) in spec.frame_times.iter().enumerate() {
        if t > profile.sit_start_time + 0.2 && t < profile.sit_start_time + profile.sit_duration - 0.2 {
            for r in 0..spec.doppler_bins() {
                weighted += axis.velocity(r) * spec.get(r, f);
                total += spec.get(r, f);
            }
        }
    }
    assert!(total > 0.0);
    assert!(weighted / total < 0.0, "mean velocity {}", weighted / total);
}

#[test]
fn wider_gate_never_loses_energy() {
    let params = short_params(1.0);
    let raw = constant_velocity_echo(&params, 3.2, 0.5);
    let analytic = analytic_signal(&raw).unwrap();
    let narrow = stft_spectrogram(&analytic, (2.8, 3.3), 16).unwrap();
    let wide = stft_spectrogram(&analytic, (2.0, 4.0), 16).unwrap();
    for (n, w) in narrow.values.iter().zip(&wide.values) {
        assert!(*n <= *w + 1e-12 * w.abs().max(1.0));
    }
}

#[test]
fn pipeline_is_deterministic() {
    let params = RadarParams::default();
    let profile = &GaitProfile::default_set()[4];
    let pipeline = ImagePipeline::new(&params).unwrap();
    let a = pipeline.image(&render_trial(profile, &quiet_scenario(), &params, 9).unwrap(), None).unwrap();
    let b = pipeline.image(&render_trial(profile, &quiet_scenario(), &params, 9).unwrap(), None).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analytic_signal_matches_direct_dft(row in prop::collection::vec(-1.0f64..1.0, 2..40)) {
        let n_r = row.len();
        let raw = RawFrameSeries::new(RadarParams::default(), 1, n_r, 0.0, row.clone()).unwrap();
        let fast = analytic_signal(&raw).unwrap();
        let slow = analytic_row(&row);
        for (j, (a, b)) in fast.row(0).iter().zip(&slow).enumerate() {
            prop_assert!((a - b).norm() < 1e-10, "bin {}: {} vs {}", j, a, b);
            prop_assert!((a.re - row[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-50.0f64..50.0, 1..12), shift in -100.0f64..100.0) {
        let scores = ClassScores::from_logits(&logits);
        let sum: f64 = scores.probabilities.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(scores.probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
        let other = ClassScores::from_logits(&shifted);
        prop_assert_eq!(scores.argmax(), other.argmax());
        for (a, b) in scores.probabilities.iter().zip(&other.probabilities) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn folds_partition_every_class_evenly(classes in 1usize..6, per_fold in 1usize..5, k in 2usize..6, seed in any::<u64>()) {
        let labels: Vec<Label> = (0..classes).flat_map(|c| std::iter::repeat_n(Label(c as u32 + 1), per_fold * k)).collect();
        let plan = make_folds(&labels, k, seed).unwrap();
        prop_assert_eq!(plan.assignments.len(), labels.len());
        let mut seen = vec![false; labels.len()];
        for fold in 0..k {
            let held = plan.held_out(fold);
            for c in 0..classes {
                let count = held.iter().filter(|&&i| labels[i].0 as usize == c + 1).count();
                prop_assert_eq!(count, per_fold);
            }
            for i in held {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s));
        prop_assert_eq!(make_folds(&labels, k, seed).unwrap(), plan);
    }

    #[test]
    fn image_is_monotone_in_power(values in prop::collection::vec(0.0f64..1e3, 3200), scale in 0.1f64..10.0) {
        let mut spec = Spectrogram {
            values: values.clone(),
            velocity_axis: RadarParams::default().velocity_axis().unwrap(),
            frame_times: (0..100).map(|f| f as f64 * 0.08).collect(),
            range_gate: (2.0, 9.0),
            hop_samples: 16,
            window_len: 32,
        };
        let image = to_image(&spec, 40.0).unwrap();
        for i in 0..values.len() {
            for j in [0usize, 7, 1999, 3199] {
                if values[i] > values[j] {
                    prop_assert!(image.pixels()[i] >= image.pixels()[j]);
                }
            }
        }
        spec.values = values.iter().map(|v| v * scale).collect();
        let scaled = to_image(&spec, 40.0).unwrap();
        for (a, b) in scaled.pixels().iter().zip(image.pixels()) {
            prop_assert!(a.abs_diff(*b) <= 1);
        }
    }
}
