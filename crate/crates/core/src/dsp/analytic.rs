use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{AnalyticSeries, RawFrameSeries};
use crate::error::{Error, Result};

/// Per-bin weights of the discrete analytic-signal filter: DC (and the
/// Nyquist bin for even lengths) at unit weight, positive wavenumbers doubled,
/// negative wavenumbers zeroed.
pub(crate) fn analytic_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n == 0 {
        return w;
    }
    w[0] = 1.0;
    let half = n / 2;
    if n.is_multiple_of(2) {
        w[1..half].fill(2.0);
        w[half] = 1.0;
    } else {
        w[1..=half].fill(2.0);
    }
    w
}

/// Converts each time row of `raw` into its analytic signal along range.
pub fn analytic_signal(raw: &RawFrameSeries) -> Result<AnalyticSeries> {
    let n = raw.n_ranges;
    if n < 2 {
        return Err(Error::GridMismatch(format!("analytic signal needs at least 2 range bins, got {n}")));
    }
    if let Some(pos) = raw.samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { time: pos / n, range: pos % n });
    }

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::default(); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
    // Fold the 1/n of the inverse transform into the weights.
    let weights: Vec<f64> = analytic_weights(n).into_iter().map(|w| w / n as f64).collect();

    let mut samples = Vec::with_capacity(raw.samples.len());
    let mut buf = vec![Complex64::default(); n];
    for row in raw.samples.chunks_exact(n) {
        for (b, &v) in buf.iter_mut().zip(row) {
            *b = Complex64::new(v, 0.0);
        }
        forward.process_with_scratch(&mut buf, &mut scratch);
        for (b, &w) in buf.iter_mut().zip(&weights) {
            *b *= w;
        }
        inverse.process_with_scratch(&mut buf, &mut scratch);
        samples.extend_from_slice(&buf);
    }

    Ok(AnalyticSeries { params: raw.params, n_times: raw.n_times, n_ranges: n, range_start: raw.range_start, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RadarParams;
    use std::f64::consts::PI;

    /// Textbook O(n²) DFT; independent of rustfft.
    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| x.iter().enumerate().map(|(m, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / n as f64)).sum())
            .collect()
    }

    fn one_row(values: Vec<f64>) -> RawFrameSeries {
        let n = values.len();
        RawFrameSeries::new(RadarParams::default(), 1, n, 0.0, values).unwrap()
    }

    #[test]
    fn cosine_becomes_complex_exponential() {
        let n = 64;
        let k0 = 2.0 * PI * 5.0 / n as f64;
        let raw = one_row((0..n).map(|r| (k0 * r as f64).cos()).collect());
        let s = analytic_signal(&raw).unwrap();
        for (r, z) in s.row(0).iter().enumerate() {
            let expected = Complex64::from_polar(1.0, k0 * r as f64);
            assert!((z - expected).norm() < 1e-12, "bin {r}: {z} vs {expected}");
        }
    }

    #[test]
    fn constant_is_preserved() {
        for n in [8, 9] {
            let s = analytic_signal(&one_row(vec![3.5; n])).unwrap();
            for z in s.row(0) {
                assert!((z.re - 3.5).abs() < 1e-12 && z.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn windowed_chirp_is_analytic() {
        for n in [200, 257] {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let u = i as f64 / n as f64;
                    let env = (PI * u).sin().powi(2);
                    env * (2.0 * PI * (20.0 * u + 30.0 * u * u)).cos()
                })
                .collect();
            let s = analytic_signal(&one_row(x.clone())).unwrap();
            for (z, v) in s.row(0).iter().zip(&x) {
                assert!((z.re - v).abs() <= 1e-9 * v.abs().max(1.0));
            }
            let spec = dft(s.row(0));
            let total: f64 = spec.iter().map(|z| z.norm_sqr()).sum();
            let negative: f64 = spec[n / 2 + 1..].iter().map(|z| z.norm_sqr()).sum();
            assert!(negative < 1e-9 * total, "n={n}: {negative} / {total}");
        }
    }

    #[test]
    fn rejects_non_finite_and_too_short() {
        let mut v = vec![0.0; 6];
        v[4] = f64::NAN;
        let raw = RawFrameSeries::new(RadarParams::default(), 2, 3, 0.0, v).unwrap();
        assert!(matches!(analytic_signal(&raw), Err(Error::NonFiniteInput { time: 1, range: 1 })));
        assert!(analytic_signal(&one_row(vec![1.0])).is_err());
    }

    #[test]
    fn weights_even_and_odd() {
        assert_eq!(analytic_weights(4), vec![1.0, 2.0, 1.0, 0.0]);
        assert_eq!(analytic_weights(5), vec![1.0, 2.0, 2.0, 0.0, 0.0]);
    }
}
