use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_loss, ClassScores, CnnModel, PROB_FLOOR};
use crate::dsp::SpectrogramImage;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::seed::{derive_seed, TAG_SGD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { learning_rate: 1e-3, momentum: 0.9, epochs: 300, batch_size: 32, seed: 0 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidHyperparams(format!("learning rate {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidHyperparams(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidHyperparams("epochs and batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean pre-update batch loss of every epoch.
    pub loss_history: Vec<f64>,
}

/// Precomputes the frozen-stage features of a labeled set.
pub fn feature_set(model: &CnnModel, set: &[(SpectrogramImage, Label)]) -> Result<Vec<(Vec<f64>, usize)>> {
    set.par_iter().map(|(image, label)| Ok((model.features(image), model.class_index(*label)?))).collect()
}

/// Trains the fully-connected weights with mini-batch SGD with momentum:
/// `v ← μ·v − η·ḡ`, `W ← W + v`, where ḡ is the batch-mean gradient.
/// Each epoch reshuffles with an RNG seeded from `hp.seed` and the model's
/// init seed. Convolution filters are left untouched.
pub fn train_fc(model: &CnnModel, train_set: &[(SpectrogramImage, Label)], hp: &Hyperparams) -> Result<(CnnModel, TrainReport)> {
    hp.validate()?;
    if train_set.is_empty() {
        return Err(Error::InvalidHyperparams("empty training set".into()));
    }
    let features = feature_set(model, train_set)?;
    train_fc_on_features(model, &features, hp)
}

/// [`train_fc`] on features already computed with this model's filters.
pub fn train_fc_on_features(model: &CnnModel, features: &[(Vec<f64>, usize)], hp: &Hyperparams) -> Result<(CnnModel, TrainReport)> {
    hp.validate()?;
    if features.is_empty() {
        return Err(Error::InvalidHyperparams("empty training set".into()));
    }
    let n_out = model.n_out();
    let n_in = model.fc.len() / n_out;
    // Class-major copy of the weights: per-class dot products and updates
    // then run over contiguous memory.
    let mut weights = transpose(&model.fc, n_in, n_out);
    let mut velocity = vec![0.0; weights.len()];
    let mut grad = vec![0.0; weights.len()];
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, &[TAG_SGD, model.init_seed()]));
    let mut loss_history = Vec::with_capacity(hp.epochs);
    let mut z = vec![0.0; n_out];

    for epoch in 0..hp.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(hp.batch_size) {
            grad.fill(0.0);
            let scale = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let (f, class) = &features[i];
                for (zc, w) in z.iter_mut().zip(weights.chunks_exact(n_in)) {
                    *zc = dot(w, f);
                }
                let q = ClassScores::from_logits(&z).probabilities;
                batch_loss += -q[*class].max(PROB_FLOOR).ln();
                for (c, g) in grad.chunks_exact_mut(n_in).enumerate() {
                    let d = scale * (q[c] - if c == *class { 1.0 } else { 0.0 });
                    for (gi, &fi) in g.iter_mut().zip(f) {
                        *gi += d * fi;
                    }
                }
            }
            batch_loss *= scale;
            if !batch_loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            for ((w, v), g) in weights.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = hp.momentum * *v - hp.learning_rate * g;
                *w += *v;
            }
            epoch_loss += batch_loss;
            batches += 1;
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        loss_history.push(epoch_loss / batches as f64);
    }
    let mut trained = model.clone();
    trained.fc = transpose(&weights, n_out, n_in);
    Ok((trained, TrainReport { loss_history }))
}

fn transpose(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; m.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = m[r * cols + c];
        }
    }
    t
}

/// Dot product with four interleaved partial sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Mean cross-entropy of `model` over a labeled feature set.
pub fn mean_loss(model: &CnnModel, features: &[(Vec<f64>, usize)]) -> f64 {
    let total: f64 = features.iter().map(|(f, c)| sample_loss(&model.fc, f, *c, model.n_out())).sum();
    total / features.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{IMAGE_COLS, IMAGE_ROWS};
    use rand::Rng;

    fn random_set(n: usize, n_out: u32, seed: u64) -> Vec<(SpectrogramImage, Label)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let pixels = (0..IMAGE_ROWS * IMAGE_COLS).map(|_| rng.gen()).collect();
                let label = Label(i as u32 % n_out + 1);
                (SpectrogramImage::new(pixels, Some(label)).unwrap(), label)
            })
            .collect()
    }

    #[test]
    fn zero_learning_rate_leaves_weights_unchanged() {
        let model = CnnModel::init(3, 4).unwrap();
        let set = random_set(6, 3, 1);
        let hp = Hyperparams { learning_rate: 0.0, epochs: 5, batch_size: 4, ..Hyperparams::default() };
        let (trained, report) = train_fc(&model, &set, &hp).unwrap();
        assert_eq!(trained, model);
        assert_eq!(report.loss_history.len(), 5);
    }

    #[test]
    fn single_example_loss_decreases() {
        let model = CnnModel::init(6, 8).unwrap();
        let set = random_set(1, 6, 2);
        let features = feature_set(&model, &set).unwrap();
        let before = mean_loss(&model, &features);
        let hp = Hyperparams { epochs: 300, ..Hyperparams::default() };
        let (trained, _) = train_fc(&model, &set, &hp).unwrap();
        let after = mean_loss(&trained, &features);
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn training_is_deterministic_and_keeps_filters() {
        let model = CnnModel::init(3, 11).unwrap();
        let set = random_set(9, 3, 3);
        let hp = Hyperparams { epochs: 20, batch_size: 4, seed: 5, ..Hyperparams::default() };
        let (a, ra) = train_fc(&model, &set, &hp).unwrap();
        let (b, rb) = train_fc(&model, &set, &hp).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert_eq!(a.conv1(), model.conv1());
        assert_eq!(a.conv2(), model.conv2());
        assert_ne!(a.fc_weights(), model.fc_weights());
        let (c, _) = train_fc(&model, &set, &Hyperparams { seed: 6, ..hp }).unwrap();
        assert_ne!(a.fc_weights(), c.fc_weights());
    }

    #[test]
    fn full_batch_loss_is_non_increasing() {
        let model = CnnModel::init(6, 21).unwrap();
        let set = random_set(10, 6, 4);
        let hp = Hyperparams { epochs: 50, batch_size: set.len(), momentum: 0.0, ..Hyperparams::default() };
        let (_, report) = train_fc(&model, &set, &hp).unwrap();
        for (e, w) in report.loss_history.windows(2).enumerate() {
            assert!(w[1] <= w[0] + 1e-9, "epoch {}: {} -> {}", e + 1, w[0], w[1]);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let model = CnnModel::init(3, 1).unwrap();
        let set = random_set(6, 3, 9);
        let hp = Hyperparams { learning_rate: 1e307, momentum: 0.0, epochs: 10, batch_size: 6, seed: 0 };
        assert!(matches!(train_fc(&model, &set, &hp), Err(Error::Divergence { .. })));
    }

    #[test]
    fn invalid_inputs_rejected() {
        let model = CnnModel::init(3, 1).unwrap();
        let set = random_set(3, 3, 9);
        assert!(train_fc(&model, &[], &Hyperparams::default()).is_err());
        assert!(train_fc(&model, &set, &Hyperparams { momentum: 1.0, ..Hyperparams::default() }).is_err());
        assert!(train_fc(&model, &set, &Hyperparams { batch_size: 0, ..Hyperparams::default() }).is_err());
        let bad = vec![(set[0].0.clone(), Label(7))];
        assert!(matches!(train_fc(&model, &bad, &Hyperparams::default()), Err(Error::UnknownLabel(7))));
    }
}
