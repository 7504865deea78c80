//! Two-layer CNN classifier.
//!
//! ```text
//! 32×100 image ─ conv 10×(10×10) stride 1×2 ─ ReLU ─ maxpool 2×2/1 ─▶ 10×22×45
//!              ─ conv 10×(10×10×10) stride 1×2 ─ ReLU ─ maxpool 2×2/1 ─▶ 10×12×17
//!              ─ flatten 2,040 ─ FC 2,040×N (no bias) ─ softmax ─ argmax
//! ```
//!
//! The convolution filters are seeded random values and stay frozen; only the
//! fully-connected weights are trained.

mod model_file;
mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use model_file::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use train::{feature_set, mean_loss, train_fc, train_fc_on_features, Hyperparams, TrainReport};

use crate::dsp::{SpectrogramImage, IMAGE_COLS, IMAGE_ROWS};
use crate::error::{Error, Result};
use crate::label::Label;

pub const FILTERS: usize = 10;
pub const KERNEL: usize = 10;
pub const ROW_STRIDE: usize = 1;
pub const COL_STRIDE: usize = 2;
pub const POOL: usize = 2;
/// Standard deviation of every initial parameter.
pub const INIT_STD: f64 = 0.1;
/// Floor applied to the true-class probability before taking its log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Output length of a valid (unpadded) convolution or pooling window.
pub const fn conv_out(input: usize, kernel: usize, stride: usize) -> usize {
    (input - kernel) / stride + 1
}

/// `(rows, cols)` after one conv + pool stage.
pub const fn stage_out(rows: usize, cols: usize) -> (usize, usize) {
    (conv_out(conv_out(rows, KERNEL, ROW_STRIDE), POOL, 1), conv_out(conv_out(cols, KERNEL, COL_STRIDE), POOL, 1))
}

pub const LAYER1_SHAPE: (usize, usize) = stage_out(IMAGE_ROWS, IMAGE_COLS);
pub const LAYER2_SHAPE: (usize, usize) = stage_out(LAYER1_SHAPE.0, LAYER1_SHAPE.1);
/// N_in, the flattened feature length.
pub const FEATURES: usize = FILTERS * LAYER2_SHAPE.0 * LAYER2_SHAPE.1;

const CONV1_LEN: usize = FILTERS * KERNEL * KERNEL;
const CONV2_LEN: usize = FILTERS * FILTERS * KERNEL * KERNEL;

/// Dense depth × rows × cols volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub depth: usize,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Volume {
    fn zeros(depth: usize, rows: usize, cols: usize) -> Self {
        Volume { depth, rows, cols, data: vec![0.0; depth * rows * cols] }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.depth, self.rows, self.cols)
    }

    #[inline]
    fn at(&self, d: usize, r: usize, c: usize) -> f64 {
        self.data[(d * self.rows + r) * self.cols + c]
    }
}

/// max(x, 0).
#[inline]
pub fn relu(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        0.0
    }
}

/// Valid cross-correlation of `input` with full-depth `filters`
/// (`FILTERS × depth × KERNEL × KERNEL`), then ReLU.
fn conv_relu(input: &Volume, filters: &[f64]) -> Volume {
    const N: usize = FILTERS;
    let rows = conv_out(input.rows, KERNEL, ROW_STRIDE);
    let cols = conv_out(input.cols, KERNEL, COL_STRIDE);
    let mut out = Volume::zeros(N, rows, cols);
    let depth = input.depth;
    let per_filter = depth * KERNEL * KERNEL;
    // Filter index innermost, so all filters accumulate side by side.
    let mut interleaved = vec![0.0; filters.len()];
    for f in 0..N {
        for i in 0..per_filter {
            interleaved[i * N + f] = filters[f * per_filter + i];
        }
    }
    let mut acc = [0.0; N];
    for r in 0..rows {
        for c in 0..cols {
            let (r0, c0) = (r * ROW_STRIDE, c * COL_STRIDE);
            acc.fill(0.0);
            for d in 0..depth {
                for a in 0..KERNEL {
                    let base = (d * input.rows + r0 + a) * input.cols + c0;
                    let src = &input.data[base..base + KERNEL];
                    let w0 = (d * KERNEL + a) * KERNEL * N;
                    let weights = &interleaved[w0..w0 + KERNEL * N];
                    for (x, w) in src.iter().zip(weights.chunks_exact(N)) {
                        for (s, k) in acc.iter_mut().zip(w) {
                            *s += x * k;
                        }
                    }
                }
            }
            for (f, s) in acc.iter().enumerate() {
                out.data[(f * rows + r) * cols + c] = relu(*s);
            }
        }
    }
    out
}

/// 2×2 max pooling at stride 1×1.
fn max_pool(input: &Volume) -> Volume {
    let rows = conv_out(input.rows, POOL, 1);
    let cols = conv_out(input.cols, POOL, 1);
    let mut out = Volume::zeros(input.depth, rows, cols);
    for d in 0..input.depth {
        for r in 0..rows {
            for c in 0..cols {
                let m = input.at(d, r, c).max(input.at(d, r, c + 1)).max(input.at(d, r + 1, c)).max(input.at(d, r + 1, c + 1));
                out.data[(d * rows + r) * cols + c] = m;
            }
        }
    }
    out
}

/// Softmax probabilities q₁..q_N.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    pub probabilities: Vec<f64>,
}

impl ClassScores {
    /// Max-subtracted softmax of raw logits.
    pub fn from_logits(logits: &[f64]) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        ClassScores { probabilities: exps.into_iter().map(|e| e / sum).collect() }
    }

    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.probabilities)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// The label of the most probable class (lowest index on ties).
pub fn predict(scores: &ClassScores, labels: &[Label]) -> Label {
    labels[scores.argmax()]
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub layer1: Volume,
    pub layer2: Volume,
    pub features: Vec<f64>,
    pub scores: ClassScores,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    conv1: Vec<f64>,
    conv2: Vec<f64>,
    /// Row-major N_in × N_out.
    fc: Vec<f64>,
    class_labels: Vec<Label>,
    init_seed: u64,
}

impl CnnModel {
    /// Draws all parameters i.i.d. from N(0, 0.1²). Labels are 1..=n_out.
    pub fn init(n_out: usize, seed: u64) -> Result<Self> {
        Self::init_with_labels((1..=n_out as u32).map(Label).collect(), seed)
    }

    pub fn init_with_labels(class_labels: Vec<Label>, seed: u64) -> Result<Self> {
        if class_labels.len() < 2 {
            return Err(Error::InvalidParams(format!("need at least 2 classes, got {}", class_labels.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("constant std is valid");
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| normal.sample(&mut rng)).collect() };
        let conv1 = draw(CONV1_LEN);
        let conv2 = draw(CONV2_LEN);
        let fc = draw(FEATURES * class_labels.len());
        Ok(CnnModel { conv1, conv2, fc, class_labels, init_seed: seed })
    }

    pub(crate) fn from_parts(conv1: Vec<f64>, conv2: Vec<f64>, fc: Vec<f64>, class_labels: Vec<Label>, init_seed: u64) -> Result<Self> {
        if conv1.len() != CONV1_LEN || conv2.len() != CONV2_LEN || fc.len() != FEATURES * class_labels.len() {
            return Err(Error::InvalidParams("parameter tensor sizes do not match the architecture".into()));
        }
        if conv1.iter().chain(&conv2).chain(&fc).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        Ok(CnnModel { conv1, conv2, fc, class_labels, init_seed })
    }

    pub fn n_out(&self) -> usize {
        self.class_labels.len()
    }
    pub fn class_labels(&self) -> &[Label] {
        &self.class_labels
    }
    pub fn init_seed(&self) -> u64 {
        self.init_seed
    }
    pub fn conv1(&self) -> &[f64] {
        &self.conv1
    }
    pub fn conv2(&self) -> &[f64] {
        &self.conv2
    }
    pub fn fc_weights(&self) -> &[f64] {
        &self.fc
    }
    pub fn fc_weights_mut(&mut self) -> &mut [f64] {
        &mut self.fc
    }
    pub fn trainable_parameters(&self) -> usize {
        self.fc.len()
    }

    pub fn class_index(&self, label: Label) -> Result<usize> {
        self.class_labels.iter().position(|&l| l == label).ok_or(Error::UnknownLabel(label.0))
    }

    /// Both conv stages; returns (layer1, layer2) pooled volumes.
    fn conv_stages(&self, image: &SpectrogramImage) -> (Volume, Volume) {
        let input =
            Volume { depth: 1, rows: IMAGE_ROWS, cols: IMAGE_COLS, data: image.pixels().iter().map(|&p| f64::from(p) / 255.0).collect() };
        let layer1 = max_pool(&conv_relu(&input, &self.conv1));
        let layer2 = max_pool(&conv_relu(&layer1, &self.conv2));
        (layer1, layer2)
    }

    /// The flattened 2,040-long output of the frozen conv stages.
    pub fn features(&self, image: &SpectrogramImage) -> Vec<f64> {
        self.conv_stages(image).1.data
    }

    pub fn logits(&self, features: &[f64]) -> Vec<f64> {
        logits(&self.fc, features, self.n_out())
    }

    pub fn scores_from_features(&self, features: &[f64]) -> ClassScores {
        ClassScores::from_logits(&self.logits(features))
    }

    pub fn forward(&self, image: &SpectrogramImage) -> ClassScores {
        self.scores_from_features(&self.features(image))
    }

    pub fn forward_trace(&self, image: &SpectrogramImage) -> ForwardTrace {
        let (layer1, layer2) = self.conv_stages(image);
        let features = layer2.data.clone();
        let scores = self.scores_from_features(&features);
        ForwardTrace { layer1, layer2, features, scores }
    }

    pub fn predict(&self, image: &SpectrogramImage) -> Label {
        predict(&self.forward(image), &self.class_labels)
    }

    /// Softmax cross-entropy loss and its gradient with respect to the
    /// fully-connected weights (N_in × N_out, row-major).
    pub fn fc_gradient(&self, image: &SpectrogramImage, true_label: Label) -> Result<(Vec<f64>, f64)> {
        let class = self.class_index(true_label)?;
        let features = self.features(image);
        let mut grad = vec![0.0; self.fc.len()];
        let loss = accumulate_gradient(&self.fc, &features, class, self.n_out(), 1.0, &mut grad);
        Ok((grad, loss))
    }
}

pub(crate) fn logits(fc: &[f64], features: &[f64], n_out: usize) -> Vec<f64> {
    let mut z = vec![0.0; n_out];
    for (&f, row) in features.iter().zip(fc.chunks_exact(n_out)) {
        // ReLU leaves many features at exactly zero
        if f != 0.0 {
            for (zj, &w) in z.iter_mut().zip(row) {
                *zj += f * w;
            }
        }
    }
    z
}

pub(crate) fn sample_loss(fc: &[f64], features: &[f64], class: usize, n_out: usize) -> f64 {
    let q = ClassScores::from_logits(&logits(fc, features, n_out)).probabilities;
    -q[class].max(PROB_FLOOR).ln()
}

/// Adds `scale·∂loss/∂W` into `grad` and returns the sample loss.
pub(crate) fn accumulate_gradient(fc: &[f64], features: &[f64], class: usize, n_out: usize, scale: f64, grad: &mut [f64]) -> f64 {
    let q = ClassScores::from_logits(&logits(fc, features, n_out)).probabilities;
    let loss = -q[class].max(PROB_FLOOR).ln();
    let mut delta = q;
    delta[class] -= 1.0;
    for d in &mut delta {
        *d *= scale;
    }
    for (&f, row) in features.iter().zip(grad.chunks_exact_mut(n_out)) {
        if f != 0.0 {
            for (g, &d) in row.iter_mut().zip(&delta) {
                *g += f * d;
            }
        }
    }
    loss
}
