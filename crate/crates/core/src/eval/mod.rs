//! Stratified k-fold cross-validation, repeated over seeds, with confusion
//! matrices, macro precision/recall/F and a Student-t confidence interval.

mod report;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

pub use report::{confusion_csv, confusion_table, summary_header, summary_line};

use crate::cnn::{feature_set, train_fc_on_features, CnnModel, Hyperparams};
use crate::dsp::SpectrogramImage;
use crate::error::{Error, Result};
use crate::label::Label;
use crate::seed::{derive_seed, TAG_FOLDS, TAG_INIT, TAG_REPEAT};

/// A labeled image set.
pub type Dataset = [(SpectrogramImage, Label)];

/// Sorted distinct labels of a dataset.
pub fn class_labels(dataset: &Dataset) -> Vec<Label> {
    let mut labels: Vec<Label> = dataset.iter().map(|(_, l)| *l).collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Fold index of every sample; each class is spread evenly over the folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn held_out(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }
}

/// Shuffles each class with its own seeded stream and deals its samples to
/// folds round-robin.
pub fn make_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 {
        return Err(Error::InvalidEvaluation("k must be at least 1".into()));
    }
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let mut assignments = vec![0; labels.len()];
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if !members.len().is_multiple_of(k) {
            return Err(Error::IndivisibleClassCount { label: class.0, count: members.len(), k });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[u64::from(class.0)]));
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignments[i] = pos % k;
        }
    }
    Ok(FoldPlan { k, assignments, seed })
}

/// Counts with rows = actual class, columns = estimated class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<Label>,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<Label>) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    fn index(&self, label: Label) -> Result<usize> {
        self.labels.iter().position(|&l| l == label).ok_or(Error::UnknownLabel(label.0))
    }

    pub fn record(&mut self, actual: Label, estimated: Label) -> Result<()> {
        let (a, e) = (self.index(actual)?, self.index(estimated)?);
        let n = self.n();
        self.counts[a * n + e] += 1;
        Ok(())
    }

    pub fn get(&self, actual: usize, estimated: usize) -> u64 {
        self.counts[actual * self.n() + estimated]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.n()).map(|i| self.get(i, i)).sum()
    }

    pub fn row_total(&self, actual: usize) -> u64 {
        (0..self.n()).map(|e| self.get(actual, e)).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::InvalidEvaluation("confusion matrices over different classes".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }

    /// Row-normalized percentages (empty rows stay zero).
    pub fn row_percentages(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        for a in 0..n {
            let total = self.row_total(a);
            if total > 0 {
                for e in 0..n {
                    out[a * n + e] = 100.0 * self.get(a, e) as f64 / total as f64;
                }
            }
        }
        out
    }

    pub fn accuracy(&self) -> f64 {
        100.0 * self.correct() as f64 / self.total() as f64
    }
}

/// Percentages: accuracy, macro precision, macro recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl Metrics {
    /// From a count matrix. Classes nobody was assigned to count as precision 0.
    pub fn from_confusion(confusion: &ConfusionMatrix) -> Result<Metrics> {
        let table: Vec<f64> = confusion.counts.iter().map(|&c| c as f64).collect();
        let rows: Vec<f64> = (0..confusion.n()).map(|a| confusion.row_total(a) as f64).collect();
        Self::from_table(&table, &rows)
    }

    /// From a row-normalized percentage table (rows nominally summing to 100),
    /// such as a published confusion matrix rounded to one decimal.
    pub fn from_row_percentages(table: &[f64]) -> Result<Metrics> {
        let n = (table.len() as f64).sqrt().round() as usize;
        if n * n != table.len() {
            return Err(Error::InvalidEvaluation(format!("{} cells is not a square matrix", table.len())));
        }
        Self::from_table(table, &vec![100.0; n])
    }

    fn from_table(table: &[f64], row_totals: &[f64]) -> Result<Metrics> {
        let n = row_totals.len();
        let total: f64 = row_totals.iter().sum();
        if n == 0 || total <= 0.0 {
            return Err(Error::EmptyMatrix);
        }
        let diag = |i: usize| table[i * n + i];
        let trace: f64 = (0..n).map(diag).sum();
        let precision = (0..n)
            .map(|e| {
                let col: f64 = (0..n).map(|a| table[a * n + e]).sum();
                if col > 0.0 {
                    diag(e) / col
                } else {
                    0.0
                }
            })
            .sum::<f64>()
            / n as f64;
        let recall = (0..n).map(|a| if row_totals[a] > 0.0 { diag(a) / row_totals[a] } else { 0.0 }).sum::<f64>() / n as f64;
        let (precision, recall) = (100.0 * precision, 100.0 * recall);
        Ok(Metrics { accuracy: 100.0 * trace / total, precision, recall, f: f_measure(precision, recall) })
    }
}

/// Harmonic mean of two percentages.
pub fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Two-tailed Student-t critical value at `confidence` for `df` degrees of freedom.
pub fn t_critical(df: usize, confidence: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

/// `mean ± t·std/√n`.
pub fn confidence_interval(mean: f64, std: f64, n: usize, t: f64) -> (f64, f64) {
    let half = t * std / (n as f64).sqrt();
    (mean - half, mean + half)
}

/// Accuracy statistics over repeated cross-validations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Unbiased (n − 1) standard deviation; NaN for a single trial.
    pub std: f64,
    /// 95% interval; `None` for a single trial.
    pub ci: Option<(f64, f64)>,
}

impl TrialStats {
    pub fn from_accuracies(accuracies: Vec<f64>) -> Result<TrialStats> {
        let n = accuracies.len();
        if n == 0 {
            return Err(Error::InvalidEvaluation("no trials".into()));
        }
        let mean = accuracies.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Ok(TrialStats { accuracies, mean, std: f64::NAN, ci: None });
        }
        let var = accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        let ci = Some(confidence_interval(mean, std, n, t_critical(n - 1, 0.95)));
        Ok(TrialStats { accuracies, mean, std, ci })
    }
}

/// Result of one held-out fold.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

fn labeled(dataset: &Dataset) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::InvalidEvaluation("empty dataset".into()));
    }
    Ok(())
}

/// Trains a fresh model on every fold but `held_out_fold` and tests on it.
/// The model's init seed is derived from `hp.seed` and the fold index.
pub fn run_trial(dataset: &Dataset, plan: &FoldPlan, held_out_fold: usize, hp: &Hyperparams) -> Result<TrialOutcome> {
    labeled(dataset)?;
    if held_out_fold >= plan.k || plan.assignments.len() != dataset.len() {
        return Err(Error::InvalidEvaluation(format!(
            "fold {held_out_fold} of a {}-fold plan over {} samples (dataset has {})",
            plan.k,
            plan.assignments.len(),
            dataset.len()
        )));
    }
    let labels = class_labels(dataset);
    let model = CnnModel::init_with_labels(labels.clone(), derive_seed(hp.seed, &[TAG_INIT, held_out_fold as u64]))?;
    let (train, test): (Vec<_>, Vec<_>) = dataset.iter().zip(&plan.assignments).partition(|(_, &fold)| fold != held_out_fold);
    let train: Vec<(SpectrogramImage, Label)> = train.into_iter().map(|(s, _)| s.clone()).collect();
    let features = feature_set(&model, &train)?;
    let (trained, _) = train_fc_on_features(&model, &features, hp)?;

    let mut confusion = ConfusionMatrix::new(labels);
    for ((image, label), _) in test {
        confusion.record(*label, trained.predict(image))?;
    }
    Ok(TrialOutcome { accuracy: confusion.accuracy(), confusion })
}

/// Pooled outcome of one k-fold cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub plan: FoldPlan,
    pub fold_accuracies: Vec<f64>,
    pub confusion: ConfusionMatrix,
}

impl CrossValidation {
    pub fn accuracy(&self) -> f64 {
        self.confusion.accuracy()
    }
}

/// Runs every fold of a stratified k-fold split seeded by `seed`
/// (which also replaces `hp.seed` for the per-fold training runs).
pub fn cross_validate(dataset: &Dataset, k: usize, hp: &Hyperparams, seed: u64) -> Result<CrossValidation> {
    labeled(dataset)?;
    let labels: Vec<Label> = dataset.iter().map(|(_, l)| *l).collect();
    let plan = make_folds(&labels, k, derive_seed(seed, &[TAG_FOLDS]))?;
    let hp = Hyperparams { seed, ..*hp };
    let outcomes: Vec<TrialOutcome> = (0..k)
        .into_par_iter()
        .map(|fold| run_trial(dataset, &plan, fold, &hp).map_err(|e| Error::InFold { seed, fold, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    let mut confusion = ConfusionMatrix::new(class_labels(dataset));
    for o in &outcomes {
        confusion.merge(&o.confusion)?;
    }
    Ok(CrossValidation { plan, fold_accuracies: outcomes.iter().map(|o| o.accuracy).collect(), confusion })
}

/// Seeds used by [`repeated_trials`]: derived from `base` and the repetition index.
pub fn repetition_seeds(base: u64, n_seeds: usize) -> Vec<u64> {
    (0..n_seeds).map(|i| derive_seed(base, &[TAG_REPEAT, i as u64])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedTrials {
    pub stats: TrialStats,
    /// Confusion counts pooled over every seed.
    pub confusion: ConfusionMatrix,
}

/// Cross-validates once per seed in `seeds`.
pub fn repeated_trials_with_seeds(dataset: &Dataset, k: usize, hp: &Hyperparams, seeds: &[u64]) -> Result<RepeatedTrials> {
    let mut confusion = ConfusionMatrix::new(class_labels(dataset));
    let mut accuracies = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cv = cross_validate(dataset, k, hp, seed)?;
        accuracies.push(cv.accuracy());
        confusion.merge(&cv.confusion)?;
    }
    Ok(RepeatedTrials { stats: TrialStats::from_accuracies(accuracies)?, confusion })
}

/// Cross-validates with `n_seeds` seeds derived from `hp.seed`.
pub fn repeated_trials(dataset: &Dataset, k: usize, hp: &Hyperparams, n_seeds: usize) -> Result<RepeatedTrials> {
    if n_seeds < 2 {
        return Err(Error::InvalidEvaluation(format!("need at least 2 seeds, got {n_seeds}")));
    }
    repeated_trials_with_seeds(dataset, k, hp, &repetition_seeds(hp.seed, n_seeds))
}
