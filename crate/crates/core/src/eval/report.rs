//! Text renderings of evaluation results.

use std::fmt::Write;

use super::{ConfusionMatrix, Metrics, TrialStats};

/// Row-normalized percentage table, actual classes down, estimates across.
pub fn confusion_table(confusion: &ConfusionMatrix) -> String {
    let n = confusion.n();
    let pct = confusion.row_percentages();
    let mut out = String::new();
    let _ = writeln!(out, "Confusion matrix (%), rows = actual, columns = estimated");
    let _ = write!(out, "{:>8}", "");
    for l in &confusion.labels {
        let _ = write!(out, "{:>7}", l.letter());
    }
    out.push('\n');
    for a in 0..n {
        let _ = write!(out, "{:>8}", confusion.labels[a].letter());
        for e in 0..n {
            let _ = write!(out, "{:>7.1}", pct[a * n + e]);
        }
        out.push('\n');
    }
    out
}

/// `actual,estimated,count` rows for every cell.
pub fn confusion_csv(confusion: &ConfusionMatrix) -> String {
    let mut out = String::from("actual,estimated,count\n");
    for (a, la) in confusion.labels.iter().enumerate() {
        for (e, le) in confusion.labels.iter().enumerate() {
            let _ = writeln!(out, "{la},{le},{}", confusion.get(a, e));
        }
    }
    out
}

pub fn summary_header() -> &'static str {
    "mean,std,ci_lo,ci_hi,precision,recall,f"
}

/// `mean,std,ci_lo,ci_hi,precision,recall,f`; a single trial prints `nan`
/// for the std and leaves the interval fields empty.
pub fn summary_line(stats: &TrialStats, metrics: &Metrics) -> String {
    let (lo, hi) = match stats.ci {
        Some((lo, hi)) => (format!("{lo:.4}"), format!("{hi:.4}")),
        None => (String::new(), String::new()),
    };
    let std = if stats.std.is_nan() { "nan".to_string() } else { format!("{:.4}", stats.std) };
    format!("{:.4},{std},{lo},{hi},{:.4},{:.4},{:.4}", stats.mean, metrics.precision, metrics.recall, metrics.f)
}
