//! Confusion matrices and the accuracy / precision / recall / F1 family.
//!
//! A metric whose denominator is zero is reported as 0.

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(n_classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n_classes * n_classes {
            return Err(Error::Input(alloc::format!(
                "{} counts for {n_classes} classes",
                counts.len()
            )));
        }
        Ok(Self { n_classes, counts })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    #[inline]
    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n_classes + predicted]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    /// Relabels classes: old class `c` becomes `perm[c]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n_classes;
        let mut counts = alloc::vec![0; n * n];
        for t in 0..n {
            for p in 0..n {
                counts[perm[t] * n + perm[p]] = self.get(t, p);
            }
        }
        Self { n_classes: n, counts }
    }
}

/// Tallies `(truth, prediction)` pairs.
pub fn confusion(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(alloc::format!(
            "{} labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut counts = alloc::vec![0u64; n_classes * n_classes];
    for (i, (&t, &p)) in y_true.iter().zip(y_pred).enumerate() {
        if t >= n_classes || p >= n_classes {
            return Err(Error::Input(alloc::format!(
                "sample {i}: label pair ({t}, {p}) outside 0..{n_classes}"
            )));
        }
        counts[t * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, counts })
}

/// Where a report came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReportMeta {
    pub dataset: String,
    pub feature: String,
    pub classifier: String,
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub meta: ReportMeta,
}

#[inline]
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Accuracy plus per-class and macro-averaged precision, recall and F1.
pub fn report(cm: &ConfusionMatrix) -> Result<EvaluationReport> {
    let total = cm.total();
    if cm.n_classes == 0 || total == 0 {
        return Err(Error::Input("cannot report on an empty confusion matrix".into()));
    }
    let n = cm.n_classes;
    let mut precision = Vec::with_capacity(n);
    let mut recall = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    for c in 0..n {
        let tp = cm.get(c, c);
        let predicted: u64 = (0..n).map(|t| cm.get(t, c)).sum();
        let actual: u64 = (0..n).map(|p| cm.get(c, p)).sum();
        let p = ratio(tp, predicted);
        let r = ratio(tp, actual);
        precision.push(p);
        recall.push(r);
        f1.push(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) });
    }
    Ok(EvaluationReport {
        accuracy: ratio(cm.trace(), total),
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        precision,
        recall,
        f1,
        confusion: cm.clone(),
        meta: ReportMeta::default(),
    })
}
