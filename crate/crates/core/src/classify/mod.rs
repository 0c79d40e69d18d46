//! KNN, one-vs-all RBF SVM, random forest and softmax GBDT behind a single
//! [`fit`] / [`TrainedModel::predict`] contract.
//!
//! Every ambiguous choice (equal votes, equal gains, equal distances, argmax
//! ties) resolves to the lowest index, so all four learners are
//! deterministic for a given seed.

pub mod forest;
pub mod gbdt;
mod grid;
pub mod knn;
pub mod svm;
pub mod tree;

use alloc::vec::Vec;
use core::fmt;

use crate::dataset::LabeledDataset;
use crate::{Error, Matrix, Result};

pub use forest::{ForestConfig, ForestModel, MaxFeatures};
pub use gbdt::{GbdtConfig, GbdtModel};
pub use grid::{default_svm_grid, grid_search, GridSearch};
pub use knn::{knn_fit_predict, KnnConfig, KnnModel};
pub use svm::{Gamma, SvmConfig, SvmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassifierKind {
    Knn,
    Svm,
    Rf,
    Gbdt,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "KNN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Gbdt => "GBDT",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "knn" => Ok(ClassifierKind::Knn),
            "svm" => Ok(ClassifierKind::Svm),
            "rf" => Ok(ClassifierKind::Rf),
            "gbdt" => Ok(ClassifierKind::Gbdt),
            other => Err(Error::Parameter(alloc::format!("unknown classifier `{other}`"))),
        }
    }
}

/// Hyperparameters for one classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainConfig {
    Knn(KnnConfig),
    Svm(SvmConfig),
    Rf(ForestConfig),
    Gbdt(GbdtConfig),
}

impl TrainConfig {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainConfig::Knn(_) => ClassifierKind::Knn,
            TrainConfig::Svm(_) => ClassifierKind::Svm,
            TrainConfig::Rf(_) => ClassifierKind::Rf,
            TrainConfig::Gbdt(_) => ClassifierKind::Gbdt,
        }
    }

    pub fn defaults(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Knn => TrainConfig::Knn(KnnConfig::default()),
            ClassifierKind::Svm => TrainConfig::Svm(SvmConfig::default()),
            ClassifierKind::Rf => TrainConfig::Rf(ForestConfig::default()),
            ClassifierKind::Gbdt => TrainConfig::Gbdt(GbdtConfig::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TrainConfig::Knn(c) => c.validate(),
            TrainConfig::Svm(c) => c.validate(),
            TrainConfig::Rf(c) => c.validate(),
            TrainConfig::Gbdt(c) => c.validate(),
        }
    }
}

/// Predicted label plus the per-class scores it was taken from.
///
/// Score semantics per learner: KNN, neighbour votes plus a sub-unit bonus
/// ranking classes by their nearest member; SVM, one-vs-all decision values;
/// RF, fraction of tree votes; GBDT, raw additive margins.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub scores: Vec<f64>,
}

impl Prediction {
    /// Label = first index of the maximal score.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        Self { label: argmax(&scores), scores }
    }
}

/// First index of the maximum (lowest index wins ties).
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// A fitted classifier. Immutable after [`fit`]; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
    Rf(ForestModel),
    Gbdt(GbdtModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::Svm(_) => ClassifierKind::Svm,
            TrainedModel::Rf(_) => ClassifierKind::Rf,
            TrainedModel::Gbdt(_) => ClassifierKind::Gbdt,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.n_classes,
            TrainedModel::Svm(m) => m.n_classes,
            TrainedModel::Rf(m) => m.n_classes,
            TrainedModel::Gbdt(m) => m.n_classes,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.train.cols(),
            TrainedModel::Svm(m) => m.dim,
            TrainedModel::Rf(m) => m.dim,
            TrainedModel::Gbdt(m) => m.dim,
        }
    }

    pub fn predict(&self, queries: &Matrix) -> Result<Vec<Prediction>> {
        if queries.rows() > 0 && queries.cols() != self.dim() {
            return Err(Error::Shape { expected: self.dim(), got: queries.cols() });
        }
        Ok(match self {
            TrainedModel::Knn(m) => m.predict(queries),
            TrainedModel::Svm(m) => m.predict(queries),
            TrainedModel::Rf(m) => m.predict(queries),
            TrainedModel::Gbdt(m) => m.predict(queries),
        })
    }

    pub fn predict_labels(&self, queries: &Matrix) -> Result<Vec<usize>> {
        Ok(self.predict(queries)?.into_iter().map(|p| p.label).collect())
    }
}

pub(crate) fn check_trainable(train: &LabeledDataset) -> Result<()> {
    if train.is_empty() {
        return Err(Error::State("training set is empty".into()));
    }
    if train.features.rows() != train.labels.len() {
        return Err(Error::Dimension("feature rows and labels differ in length".into()));
    }
    Ok(())
}

/// Fits the learner selected by `cfg`.
pub fn fit(train: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    Ok(match cfg {
        TrainConfig::Knn(c) => TrainedModel::Knn(KnnModel::fit(train, c)?),
        TrainConfig::Svm(c) => TrainedModel::Svm(SvmModel::fit(train, c)?),
        TrainConfig::Rf(c) => TrainedModel::Rf(ForestModel::fit(train, c)?),
        TrainConfig::Gbdt(c) => TrainedModel::Gbdt(GbdtModel::fit(train, c)?),
    })
}

/// Share of rows whose predicted label matches.
pub fn accuracy(model: &TrainedModel, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::State("cannot score an empty dataset".into()));
    }
    let pred = model.predict_labels(&data.features)?;
    let hits = pred.iter().zip(&data.labels).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
        assert_eq!(argmax(&[-1.0]), 0);
    }

    #[test]
    fn kind_names_parse() {
        for k in [ClassifierKind::Knn, ClassifierKind::Svm, ClassifierKind::Rf, ClassifierKind::Gbdt] {
            assert_eq!(k.name().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(TrainConfig::defaults(k).kind(), k);
        }
    }
}
