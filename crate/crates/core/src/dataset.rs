//! Labelled feature matrices and seeded train/test partitioning.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::features::FeatureMethod;
use crate::{rng, Error, Matrix, Result};

/// Where a dataset came from: a display name and a content digest.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Source {
    pub name: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub source: Source,
    pub feature_method: FeatureMethod,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Dimension(alloc::format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels, source: Source::default(), feature_method: FeatureMethod::Raw })
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_method(mut self, method: FeatureMethod) -> Self {
        self.feature_method = method;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// `1 + max label`, or 0 when empty.
    pub fn n_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            source: self.source.clone(),
            feature_method: self.feature_method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 42, stratified: true }
    }
}

#[inline]
fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

/// Train and test row indices, each sorted ascending.
///
/// Stratified splits take `round_half_up(fraction * n_c)` rows of every class
/// for training, kept within `1..n_c` so both sides see every class.
pub fn split_indices(labels: &[usize], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Parameter(alloc::format!(
            "train fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = rng::stream(spec.seed, 0);
    let mut train = Vec::new();
    let mut test = Vec::new();
    if spec.stratified {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_classes];
        for (i, &l) in labels.iter().enumerate() {
            by_class[l].push(i);
        }
        for (class, mut members) in by_class.into_iter().enumerate() {
            if members.is_empty() {
                continue;
            }
            if members.len() < 2 {
                return Err(Error::Split { class, count: members.len() });
            }
            members.shuffle(&mut rng);
            let n = members.len();
            let k = round_half_up(spec.train_fraction * n as f64).clamp(1, n - 1);
            train.extend_from_slice(&members[..k]);
            test.extend_from_slice(&members[k..]);
        }
    } else {
        let mut all: Vec<usize> = (0..labels.len()).collect();
        all.shuffle(&mut rng);
        let k = round_half_up(spec.train_fraction * labels.len() as f64).min(labels.len());
        train.extend_from_slice(&all[..k]);
        test.extend_from_slice(&all[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = split_indices(&ds.labels, spec)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}
