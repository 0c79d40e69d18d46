use alloc::vec::Vec;

use super::{accuracy, fit, Gamma, SvmConfig, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::{Error, Result};

/// Outcome of an exhaustive hyperparameter search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub best: TrainConfig,
    pub best_index: usize,
    /// Validation accuracy per grid point, in grid order.
    pub scores: Vec<(TrainConfig, f64)>,
}

/// Fits every config on `train`, scores it on `valid`, keeps the most
/// accurate (first in grid order on ties). `train` and `valid` must be disjoint.
pub fn grid_search(train: &LabeledDataset, valid: &LabeledDataset, grid: &[TrainConfig]) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::Parameter("empty parameter grid".into()));
    }
    let mut scores = Vec::with_capacity(grid.len());
    let mut best_index = 0;
    for (i, cfg) in grid.iter().enumerate() {
        let model = fit(train, cfg)?;
        let acc = accuracy(&model, valid)?;
        if acc > scores.get(best_index).map_or(f64::NEG_INFINITY, |s: &(TrainConfig, f64)| s.1) {
            best_index = i;
        }
        scores.push((*cfg, acc));
    }
    Ok(GridSearch { best: grid[best_index], best_index, scores })
}

/// `C in {1, 10, 100}` x `gamma in {auto, 0.01, 0.001}` around `base`.
pub fn default_svm_grid(base: SvmConfig) -> Vec<TrainConfig> {
    let mut grid = Vec::with_capacity(9);
    for c in [1.0, 10.0, 100.0] {
        for gamma in [Gamma::AutoScale, Gamma::Value(0.01), Gamma::Value(0.001)] {
            grid.push(TrainConfig::Svm(SvmConfig { c, gamma, ..base }));
        }
    }
    grid
}
