use alloc::vec::Vec;

use rand::Rng as _;

use super::tree::{grow, Tree, TreeParams};
use super::{check_trainable, Prediction};
use crate::dataset::LabeledDataset;
use crate::{rng, Error, Matrix, Result};

/// How many features a node examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    /// `ceil(sqrt(d))`.
    Sqrt,
    Count(usize),
    All,
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => (libm::ceil(libm::sqrt(d as f64)) as usize).max(1),
            MaxFeatures::Count(k) => k.clamp(1, d.max(1)),
            MaxFeatures::All => d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub features_per_split: MaxFeatures,
    /// Resample rows with replacement per tree.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 200, max_depth: 10, features_per_split: MaxFeatures::Sqrt, bootstrap: true, seed: 0 }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Parameter("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::Parameter("max_depth must be >= 1".into()));
        }
        if self.features_per_split == MaxFeatures::Count(0) {
            return Err(Error::Parameter("features_per_split must be >= 1".into()));
        }
        Ok(())
    }
}

/// Bagged CART ensemble voting by per-tree leaf majority.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub n_classes: usize,
    pub dim: usize,
    pub trees: Vec<Tree>,
}

/// Grows tree `tree_index` of the forest described by `cfg`. The tree only
/// depends on `(cfg.seed, tree_index)`, so trees can be grown in any order or
/// in parallel and reassembled with [`ForestModel::from_trees`].
pub fn fit_tree(train: &LabeledDataset, cfg: &ForestConfig, tree_index: usize) -> Result<Tree> {
    cfg.validate()?;
    check_trainable(train)?;
    let n = train.len();
    let mut rng = rng::stream(cfg.seed, tree_index as u64);
    let rows: Vec<usize> = if cfg.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
    let params = TreeParams {
        max_depth: cfg.max_depth,
        features_per_split: cfg.features_per_split.resolve(train.dim()),
    };
    Ok(grow(&train.features, &train.labels, train.n_classes(), rows, &params, &mut rng))
}

impl ForestModel {
    pub fn fit(train: &LabeledDataset, cfg: &ForestConfig) -> Result<Self> {
        let trees = (0..cfg.n_trees).map(|t| fit_tree(train, cfg, t)).collect::<Result<Vec<_>>>()?;
        Self::from_trees(train.n_classes(), train.dim(), trees)
    }

    pub fn from_trees(n_classes: usize, dim: usize, trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::State("forest has no trees".into()));
        }
        Ok(Self { n_classes, dim, trees })
    }

    /// Scores are the fraction of trees voting for each class.
    pub fn predict(&self, queries: &Matrix) -> Vec<Prediction> {
        let share = 1.0 / self.trees.len() as f64;
        queries
            .iter_rows()
            .map(|q| {
                let mut votes = alloc::vec![0usize; self.n_classes];
                for t in &self.trees {
                    votes[t.predict(q)] += 1;
                }
                Prediction::from_scores(votes.into_iter().map(|v| v as f64 * share).collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], labels: &[usize]) -> LabeledDataset {
        LabeledDataset::new(Matrix::from_rows(xs.iter().map(|&v| [v])).unwrap(), labels.to_vec()).unwrap()
    }

    #[test]
    fn single_class_forest_is_all_leaves() {
        let train = line(&[0.0, 1.0, 2.0, 3.0], &[2, 2, 2, 2]);
        let m = ForestModel::fit(&train, &ForestConfig { n_trees: 10, ..Default::default() }).unwrap();
        assert!(m.trees.iter().all(|t| t.nodes.len() == 1));
        let q = Matrix::from_rows([[-5.0], [1.5], [99.0]]).unwrap();
        assert!(m.predict(&q).iter().all(|p| p.label == 2));
    }

    #[test]
    fn sqrt_feature_count() {
        assert_eq!(MaxFeatures::Sqrt.resolve(1296), 36);
        assert_eq!(MaxFeatures::Sqrt.resolve(784), 28);
        assert_eq!(MaxFeatures::Sqrt.resolve(10), 4);
        assert_eq!(MaxFeatures::Count(50).resolve(10), 10);
    }

    #[test]
    fn seeded_determinism() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 7) % 13) as f64).collect();
        let ys: Vec<usize> = (0..40).map(|i| (i * 7 % 13) % 3).collect();
        let train = line(&xs, &ys);
        let cfg = ForestConfig { n_trees: 15, max_depth: 4, ..Default::default() };
        assert_eq!(ForestModel::fit(&train, &cfg).unwrap(), ForestModel::fit(&train, &cfg).unwrap());
        let single = fit_tree(&train, &cfg, 7).unwrap();
        assert_eq!(ForestModel::fit(&train, &cfg).unwrap().trees[7], single);
    }

    #[test]
    fn rejects_bad_config_and_empty_data() {
        let train = line(&[0.0], &[0]);
        assert!(ForestModel::fit(&train, &ForestConfig { n_trees: 0, ..Default::default() }).is_err());
        assert!(ForestModel::fit(&train, &ForestConfig { max_depth: 0, ..Default::default() }).is_err());
        let empty = LabeledDataset::new(Matrix::zeros(0, 1), vec![]).unwrap();
        assert!(matches!(ForestModel::fit(&empty, &ForestConfig::default()), Err(Error::State(_))));
    }
}
