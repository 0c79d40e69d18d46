use alloc::vec::Vec;

use super::{check_trainable, Prediction};
use crate::dataset::LabeledDataset;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    /// Minkowski exponent; 2 is Euclidean.
    pub minkowski_p: f64,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self { k: 5, minkowski_p: 2.0 }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Parameter("k must be >= 1".into()));
        }
        if !(self.minkowski_p >= 1.0) || !self.minkowski_p.is_finite() {
            return Err(Error::Parameter(alloc::format!(
                "Minkowski p must be >= 1, got {}",
                self.minkowski_p
            )));
        }
        Ok(())
    }
}

/// Exact brute-force nearest neighbours over the stored training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub minkowski_p: f64,
    pub n_classes: usize,
    pub train: Matrix,
    pub labels: Vec<usize>,
}

/// `sum |a_i - b_i|^p`; the p-th root is skipped since it preserves order.
#[inline]
fn minkowski_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    } else if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| libm::pow(libm::fabs(x - y), p)).sum()
    }
}

impl KnnModel {
    pub fn fit(train: &LabeledDataset, cfg: &KnnConfig) -> Result<Self> {
        cfg.validate()?;
        check_trainable(train)?;
        if cfg.k > train.len() {
            return Err(Error::Parameter(alloc::format!(
                "k = {} exceeds {} training rows",
                cfg.k,
                train.len()
            )));
        }
        Ok(Self {
            k: cfg.k,
            minkowski_p: cfg.minkowski_p,
            n_classes: train.n_classes(),
            train: train.features.clone(),
            labels: train.labels.clone(),
        })
    }

    /// Indices of the `k` nearest training rows, ordered by (distance, index).
    pub fn neighbors(&self, query: &[f64]) -> Vec<usize> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.k + 1);
        for (i, row) in self.train.iter_rows().enumerate() {
            let d = minkowski_pow(row, query, self.minkowski_p);
            if best.len() == self.k && d >= best[self.k - 1].0 {
                continue;
            }
            // after any equal distances, which all have lower indices
            let pos = best.partition_point(|&(bd, _)| bd <= d);
            best.insert(pos, (d, i));
            best.truncate(self.k);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    fn predict_one(&self, query: &[f64]) -> Prediction {
        let nn = self.neighbors(query);
        let k = nn.len() as f64;
        let mut scores = alloc::vec![0.0; self.n_classes];
        let mut first_rank = alloc::vec![None; self.n_classes];
        for (rank, &i) in nn.iter().enumerate() {
            let c = self.labels[i];
            scores[c] += 1.0;
            first_rank[c].get_or_insert(rank);
        }
        // Vote ties go to the class whose nearest member is closest: a bonus in
        // (0, 1) that orders present classes by first appearance.
        for (s, r) in scores.iter_mut().zip(&first_rank) {
            if let Some(r) = r {
                *s += (k - *r as f64) / (k + 1.0);
            }
        }
        Prediction::from_scores(scores)
    }

    pub fn predict(&self, queries: &Matrix) -> Vec<Prediction> {
        queries.iter_rows().map(|q| self.predict_one(q)).collect()
    }
}

/// Fit-and-predict in one call.
pub fn knn_fit_predict(train: &LabeledDataset, queries: &Matrix, cfg: &KnnConfig) -> Result<Vec<Prediction>> {
    let model = KnnModel::fit(train, cfg)?;
    if queries.rows() > 0 && queries.cols() != model.train.cols() {
        return Err(Error::Shape { expected: model.train.cols(), got: queries.cols() });
    }
    Ok(model.predict(queries))
}
