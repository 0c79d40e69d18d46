//! One-vs-all soft-margin SVM with an RBF kernel, trained by SMO.
//!
//! The binary solver optimizes the dual
//! `min 1/2 a'Qa - e'a  s.t.  y'a = 0, 0 <= a <= C` with `Q_ij = y_i y_j K_ij`,
//! picking at each step the maximal-violating pair
//! `i = argmax_{I_up} -y G`, `j = argmin_{I_low} -y G` and stopping once the
//! gap `m - M` falls below the tolerance.

use alloc::vec::Vec;

use super::{check_trainable, Prediction};
use crate::dataset::LabeledDataset;
use crate::{Error, Matrix, Result};

/// Coefficients at or below this are not support vectors.
pub const SUPPORT_EPS: f64 = 1e-8;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (d * Var(X))` over all entries of the training matrix.
    AutoScale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: Gamma,
    /// KKT tolerance on the maximal-violating-pair gap.
    pub tol: f64,
    /// Upper bound on SMO pair updates per binary problem.
    pub max_passes: usize,
    /// Kernel row cache budget in MiB, shared by all one-vs-all problems.
    pub cache_mb: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 10.0, gamma: Gamma::AutoScale, tol: 1e-3, max_passes: 10_000_000, cache_mb: 1024 }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::Parameter(alloc::format!("C must be > 0, got {}", self.c)));
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Parameter(alloc::format!("gamma must be > 0, got {g}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::Parameter(alloc::format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::Parameter("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// `1 / (d * Var(X))`, falling back to 1 when the matrix is constant.
pub fn auto_gamma(x: &Matrix) -> f64 {
    let n = x.as_slice().len();
    if n == 0 {
        return 1.0;
    }
    let mean = x.as_slice().iter().sum::<f64>() / n as f64;
    let var = x.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    libm::exp(-gamma * d2)
}

/// LRU cache of full kernel rows `K(i, .)` over a fixed training matrix.
pub struct KernelCache<'a> {
    x: &'a Matrix,
    gamma: f64,
    sq_norms: Vec<f64>,
    rows: Vec<Option<Vec<f64>>>,
    stamp: Vec<u64>,
    clock: u64,
    cached: usize,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    /// `capacity_rows` is raised to at least 2.
    pub fn new(x: &'a Matrix, gamma: f64, capacity_rows: usize) -> Self {
        let n = x.rows();
        Self {
            x,
            gamma,
            sq_norms: x.iter_rows().map(|r| dot(r, r)).collect(),
            rows: (0..n).map(|_| None).collect(),
            stamp: alloc::vec![0; n],
            clock: 0,
            cached: 0,
            capacity: capacity_rows.max(2),
        }
    }

    pub fn with_budget_mb(x: &'a Matrix, gamma: f64, mb: usize) -> Self {
        let per_row = (x.rows() * core::mem::size_of::<f64>()).max(1);
        Self::new(x, gamma, mb.saturating_mul(1 << 20) / per_row)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn compute_row(&self, i: usize) -> Vec<f64> {
        let xi = self.x.row(i);
        let ni = self.sq_norms[i];
        (0..self.x.rows())
            .map(|k| {
                if let Some(row) = &self.rows[k] {
                    return row[i];
                }
                let d2 = (ni + self.sq_norms[k] - 2.0 * dot(xi, self.x.row(k))).max(0.0);
                libm::exp(-self.gamma * d2)
            })
            .collect()
    }

    fn ensure(&mut self, i: usize, pinned: usize) {
        self.clock += 1;
        self.stamp[i] = self.clock;
        if self.rows[i].is_some() {
            return;
        }
        if self.cached >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&k| k != pinned && self.rows[k].is_some())
                .min_by_key(|&k| self.stamp[k]);
            if let Some(v) = victim {
                self.rows[v] = None;
                self.cached -= 1;
            }
        }
        let row = self.compute_row(i);
        self.rows[i] = Some(row);
        self.cached += 1;
    }

    /// Rows `i` and `j`, computing them on demand.
    pub fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.ensure(i, j);
        self.ensure(j, i);
        (self.rows[i].as_deref().unwrap(), self.rows[j].as_deref().unwrap())
    }
}

/// Solution of one binary dual problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Intercept `b` in `f(x) = sum a_i y_i K(x_i, x) + b`.
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO on labels `y` in `{-1, +1}`.
pub fn solve_binary(kernel: &mut KernelCache<'_>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> BinarySolution {
    let n = y.len();
    debug_assert_eq!(n, kernel.len());
    let mut alpha = alloc::vec![0.0; n];
    let mut grad = alloc::vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let (mut i, mut gmax) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut gmin) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (ki, kj) = kernel.pair(i, j);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (ai_old, aj_old);
        let kij = ki[j];
        if y[i] != y[j] {
            let mut quad = ki[i] + kj[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = ki[i] + kj[j] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - ai_old, aj - aj_old);
        // G_t += Q_ti da_i + Q_tj da_j with Q_ts = y_t y_s K_ts
        let (si, sj) = (y[i] * di, y[j] * dj);
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * si + kj[t] * sj);
        }
    }

    BinarySolution { bias: intercept(&alpha, &grad, y, c), alpha, iterations, converged }
}

/// `b = -r` where `r` averages `y G` over free coefficients, or the midpoint
/// of the feasible interval when none are free.
fn intercept(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let r = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    -r
}

/// One-vs-all ensemble. Support vectors are pooled across the binary models;
/// `dual_coef[c][s]` is `a_s y_s` of pooled vector `s` in problem `c`
/// (zero where `s` is not a support vector of that problem).
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub n_classes: usize,
    pub dim: usize,
    pub gamma: f64,
    pub c: f64,
    pub support: Matrix,
    pub dual_coef: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Whether each binary problem met the tolerance within `max_passes`.
    pub converged: Vec<bool>,
}

impl SvmModel {
    pub fn fit(train: &LabeledDataset, cfg: &SvmConfig) -> Result<Self> {
        cfg.validate()?;
        check_trainable(train)?;
        let n_classes = train.n_classes();
        let mut present = alloc::vec![false; n_classes];
        for &l in &train.labels {
            present[l] = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::State("SVM needs at least two classes".into()));
        }
        let x = &train.features;
        let gamma = match cfg.gamma {
            Gamma::AutoScale => auto_gamma(x),
            Gamma::Value(g) => g,
        };
        let mut cache = KernelCache::with_budget_mb(x, gamma, cfg.cache_mb);

        let mut solutions = Vec::with_capacity(n_classes);
        for class in 0..n_classes {
            let y: Vec<f64> = train.labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            let sol = solve_binary(&mut cache, &y, cfg.c, cfg.tol, cfg.max_passes);
            solutions.push((y, sol));
        }

        let pooled: Vec<usize> = (0..x.rows())
            .filter(|&i| solutions.iter().any(|(_, s)| s.alpha[i] > SUPPORT_EPS))
            .collect();
        let dual_coef = solutions
            .iter()
            .map(|(y, s)| {
                pooled
                    .iter()
                    .map(|&i| if s.alpha[i] > SUPPORT_EPS { s.alpha[i] * y[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self {
            n_classes,
            dim: x.cols(),
            gamma,
            c: cfg.c,
            support: x.select_rows(&pooled),
            dual_coef,
            bias: solutions.iter().map(|(_, s)| s.bias).collect(),
            converged: solutions.iter().map(|(_, s)| s.converged).collect(),
        })
    }

    /// Per-class decision values `f_c(x)`.
    pub fn decision(&self, query: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self.support.iter_rows().map(|s| rbf(s, query, self.gamma)).collect();
        self.dual_coef.iter().zip(&self.bias).map(|(coef, b)| dot(coef, &k) + b).collect()
    }

    pub fn predict(&self, queries: &Matrix) -> Vec<Prediction> {
        queries.iter_rows().map(|q| Prediction::from_scores(self.decision(q))).collect()
    }
}
