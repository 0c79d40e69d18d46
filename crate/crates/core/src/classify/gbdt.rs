//! Multiclass gradient boosting with softmax cross-entropy.
//!
//! Each round fits one regression tree per class to the first and second
//! derivatives `g = p - 1{y = c}`, `h = p (1 - p)`. Trees are grown level by
//! level with an exact scan over presorted feature columns; a split is kept
//! when its gain `GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)` is positive and the
//! leaf weight is `-G / (H + l)`.

use alloc::vec::Vec;

use rand::seq::index;

use super::{check_trainable, Prediction};
use crate::dataset::LabeledDataset;
use crate::{rng, Error, Matrix, Result};

const PRIOR_FLOOR: f64 = 1e-6;
const NO_NODE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbdtConfig {
    pub n_rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) per round.
    pub row_subsample: f64,
    /// Fraction of columns drawn per tree.
    pub col_subsample: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            max_depth: 5,
            learning_rate: 0.3,
            row_subsample: 0.8,
            col_subsample: 0.8,
            lambda: 1.0,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |v: f64| v > 0.0 && v <= 1.0;
        if self.n_rounds == 0 || self.max_depth == 0 {
            return Err(Error::Parameter("n_rounds and max_depth must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Parameter(alloc::format!("learning_rate must be > 0, got {}", self.learning_rate)));
        }
        if !frac(self.row_subsample) || !frac(self.col_subsample) {
            return Err(Error::Parameter("subsample fractions must lie in (0, 1]".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Parameter(alloc::format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                RegNode::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                RegNode::Leaf { value } => return *value,
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[RegNode], at: usize) -> usize {
            match &nodes[at] {
                RegNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                RegNode::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Feature columns sorted ascending by value (row index breaks ties).
pub struct Presorted {
    values: Vec<Vec<f64>>,
    rows: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut values = Vec::with_capacity(d);
        let mut rows = Vec::with_capacity(d);
        for f in 0..d {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| x.get(a as usize, f).total_cmp(&x.get(b as usize, f)).then(a.cmp(&b)));
            values.push(order.iter().map(|&r| x.get(r as usize, f)).collect());
            rows.push(order);
        }
        Self { values, rows }
    }
}

#[inline]
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Fits one regression tree on the rows flagged in `in_sample` using only
/// `features` (ascending). Ties in gain keep the earliest candidate.
#[allow(clippy::too_many_arguments)]
pub fn grow_regression_tree(
    x: &Matrix,
    sorted: &Presorted,
    grad: &[f64],
    hess: &[f64],
    in_sample: &[bool],
    features: &[usize],
    max_depth: usize,
    lambda: f64,
) -> RegTree {
    let n = x.rows();
    let score = |g: f64, h: f64| g * g / (h + lambda);

    let mut node_of: Vec<u32> = (0..n).map(|i| if in_sample[i] { 0 } else { NO_NODE }).collect();
    let mut nodes = alloc::vec![RegNode::Leaf { value: 0.0 }];
    // active nodes at the current level: (tree slot, G, H)
    let mut active: Vec<(usize, f64, f64)> = {
        let (mut g, mut h) = (0.0, 0.0);
        for i in (0..n).filter(|&i| in_sample[i]) {
            g += grad[i];
            h += hess[i];
        }
        alloc::vec![(0, g, h)]
    };

    for depth in 0..=max_depth {
        if active.is_empty() {
            break;
        }
        let mut best: Vec<Option<Candidate>> = alloc::vec![None; active.len()];
        if depth < max_depth {
            // running left sums per active node: (GL, HL, last value seen)
            let mut state: Vec<(f64, f64, Option<f64>)> = alloc::vec![(0.0, 0.0, None); active.len()];
            for &f in features {
                state.iter_mut().for_each(|s| *s = (0.0, 0.0, None));
                for (&v, &row) in sorted.values[f].iter().zip(&sorted.rows[f]) {
                    let a = node_of[row as usize];
                    if a == NO_NODE {
                        continue;
                    }
                    let a = a as usize;
                    let (gl, hl, last) = state[a];
                    if let Some(prev) = last {
                        if v > prev {
                            let (_, g, h) = active[a];
                            let gain = score(gl, hl) + score(g - gl, h - hl) - score(g, h);
                            let current = best[a].map_or(0.0, |c| c.gain);
                            if gain > current {
                                best[a] = Some(Candidate { gain, feature: f, threshold: midpoint(prev, v) });
                            }
                        }
                    }
                    state[a] = (gl + grad[row as usize], hl + hess[row as usize], Some(v));
                }
            }
        }

        let mut next: Vec<(usize, f64, f64)> = Vec::new();
        // child ids in `next` for each split node
        let mut children: Vec<Option<(u32, u32, usize, f64)>> = alloc::vec![None; active.len()];
        for (a, &(slot, g, h)) in active.iter().enumerate() {
            match best[a] {
                Some(c) => {
                    let (l, r) = (nodes.len(), nodes.len() + 1);
                    nodes.push(RegNode::Leaf { value: 0.0 });
                    nodes.push(RegNode::Leaf { value: 0.0 });
                    nodes[slot] = RegNode::Split { feature: c.feature, threshold: c.threshold, left: l, right: r };
                    let li = next.len() as u32;
                    next.push((l, 0.0, 0.0));
                    next.push((r, 0.0, 0.0));
                    children[a] = Some((li, li + 1, c.feature, c.threshold));
                }
                None => nodes[slot] = RegNode::Leaf { value: -g / (h + lambda) },
            }
        }
        for i in 0..n {
            let a = node_of[i];
            if a == NO_NODE {
                continue;
            }
            node_of[i] = match children[a as usize] {
                Some((l, r, f, t)) => {
                    let c = if x.get(i, f) <= t { l } else { r };
                    next[c as usize].1 += grad[i];
                    next[c as usize].2 += hess[i];
                    c
                }
                None => NO_NODE,
            };
        }
        active = next;
    }
    RegTree { nodes }
}

/// Boosted ensemble; `trees[round][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub n_classes: usize,
    pub dim: usize,
    pub learning_rate: f64,
    /// Log class priors (floored) the margins start from.
    pub init: Vec<f64>,
    pub trees: Vec<Vec<RegTree>>,
    /// Mean training log-loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

fn softmax_into(margins: &[f64], out: &mut [f64]) {
    let m = margins.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, &v) in out.iter_mut().zip(margins) {
        *o = libm::exp(v - m);
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
}

fn mean_log_loss(margins: &[f64], labels: &[usize], k: usize) -> f64 {
    let mut p = alloc::vec![0.0; k];
    let mut total = 0.0;
    for (row, &y) in margins.chunks_exact(k).zip(labels) {
        softmax_into(row, &mut p);
        total -= libm::log(p[y].max(f64::MIN_POSITIVE));
    }
    total / labels.len() as f64
}

#[inline]
fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

impl GbdtModel {
    pub fn fit(train: &LabeledDataset, cfg: &GbdtConfig) -> Result<Self> {
        cfg.validate()?;
        check_trainable(train)?;
        let x = &train.features;
        let (n, d, k) = (train.len(), train.dim(), train.n_classes());
        let labels = &train.labels;

        let mut counts = alloc::vec![0usize; k];
        for &l in labels {
            counts[l] += 1;
        }
        let init: Vec<f64> = counts.iter().map(|&c| libm::log((c as f64 / n as f64).max(PRIOR_FLOOR))).collect();
        let mut margins: Vec<f64> = (0..n).flat_map(|_| init.iter().cloned()).collect();

        let sorted = Presorted::new(x);
        let n_rows = round_half_up(cfg.row_subsample * n as f64).clamp(1, n);
        let n_cols = round_half_up(cfg.col_subsample * d as f64).clamp(1, d.max(1));

        let mut train_loss = Vec::with_capacity(cfg.n_rounds + 1);
        train_loss.push(mean_log_loss(&margins, labels, k));
        let mut trees = Vec::with_capacity(cfg.n_rounds);
        let mut prob = alloc::vec![0.0; n * k];
        let (mut grad, mut hess) = (alloc::vec![0.0; n], alloc::vec![0.0; n]);

        for round in 0..cfg.n_rounds {
            let mut rng = rng::stream(cfg.seed, round as u64);
            let mut in_sample = alloc::vec![n_rows == n; n];
            if n_rows < n {
                for i in index::sample(&mut rng, n, n_rows) {
                    in_sample[i] = true;
                }
            }
            for (m, p) in margins.chunks_exact(k).zip(prob.chunks_exact_mut(k)) {
                softmax_into(m, p);
            }
            let mut round_trees = Vec::with_capacity(k);
            for class in 0..k {
                let features: Vec<usize> = if n_cols == d {
                    (0..d).collect()
                } else {
                    let mut f = index::sample(&mut rng, d, n_cols).into_vec();
                    f.sort_unstable();
                    f
                };
                for i in 0..n {
                    let p = prob[i * k + class];
                    grad[i] = p - if labels[i] == class { 1.0 } else { 0.0 };
                    hess[i] = p * (1.0 - p);
                }
                round_trees.push(grow_regression_tree(
                    x, &sorted, &grad, &hess, &in_sample, &features, cfg.max_depth, cfg.lambda,
                ));
            }
            for (i, m) in margins.chunks_exact_mut(k).enumerate() {
                for (mc, t) in m.iter_mut().zip(&round_trees) {
                    *mc += cfg.learning_rate * t.predict(x.row(i));
                }
            }
            train_loss.push(mean_log_loss(&margins, labels, k));
            trees.push(round_trees);
        }

        Ok(Self { n_classes: k, dim: d, learning_rate: cfg.learning_rate, init, trees, train_loss })
    }

    /// Raw additive margins per class.
    pub fn margins(&self, q: &[f64]) -> Vec<f64> {
        let mut m = self.init.clone();
        for round in &self.trees {
            for (mc, t) in m.iter_mut().zip(round) {
                *mc += self.learning_rate * t.predict(q);
            }
        }
        m
    }

    pub fn predict(&self, queries: &Matrix) -> Vec<Prediction> {
        queries.iter_rows().map(|q| Prediction::from_scores(self.margins(q))).collect()
    }
}
