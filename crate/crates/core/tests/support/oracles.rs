//! Brute-force reference implementations. These deliberately avoid the code
//! paths of the library: full sorts instead of bounded insertion, direct Gini
//! and gain formulas in floating point instead of exact integer comparison,
//! and an explicit kernel matrix for SVM checks.
#![allow(dead_code)]

use handcraft_core::Matrix;
use rand::Rng;

/// Label of `query` under exhaustive k-NN with Minkowski-p (compared as the
/// p-th power). Distance ties by index; vote ties to the class met first.
pub fn knn_label(x: &Matrix, labels: &[usize], query: &[f64], k: usize, p: f64) -> usize {
    let mut all: Vec<(f64, usize)> = x
        .iter_rows()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(query).map(|(a, b)| (a - b).abs().powf(p)).sum(), i))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut votes = vec![0usize; n_classes];
    for &(_, i) in &all[..k] {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().unwrap();
    all[..k].iter().map(|&(_, i)| labels[i]).find(|&c| votes[c] == top).unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub enum CartNode {
    Leaf(Vec<u32>),
    Split { feature: usize, threshold: f64, left: Box<CartNode>, right: Box<CartNode> },
}

fn gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

/// Exhaustive CART on all features, every midpoint threshold, minimal
/// weighted Gini (first candidate kept unless beaten by > 1e-12).
pub fn cart(x: &Matrix, labels: &[usize], n_classes: usize, rows: &[usize], depth_left: usize) -> CartNode {
    let mut counts = vec![0u32; n_classes];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    let impure = counts.iter().filter(|&&c| c > 0).count() > 1;
    if !impure || rows.len() < 2 || depth_left == 0 {
        return CartNode::Leaf(counts);
    }
    let n = rows.len() as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.cols() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| x.get(r, f)).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut l, mut r) = (vec![0u32; n_classes], vec![0u32; n_classes]);
            for &row in rows {
                if x.get(row, f) <= t {
                    l[labels[row]] += 1;
                } else {
                    r[labels[row]] += 1;
                }
            }
            let nl = l.iter().sum::<u32>() as f64;
            let nr = r.iter().sum::<u32>() as f64;
            let score = (nl * gini(&l) + nr * gini(&r)) / n;
            if best.is_none_or(|b| score < b.0 - 1e-12) {
                best = Some((score, f, t));
            }
        }
    }
    let Some((_, f, t)) = best else {
        return CartNode::Leaf(counts);
    };
    let (lr, rr): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x.get(r, f) <= t);
    CartNode::Split {
        feature: f,
        threshold: t,
        left: Box::new(cart(x, labels, n_classes, &lr, depth_left - 1)),
        right: Box::new(cart(x, labels, n_classes, &rr, depth_left - 1)),
    }
}

/// Best `(feature, threshold, gain)` for a single regression stump under
/// `GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)`, scanning every midpoint.
pub fn best_stump(x: &Matrix, grad: &[f64], hess: &[f64], lambda: f64) -> Option<(usize, f64, f64)> {
    let s = |g: f64, h: f64| g * g / (h + lambda);
    let g: f64 = grad.iter().sum();
    let h: f64 = hess.iter().sum();
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..x.cols() {
        let mut vals: Vec<f64> = (0..x.rows()).map(|r| x.get(r, f)).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let (mut gl, mut hl) = (0.0, 0.0);
            for r in 0..x.rows() {
                if x.get(r, f) <= t {
                    gl += grad[r];
                    hl += hess[r];
                }
            }
            let gain = s(gl, hl) + s(g - gl, h - hl) - s(g, h);
            if gain > 0.0 && best.is_none_or(|b| gain > b.2 + 1e-12) {
                best = Some((f, t, gain));
            }
        }
    }
    best
}

pub fn rbf_matrix(x: &Matrix, gamma: f64) -> Vec<Vec<f64>> {
    x.iter_rows()
        .map(|a| {
            x.iter_rows()
                .map(|b| (-gamma * a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>()).exp())
                .collect()
        })
        .collect()
}

/// `sum a - 1/2 sum_ij a_i a_j y_i y_j K_ij` (to be maximized).
pub fn dual_objective(alpha: &[f64], y: &[f64], k: &[Vec<f64>]) -> f64 {
    let mut quad = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Uniform box sample rescaled on one side so that `y'a = 0`.
pub fn random_feasible_alpha(y: &[f64], c: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut a: Vec<f64> = y.iter().map(|_| rng.gen_range(0.0..=c)).collect();
    let pos: f64 = a.iter().zip(y).filter(|(_, &t)| t > 0.0).map(|(v, _)| v).sum();
    let neg: f64 = a.iter().zip(y).filter(|(_, &t)| t < 0.0).map(|(v, _)| v).sum();
    let (scale_side, factor) = if pos > neg { (1.0, neg / pos) } else { (-1.0, pos / neg) };
    for (v, &t) in a.iter_mut().zip(y) {
        if t == scale_side {
            *v *= factor;
        }
    }
    a
}

/// Largest KKT violation over the training set for `f(x_i) = sum a_j y_j K_ij + b`.
pub fn max_kkt_violation(alpha: &[f64], y: &[f64], bias: f64, k: &[Vec<f64>], c: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..alpha.len() {
        let f: f64 = (0..alpha.len()).map(|j| alpha[j] * y[j] * k[i][j]).sum::<f64>() + bias;
        let m = y[i] * f;
        let v = if alpha[i] <= 1e-8 {
            (1.0 - m).max(0.0)
        } else if alpha[i] >= c - 1e-8 {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}
