//! CART classification trees with exact Gini split search.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! a feature. Split quality is compared in exact integer arithmetic, so equal
//! impurities really are equal and the first candidate (lowest feature, then
//! lowest threshold) wins.

use alloc::vec::Vec;

use rand::seq::index;

use crate::rng::Rng;
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Training class counts that reached the leaf.
    Leaf { counts: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    /// Root at index 0.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_counts<'a>(&'a self, x: &[f64]) -> &'a [u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class of the leaf `x` lands in, ties to the lowest class.
    pub fn predict(&self, x: &[f64]) -> usize {
        let counts = self.leaf_counts(x);
        let mut best = 0;
        for (c, &n) in counts.iter().enumerate() {
            if n > counts[best] {
                best = c;
            }
        }
        best
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Features examined per node; `>= d` means all of them.
    pub features_per_split: usize,
}

/// `sum_c n_c^2 / n` as the exact fraction `(sum_c n_c^2, n)`. Larger
/// `left + right` means lower weighted Gini impurity.
#[derive(Clone, Copy)]
struct Purity {
    left_sq: u128,
    left_n: u128,
    right_sq: u128,
    right_n: u128,
}

impl Purity {
    /// `self > other`, comparing `ls/ln + rs/rn` by cross-multiplication.
    fn beats(&self, other: &Purity) -> bool {
        let num_a = self.left_sq * self.right_n + self.right_sq * self.left_n;
        let den_a = self.left_n * self.right_n;
        let num_b = other.left_sq * other.right_n + other.right_sq * other.left_n;
        let den_b = other.left_n * other.right_n;
        num_a * den_b > num_b * den_a
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    purity: Purity,
}

fn sum_sq(counts: &[u32]) -> u128 {
    counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
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

/// Grows one tree over `rows` (duplicates allowed, e.g. a bootstrap sample).
/// `rng` is only consulted when `features_per_split < d`.
pub fn grow(x: &Matrix, labels: &[usize], n_classes: usize, rows: Vec<usize>, params: &TreeParams, rng: &mut Rng) -> Tree {
    let d = x.cols();
    let mut nodes: Vec<Node> = Vec::new();
    nodes.push(Node::Leaf { counts: Vec::new() });
    // (node slot, rows, depth)
    let mut stack = alloc::vec![(0usize, rows, 0usize)];
    let mut pairs: Vec<(f64, usize)> = Vec::new();
    let mut left = alloc::vec![0u32; n_classes];

    while let Some((slot, rows, depth)) = stack.pop() {
        let mut counts = alloc::vec![0u32; n_classes];
        for &r in &rows {
            counts[labels[r]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 || depth >= params.max_depth {
            nodes[slot] = Node::Leaf { counts };
            continue;
        }

        let features: Vec<usize> = if params.features_per_split >= d {
            (0..d).collect()
        } else {
            let mut f = index::sample(rng, d, params.features_per_split).into_vec();
            f.sort_unstable();
            f
        };

        let mut best: Option<Best> = None;
        for &f in &features {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (x.get(r, f), labels[r])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            let n = pairs.len();
            for k in 0..n - 1 {
                left[pairs[k].1] += 1;
                if pairs[k].0 == pairs[k + 1].0 {
                    continue;
                }
                let left_sq = sum_sq(&left);
                let right_sq: u128 = counts
                    .iter()
                    .zip(&left)
                    .map(|(&t, &l)| ((t - l) as u128) * ((t - l) as u128))
                    .sum();
                let purity = Purity {
                    left_sq,
                    left_n: (k + 1) as u128,
                    right_sq,
                    right_n: (n - k - 1) as u128,
                };
                if best.as_ref().is_none_or(|b| purity.beats(&b.purity)) {
                    best = Some(Best { feature: f, threshold: midpoint(pairs[k].0, pairs[k + 1].0), purity });
                }
            }
        }

        let Some(best) = best else {
            nodes[slot] = Node::Leaf { counts };
            continue;
        };
        let (lrows, rrows): (Vec<usize>, Vec<usize>) =
            rows.into_iter().partition(|&r| x.get(r, best.feature) <= best.threshold);
        let (l, r) = (nodes.len(), nodes.len() + 1);
        nodes.push(Node::Leaf { counts: Vec::new() });
        nodes.push(Node::Leaf { counts: Vec::new() });
        nodes[slot] = Node::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
        // right first so the left subtree is laid out first
        stack.push((r, rrows, depth + 1));
        stack.push((l, lrows, depth + 1));
    }
    Tree { nodes }
}
