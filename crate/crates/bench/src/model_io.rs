//! Versioned binary serialization of [`TrainedModel`].
//!
//! Layout (all integers little-endian, lengths as u64):
//!
//! ```text
//! "HCMODEL\0"  u32 version  u8 kind (0 KNN, 1 SVM, 2 RF, 3 GBDT)  body
//! KNN   k, f64 p, n_classes, matrix, labels[rows]
//! SVM   n_classes, dim, f64 gamma, f64 C, matrix support,
//!       n_classes x (f64 coef[rows], f64 bias, u8 converged)
//! RF    n_classes, dim, n_trees, trees
//!       tree: n_nodes, nodes; node: u8 0 split (feature, f64 threshold, left, right)
//!                                  u8 1 leaf (u32 counts[n_classes])
//! GBDT  n_classes, dim, f64 learning_rate, f64 init[n_classes], n_rounds,
//!       n_rounds x n_classes regression trees, f64 train_loss[]
//!       node: u8 0 split (as RF) | u8 1 leaf (f64 value)
//! matrix: rows, cols, f64 data[rows*cols]
//! ```

use std::path::Path;

use handcraft_core::classify::gbdt::{RegNode, RegTree};
use handcraft_core::classify::tree::{Node, Tree};
use handcraft_core::classify::{ForestModel, GbdtModel, KnnModel, SvmModel, TrainedModel};

use crate::binio::{Reader, Writer};
use crate::error::{BenchError, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"HCMODEL\0";
pub const MODEL_VERSION: u32 = 1;

pub fn serialize(model: &TrainedModel) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MODEL_MAGIC);
    w.u32(MODEL_VERSION);
    match model {
        TrainedModel::Knn(m) => {
            w.u8(0);
            w.len(m.k);
            w.f64(m.minkowski_p);
            w.len(m.n_classes);
            w.matrix(&m.train);
            m.labels.iter().for_each(|&l| w.len(l));
        }
        TrainedModel::Svm(m) => {
            w.u8(1);
            w.len(m.n_classes);
            w.len(m.dim);
            w.f64(m.gamma);
            w.f64(m.c);
            w.matrix(&m.support);
            for c in 0..m.n_classes {
                w.f64s(&m.dual_coef[c]);
                w.f64(m.bias[c]);
                w.u8(m.converged[c] as u8);
            }
        }
        TrainedModel::Rf(m) => {
            w.u8(2);
            w.len(m.n_classes);
            w.len(m.dim);
            w.len(m.trees.len());
            for tree in &m.trees {
                w.len(tree.nodes.len());
                for node in &tree.nodes {
                    match node {
                        Node::Split { feature, threshold, left, right } => split(&mut w, *feature, *threshold, *left, *right),
                        Node::Leaf { counts } => {
                            w.u8(1);
                            counts.iter().for_each(|&n| w.u32(n));
                        }
                    }
                }
            }
        }
        TrainedModel::Gbdt(m) => {
            w.u8(3);
            w.len(m.n_classes);
            w.len(m.dim);
            w.f64(m.learning_rate);
            m.init.iter().for_each(|&v| w.f64(v));
            w.len(m.trees.len());
            for tree in m.trees.iter().flatten() {
                w.len(tree.nodes.len());
                for node in &tree.nodes {
                    match node {
                        RegNode::Split { feature, threshold, left, right } => split(&mut w, *feature, *threshold, *left, *right),
                        RegNode::Leaf { value } => {
                            w.u8(1);
                            w.f64(*value);
                        }
                    }
                }
            }
            w.f64s(&m.train_loss);
        }
    }
    w.buf
}

fn split(w: &mut Writer, feature: usize, threshold: f64, left: usize, right: usize) {
    w.u8(0);
    w.len(feature);
    w.f64(threshold);
    w.len(left);
    w.len(right);
}

/// Split fields, with feature and child indices bounds-checked.
fn read_split(r: &mut Reader<'_>, dim: usize, n_nodes: usize) -> Result<(usize, f64, usize, usize)> {
    let feature = r.index(dim, "feature")?;
    let threshold = r.f64()?;
    let left = r.index(n_nodes, "child")?;
    let right = r.index(n_nodes, "child")?;
    Ok((feature, threshold, left, right))
}

/// Rejects node graphs where a child does not come after its parent, which
/// rules out cycles.
fn check_order(r: &Reader<'_>, at: usize, left: usize, right: usize) -> Result<()> {
    if left <= at || right <= at {
        return r.fail(format!("node {at} points backwards"));
    }
    Ok(())
}

pub fn deserialize(bytes: &[u8]) -> Result<TrainedModel> {
    let mut r = Reader::new(bytes, "model");
    r.magic(MODEL_MAGIC)?;
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return r.fail(format!("unsupported version {version}"));
    }
    let model = match r.u8()? {
        0 => {
            let k = r.u64()? as usize;
            let minkowski_p = r.f64()?;
            let n_classes = r.len(0)?;
            let train = r.matrix()?;
            let labels = (0..train.rows()).map(|_| r.index(n_classes, "label")).collect::<Result<Vec<_>>>()?;
            if k == 0 || k > train.rows() {
                return r.fail(format!("k = {k} with {} stored rows", train.rows()));
            }
            TrainedModel::Knn(KnnModel { k, minkowski_p, n_classes, train, labels })
        }
        1 => {
            let n_classes = r.len(0)?;
            let dim = r.len(0)?;
            let gamma = r.f64()?;
            let c = r.f64()?;
            let support = r.matrix()?;
            if support.rows() > 0 && support.cols() != dim {
                return r.fail("support vector width differs from model dim");
            }
            let (mut dual_coef, mut bias, mut converged) = (Vec::new(), Vec::new(), Vec::new());
            for _ in 0..n_classes {
                let coef = r.f64s()?;
                if coef.len() != support.rows() {
                    return r.fail("dual coefficient count differs from support vector count");
                }
                dual_coef.push(coef);
                bias.push(r.f64()?);
                converged.push(r.u8()? != 0);
            }
            TrainedModel::Svm(SvmModel { n_classes, dim, gamma, c, support, dual_coef, bias, converged })
        }
        2 => {
            let n_classes = r.len(0)?;
            let dim = r.len(0)?;
            let n_trees = r.len(1)?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes = r.len(1)?;
                let mut nodes = Vec::with_capacity(n_nodes);
                for at in 0..n_nodes {
                    nodes.push(match r.u8()? {
                        0 => {
                            let (feature, threshold, left, right) = read_split(&mut r, dim, n_nodes)?;
                            check_order(&r, at, left, right)?;
                            Node::Split { feature, threshold, left, right }
                        }
                        1 => Node::Leaf { counts: (0..n_classes).map(|_| r.u32()).collect::<Result<_>>()? },
                        t => return r.fail(format!("unknown node tag {t}")),
                    });
                }
                if nodes.is_empty() {
                    return r.fail("empty tree");
                }
                trees.push(Tree { nodes });
            }
            TrainedModel::Rf(ForestModel::from_trees(n_classes, dim, trees)?)
        }
        3 => {
            let n_classes = r.len(0)?;
            let dim = r.len(0)?;
            let learning_rate = r.f64()?;
            let init = (0..n_classes).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            let n_rounds = r.len(1)?;
            let mut trees = Vec::with_capacity(n_rounds);
            for _ in 0..n_rounds {
                let mut round = Vec::with_capacity(n_classes);
                for _ in 0..n_classes {
                    let n_nodes = r.len(1)?;
                    let mut nodes = Vec::with_capacity(n_nodes);
                    for at in 0..n_nodes {
                        nodes.push(match r.u8()? {
                            0 => {
                                let (feature, threshold, left, right) = read_split(&mut r, dim, n_nodes)?;
                                check_order(&r, at, left, right)?;
                                RegNode::Split { feature, threshold, left, right }
                            }
                            1 => RegNode::Leaf { value: r.f64()? },
                            t => return r.fail(format!("unknown node tag {t}")),
                        });
                    }
                    if nodes.is_empty() {
                        return r.fail("empty tree");
                    }
                    round.push(RegTree { nodes });
                }
                trees.push(round);
            }
            let train_loss = r.f64s()?;
            TrainedModel::Gbdt(GbdtModel { n_classes, dim, learning_rate, init, trees, train_loss })
        }
        kind => return r.fail(format!("unknown model kind {kind}")),
    };
    r.finish()?;
    Ok(model)
}

pub fn save(path: &Path, model: &TrainedModel) -> Result<()> {
    std::fs::write(path, serialize(model)).map_err(|e| BenchError::io(path, e))
}

pub fn load(path: &Path) -> Result<TrainedModel> {
    deserialize(&std::fs::read(path).map_err(|e| BenchError::io(path, e))?)
}

/// Human-readable summary used by `inspect-model`.
pub fn summary(model: &TrainedModel) -> String {
    let head = format!("kind: {}\nclasses: {}\ninput dim: {}\n", model.kind(), model.n_classes(), model.dim());
    let body = match model {
        TrainedModel::Knn(m) => format!("k: {}\nminkowski p: {}\nstored rows: {}\n", m.k, m.minkowski_p, m.train.rows()),
        TrainedModel::Svm(m) => {
            let per_class: Vec<String> = m
                .dual_coef
                .iter()
                .map(|c| c.iter().filter(|&&a| a != 0.0).count().to_string())
                .collect();
            format!(
                "gamma: {}\nC: {}\nsupport vectors (pooled): {}\nsupport vectors per class: {}\nbias: {:?}\nconverged: {:?}\n",
                m.gamma,
                m.c,
                m.support.rows(),
                per_class.join(" "),
                m.bias,
                m.converged
            )
        }
        TrainedModel::Rf(m) => {
            let depth = m.trees.iter().map(Tree::depth).max().unwrap_or(0);
            let leaves: usize = m.trees.iter().map(Tree::n_leaves).sum();
            format!("trees: {}\nmax depth: {depth}\ntotal leaves: {leaves}\n", m.trees.len())
        }
        TrainedModel::Gbdt(m) => {
            let depth = m.trees.iter().flatten().map(RegTree::depth).max().unwrap_or(0);
            let loss = |i: Option<&f64>| i.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            format!(
                "rounds: {}\nlearning rate: {}\nmax depth: {depth}\ninitial margins: {:?}\ntrain loss: {} -> {}\n",
                m.trees.len(),
                m.learning_rate,
                m.init,
                loss(m.train_loss.first()),
                loss(m.train_loss.last())
            )
        }
    };
    head + &body
}
