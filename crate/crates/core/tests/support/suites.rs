//! Check suites shared by the core integration tests and the workspace
//! acceptance runner. Each function panics on the first failed check.
#![allow(dead_code)]

use handcraft_core::classify::gbdt::RegNode;
use handcraft_core::classify::svm::{solve_binary, KernelCache};
use handcraft_core::classify::tree::{grow, Node, Tree, TreeParams};
use handcraft_core::classify::{ForestConfig, GbdtConfig, GbdtModel, KnnConfig, KnnModel, MaxFeatures};
use handcraft_core::dataset::LabeledDataset;
use handcraft_core::features::{
    gabor, gabor_kernel, gabor_response_plane, hog, lbp_codes, GaborParams, HogGeometry, HogParams, LbpMode, LbpParams,
};
use handcraft_core::imaging::GrayImage;
use handcraft_core::{rng, Matrix};
use rand::Rng;

use super::oracles::{self, CartNode};

pub fn random_points(rng: &mut impl Rng, n: usize, d: usize, classes: usize) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let labels = (0..n).map(|i| if i < classes { i } else { rng.gen_range(0..classes) }).collect();
    LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
}

pub fn to_cart(tree: &Tree, at: usize) -> CartNode {
    match &tree.nodes[at] {
        Node::Leaf { counts } => CartNode::Leaf(counts.clone()),
        Node::Split { feature, threshold, left, right } => CartNode::Split {
            feature: *feature,
            threshold: *threshold,
            left: Box::new(to_cart(tree, *left)),
            right: Box::new(to_cart(tree, *right)),
        },
    }
}

pub fn binary_problem(rng: &mut impl Rng, n: usize) -> (Matrix, Vec<f64>) {
    let rows: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    // noisy circle so some multipliers hit the box
    let y = rows
        .iter()
        .map(|r| if r[0] * r[0] + r[1] * r[1] + rng.gen_range(-0.2..0.2) < 0.5 { 1.0 } else { -1.0 })
        .collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

pub fn knn_matches_bruteforce() {
    let mut rng = rng::stream(2024, 0);
    for instance in 0..100 {
        let n = rng.gen_range(20..60);
        let d = rng.gen_range(1..5);
        let k = [1, 3, 5, 7][instance % 4];
        let p = [2.0, 1.0, 3.0][instance % 3];
        let mut train = random_points(&mut rng, n, d, 3);
        // round coordinates so exact distance ties actually occur
        if instance % 2 == 0 {
            let rows: Vec<Vec<f64>> = train.features.iter_rows().map(|r| r.iter().map(|v| (v * 4.0).round() / 4.0).collect()).collect();
            train.features = Matrix::from_rows(&rows).unwrap();
        }
        let model = KnnModel::fit(&train, &KnnConfig { k, minkowski_p: p }).unwrap();
        let queries = random_points(&mut rng, 25, d, 1).features;
        for q in queries.iter_rows() {
            let got = model.predict(&Matrix::from_rows([q]).unwrap())[0].label;
            let want = oracles::knn_label(&train.features, &train.labels, q, k, p);
            assert_eq!(got, want, "instance {instance} query {q:?}");
        }
    }
}

pub fn tree_matches_cart() {
    let mut rng = rng::stream(77, 0);
    for instance in 0..40 {
        let ds = random_points(&mut rng, 30, 3, 3);
        let params = TreeParams { max_depth: 3, features_per_split: usize::MAX };
        let tree = grow(&ds.features, &ds.labels, 3, (0..30).collect(), &params, &mut rng::stream(0, 0));
        let oracle = oracles::cart(&ds.features, &ds.labels, 3, &(0..30).collect::<Vec<_>>(), 3);
        assert_eq!(to_cart(&tree, 0), oracle, "instance {instance}");

        // the forest path with bagging and sampling off must build the same tree
        let cfg = ForestConfig { n_trees: 1, max_depth: 3, features_per_split: MaxFeatures::All, bootstrap: false, seed: 1 };
        let forest = handcraft_core::classify::forest::fit_tree(&ds, &cfg, 0).unwrap();
        assert_eq!(forest, tree);
    }
}

pub fn stump_matches_gain_scan() {
    let mut rng = rng::stream(5, 0);
    for instance in 0..30 {
        let n = 24;
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let cut = rng.gen_range(-2.0..2.0);
        let labels: Vec<usize> = xs.iter().map(|&v| usize::from(v > cut)).collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        let ds = LabeledDataset::new(Matrix::from_rows(xs.iter().map(|&v| [v])).unwrap(), labels.clone()).unwrap();
        let cfg = GbdtConfig { n_rounds: 1, max_depth: 1, row_subsample: 1.0, col_subsample: 1.0, ..Default::default() };
        let model = GbdtModel::fit(&ds, &cfg).unwrap();

        let n1 = labels.iter().filter(|&&l| l == 1).count() as f64;
        let prior = [(n as f64 - n1) / n as f64, n1 / n as f64];
        for (class, &p) in prior.iter().enumerate() {
            let grad: Vec<f64> = labels.iter().map(|&l| p - f64::from(u8::from(l == class))).collect();
            let hess: Vec<f64> = (0..n).map(|_| p * (1.0 - p)).collect();
            let (f, t, _) = oracles::best_stump(&ds.features, &grad, &hess, 1.0).unwrap();
            match model.trees[0][class].nodes[0] {
                RegNode::Split { feature, threshold, .. } => {
                    assert_eq!((feature, threshold), (f, t), "instance {instance} class {class}");
                    let below = xs.iter().zip(&labels).filter(|(v, _)| **v <= threshold);
                    let above = xs.iter().zip(&labels).filter(|(v, _)| **v > threshold);
                    assert!(below.clone().all(|(_, &l)| l == 0) && above.clone().all(|(_, &l)| l == 1));
                }
                ref other => panic!("expected a split, got {other:?}"),
            }
        }
    }
}

pub fn smo_kkt_and_dual_optimality() {
    let mut rng = rng::stream(99, 0);
    for instance in 0..20 {
        let (x, y) = binary_problem(&mut rng, 20);
        if y.iter().all(|&v| v == y[0]) {
            continue;
        }
        let (c, gamma, tol) = ([0.5, 10.0][instance % 2], 1.5, 1e-3);
        let sol = solve_binary(&mut KernelCache::new(&x, gamma, 20), &y, c, tol, 1_000_000);
        assert!(sol.converged);
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let k = oracles::rbf_matrix(&x, gamma);
        let violation = oracles::max_kkt_violation(&sol.alpha, &y, sol.bias, &k, c);
        assert!(violation <= tol, "instance {instance}: KKT violation {violation}");

        let best = oracles::dual_objective(&sol.alpha, &y, &k);
        for _ in 0..1000 {
            let a = oracles::random_feasible_alpha(&y, c, &mut rng);
            assert!(a.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9);
            assert!(oracles::dual_objective(&a, &y, &k) <= best + 1e-12);
        }
    }
}

fn random_image(rng: &mut impl Rng, h: usize, w: usize) -> GrayImage {
    GrayImage::new(h, w, (0..h * w).map(|_| rng.gen::<f64>()).collect()).unwrap()
}

/// HOG: dimension formula over a parameter sweep, block norms and entry range,
/// zero descriptor for flat images.
pub fn hog_invariants() {
    let d = hog(&GrayImage::filled(28, 28, 0.0).unwrap(), &HogParams::default()).unwrap();
    assert_eq!(d.dim(), 1296);
    assert!(d.values.iter().all(|&v| v == 0.0));
    assert!(hog(&GrayImage::filled(28, 28, 0.7).unwrap(), &HogParams::default()).unwrap().values.iter().all(|&v| v == 0.0));

    for cell in [2usize, 4, 7] {
        for block in 1..=3 {
            for stride in 1..=2 {
                for bins in [2usize, 9, 12] {
                    let p = HogParams { cell_side: cell, block_side: block, n_bins: bins, block_stride: stride, signed_gradients: false };
                    let cells = 28 / cell;
                    if block > cells || (cells - block) % stride != 0 {
                        continue;
                    }
                    let per_side = (cells - block) / stride + 1;
                    assert_eq!(HogGeometry::new(28, 28, &p).unwrap().descriptor_len(), per_side * per_side * block * block * bins);
                }
            }
        }
    }

    let mut rng = rng::stream(505, 0);
    for _ in 0..50 {
        let v = hog(&random_image(&mut rng, 28, 28), &HogParams::default()).unwrap();
        for block in v.values.chunks_exact(36) {
            let n = block.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(n <= 1.0 + 1e-9, "block norm {n}");
            assert!(block.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }
}

/// Strictly increasing nonlinear maps of [0, 1] into [0, 1].
const REMAPS: [fn(f64) -> f64; 4] = [
    |v| v.sqrt(),
    |v| v * v * v,
    |v| (v.exp() - 1.0) / (1f64.exp() - 1.0),
    |v| 0.1 + 0.8 * v.powf(0.3),
];

/// LBP: codes in `0..2^P` and invariance to intensity remaps on 50 random
/// images. Arbitrary strictly monotone remaps are checked where every circle
/// sample lands on a pixel (P = 4, integer radius); at the default P = 10,
/// R = 3 samples are interpolated, so the remaps there are positive affine.
pub fn lbp_invariants() {
    let mut rng = rng::stream(606, 0);
    let default = LbpParams::default();
    for i in 0..50 {
        let img = random_image(&mut rng, 28, 28);
        let codes = lbp_codes(&img, &default).unwrap();
        assert!(codes.iter().all(|&c| c <= 1023));

        let remap = REMAPS[i % REMAPS.len()];
        let mapped = GrayImage::new(28, 28, img.pixels().iter().map(|&v| remap(v)).collect()).unwrap();
        for r in 1..=3 {
            let p = LbpParams { neighbors: 4, radius: r as f64, mode: LbpMode::FlatImage };
            assert_eq!(lbp_codes(&img, &p).unwrap(), lbp_codes(&mapped, &p).unwrap(), "image {i}, R = {r}");
        }

        let (a, b) = (rng.gen_range(0.05..0.7), rng.gen_range(0.0..0.3));
        let affine = GrayImage::new(28, 28, img.pixels().iter().map(|&v| a * v + b).collect()).unwrap();
        assert_eq!(codes, lbp_codes(&affine, &default).unwrap(), "image {i}, affine");
    }
    let flat = lbp_codes(&GrayImage::filled(28, 28, 0.3).unwrap(), &default).unwrap();
    assert_eq!(flat[14 * 28 + 14], 1023);
}

/// Gabor: linearity within 1e-9 and the DC response of a constant image equal
/// to c times the directly summed real kernel.
pub fn gabor_invariants() {
    let p = GaborParams::default();
    let mut rng = rng::stream(707, 0);
    for _ in 0..20 {
        let x: Vec<f64> = (0..28 * 28).map(|_| rng.gen()).collect();
        let y: Vec<f64> = (0..28 * 28).map(|_| rng.gen()).collect();
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let gx = gabor_response_plane(&x, 28, 28, &p).unwrap();
        let gy = gabor_response_plane(&y, 28, 28, &p).unwrap();
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let g = gabor_response_plane(&mixed, 28, 28, &p).unwrap();
        for i in 0..g.len() {
            assert!((g[i] - (a * gx[i] + b * gy[i])).abs() < 1e-9);
        }
    }

    // direct summation of the real kernel from its closed form
    let sigma = (1.0 / (std::f64::consts::PI * p.frequency))
        * (std::f64::consts::LN_2 / 2.0).sqrt()
        * (2f64.powf(p.bandwidth) + 1.0)
        / (2f64.powf(p.bandwidth) - 1.0);
    let radius = (p.n_stds * sigma).ceil() as i64;
    let mut sum = 0.0;
    for y in -radius..=radius {
        for x in -radius..=radius {
            let (x, y) = (x as f64, y as f64);
            sum += (-(x * x + y * y) / (2.0 * sigma * sigma)).exp() * (2.0 * std::f64::consts::PI * p.frequency * x).cos();
        }
    }
    let k = gabor_kernel(&p).unwrap();
    assert!((k.re.iter().sum::<f64>() - sum).abs() < 1e-12);
    for c in [0.0, 0.25, 1.0] {
        let v = gabor(&GrayImage::filled(28, 28, c).unwrap(), &p).unwrap();
        assert_eq!(v.dim(), 784);
        assert!(v.values.iter().all(|r| (r - c * sum).abs() < 1e-12));
    }
}
