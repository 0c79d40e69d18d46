//! Deterministic synthetic datasets: stroked digit glyphs and filled vs.
//! hollow squares. Sample `i` depends only on `(seed, i)`.

use std::fmt::Write as _;
use std::path::Path;

use handcraft_core::dataset::Source;
use handcraft_core::imaging::GrayImage;
use handcraft_core::rng;
use rand::Rng;

use crate::datasets::{sha256_hex, ImageSet};
use crate::error::{BenchError, Result};

/// Side of the rendered digit glyphs; the pipeline resizes them to 28.
pub const DIGIT_SIDE: usize = 32;
pub const SQUARE_SIDE: usize = 28;

type Stroke = &'static [(f64, f64)];

const ZERO: Stroke = &[
    (0.50, 0.10), (0.68, 0.17), (0.76, 0.35), (0.76, 0.65), (0.68, 0.83), (0.50, 0.90),
    (0.32, 0.83), (0.24, 0.65), (0.24, 0.35), (0.32, 0.17), (0.50, 0.10),
];
const ONE: Stroke = &[(0.36, 0.26), (0.52, 0.10), (0.52, 0.90)];
const TWO: Stroke = &[
    (0.26, 0.28), (0.36, 0.14), (0.52, 0.10), (0.67, 0.16), (0.72, 0.30), (0.64, 0.47), (0.26, 0.90), (0.76, 0.90),
];
const THREE: Stroke = &[
    (0.28, 0.14), (0.70, 0.14), (0.46, 0.44), (0.64, 0.52), (0.73, 0.68), (0.64, 0.85), (0.44, 0.90), (0.26, 0.82),
];
const FOUR: Stroke = &[(0.62, 0.90), (0.62, 0.10), (0.24, 0.64), (0.78, 0.64)];
const FIVE: Stroke = &[
    (0.72, 0.10), (0.34, 0.10), (0.30, 0.46), (0.54, 0.41), (0.71, 0.53), (0.72, 0.74), (0.56, 0.89), (0.28, 0.85),
];
const SIX: Stroke = &[
    (0.68, 0.12), (0.46, 0.20), (0.31, 0.44), (0.28, 0.70), (0.40, 0.88), (0.60, 0.88), (0.72, 0.71), (0.63, 0.53),
    (0.43, 0.50), (0.29, 0.62),
];
const SEVEN: Stroke = &[(0.24, 0.10), (0.76, 0.10), (0.42, 0.90)];
const EIGHT_TOP: Stroke = &[
    (0.50, 0.12), (0.64, 0.18), (0.66, 0.31), (0.50, 0.46), (0.34, 0.31), (0.36, 0.18), (0.50, 0.12),
];
const EIGHT_BOTTOM: Stroke = &[
    (0.50, 0.46), (0.70, 0.58), (0.72, 0.76), (0.50, 0.90), (0.28, 0.76), (0.30, 0.58), (0.50, 0.46),
];
const NINE_LOOP: Stroke = &[
    (0.70, 0.32), (0.62, 0.15), (0.46, 0.11), (0.31, 0.20), (0.30, 0.40), (0.45, 0.52), (0.62, 0.48), (0.70, 0.32),
];
const NINE_STEM: Stroke = &[(0.70, 0.32), (0.64, 0.90)];

fn glyph(digit: usize) -> &'static [Stroke] {
    match digit {
        0 => &[ZERO],
        1 => &[ONE],
        2 => &[TWO],
        3 => &[THREE],
        4 => &[FOUR],
        5 => &[FIVE],
        6 => &[SIX],
        7 => &[SEVEN],
        8 => &[EIGHT_TOP, EIGHT_BOTTOM],
        _ => &[NINE_LOOP, NINE_STEM],
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// One jittered rendering of `digit` on a `DIGIT_SIDE` canvas.
pub fn render_digit(digit: usize, rng: &mut impl Rng) -> GrayImage {
    let side = DIGIT_SIDE as f64;
    let angle = rng.gen_range(-0.3..0.3);
    let shear = rng.gen_range(-0.35..0.35);
    let sx = rng.gen_range(0.7..1.05);
    let sy = rng.gen_range(0.75..1.05);
    let tx = rng.gen_range(-0.1..0.1);
    let ty = rng.gen_range(-0.08..0.08);
    let width = rng.gen_range(1.6..3.4);
    let contrast: f64 = rng.gen_range(0.45..1.0);
    let background: f64 = rng.gen_range(0.0..0.25);
    let noise: f64 = rng.gen_range(0.05..0.2);
    let (sin, cos) = f64::sin_cos(angle);

    let mut strokes: Vec<Vec<(f64, f64)>> = Vec::new();
    for stroke in glyph(digit) {
        let pts = stroke
            .iter()
            .map(|&(x, y)| {
                let (x, y) = (x - 0.5 + rng.gen_range(-0.025..0.025), y - 0.5 + rng.gen_range(-0.025..0.025));
                let (x, y) = (sx * (x + shear * y), sy * y);
                let (x, y) = (cos * x - sin * y, sin * x + cos * y);
                ((x + 0.5 + tx) * side, (y + 0.5 + ty) * side)
            })
            .collect();
        strokes.push(pts);
    }

    let mut px = Vec::with_capacity(DIGIT_SIDE * DIGIT_SIDE);
    for r in 0..DIGIT_SIDE {
        for c in 0..DIGIT_SIDE {
            let p = (c as f64 + 0.5, r as f64 + 0.5);
            let d = strokes
                .iter()
                .flat_map(|s| s.windows(2).map(move |w| segment_distance(p, w[0], w[1])))
                .fold(f64::INFINITY, f64::min);
            let ink = (width / 2.0 - d + 0.5).clamp(0.0, 1.0);
            let v: f64 = background + (contrast - background).max(0.0) * ink + rng.gen_range(-noise..noise);
            px.push(v.clamp(0.0, 1.0));
        }
    }
    GrayImage::new(DIGIT_SIDE, DIGIT_SIDE, px).expect("rendered pixels are clamped")
}

/// A filled (class 0) or hollow (class 1) axis-aligned square, roughly centred.
pub fn render_square(hollow: bool, rng: &mut impl Rng) -> GrayImage {
    let n = SQUARE_SIDE;
    let size = rng.gen_range(16..=20);
    let top = (n - size) / 2 + rng.gen_range(0..=2) - 1;
    let left = (n - size) / 2 + rng.gen_range(0..=2) - 1;
    let mut px = vec![0.0; n * n];
    for r in top..top + size {
        for c in left..left + size {
            let edge = r < top + 3 || r >= top + size - 3 || c < left + 3 || c >= left + size - 3;
            if !hollow || edge {
                px[r * n + c] = 1.0;
            }
        }
    }
    GrayImage::new(n, n, px).expect("binary pixels")
}

fn finish(images: Vec<GrayImage>, labels: Vec<usize>, name: &str) -> ImageSet {
    let csv = to_csv(&images, &labels);
    ImageSet { images, labels, source: Source { name: name.into(), digest: sha256_hex(csv.as_bytes()) } }
}

/// `n` glyph digits with labels cycling 0..=9, rendered at `DIGIT_SIDE`.
pub fn digits(n: usize, seed: u64) -> ImageSet {
    let (images, labels) = (0..n)
        .map(|i| {
            let label = i % 10;
            (render_digit(label, &mut rng::stream(seed, i as u64)), label)
        })
        .unzip();
    finish(images, labels, "synth_digits")
}

/// `n` squares alternating filled / hollow, at `SQUARE_SIDE`.
pub fn squares(n: usize, seed: u64) -> ImageSet {
    let (images, labels) = (0..n)
        .map(|i| {
            let label = i % 2;
            (render_square(label == 1, &mut rng::stream(seed, i as u64)), label)
        })
        .unzip();
    finish(images, labels, "synth_squares")
}

/// Label-first CSV with 8-bit pixels, the same layout [`crate::datasets::load_csv`] reads.
pub fn to_csv(images: &[GrayImage], labels: &[usize]) -> String {
    let mut out = String::new();
    for (img, &label) in images.iter().zip(labels) {
        write!(out, "{label}").unwrap();
        for b in img.to_u8() {
            write!(out, ",{b}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, set: &ImageSet) -> Result<()> {
    std::fs::write(path, to_csv(&set.images, &set.labels)).map_err(|e| BenchError::io(path, e))
}
