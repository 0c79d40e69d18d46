//! PGM dumps of an image, its preprocessed form and a feature-space rendering.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use handcraft_core::features::{gabor_response, hog_cell_histograms, lbp, FeatureParams, LbpMode};
use handcraft_core::imaging::{preprocess, to_grayscale, GrayImage, PreprocessConfig};

use crate::error::{BenchError, Result};

/// Pixels per cell side in the HOG glyph rendering.
pub const GLYPH_CELL: usize = 15;

/// Binary (P5) 8-bit PGM.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_u8());
    out
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    std::fs::write(path, encode_pgm(img)).map_err(|e| BenchError::io(path, e))
}

/// Decodes PNG, JPEG, BMP or PNM and converts to luma.
pub fn load_image(path: &Path) -> Result<GrayImage> {
    let decoded = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => BenchError::io(path, io),
        other => BenchError::Format { what: "image", msg: format!("{}: {other}", path.display()) },
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let channels: Vec<f64> = rgb.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Ok(to_grayscale(&channels, h, w)?)
}

/// Per-cell HOG histograms drawn as oriented line glyphs, one stroke per bin
/// along the edge direction with brightness proportional to the bin's share of
/// the global maximum. Images whose histograms are numerically zero (below
/// `1e-9`) render black.
pub fn hog_glyphs(img: &GrayImage, params: &handcraft_core::features::HogParams) -> Result<GrayImage> {
    let (geo, hist) = hog_cell_histograms(img, params)?;
    let n_bins = params.n_bins;
    let range = if params.signed_gradients { 2.0 * PI } else { PI };
    let (h, w) = (geo.cells_y * GLYPH_CELL, geo.cells_x * GLYPH_CELL);
    let mut px = vec![0.0f64; h * w];
    let max = hist.iter().cloned().fold(0.0, f64::max);
    if max > 1e-9 {
        let half = (GLYPH_CELL as f64 - 1.0) / 2.0;
        for cy in 0..geo.cells_y {
            for cx in 0..geo.cells_x {
                let centre = ((cy * GLYPH_CELL) as f64 + half, (cx * GLYPH_CELL) as f64 + half);
                for b in 0..n_bins {
                    let v = hist[(cy * geo.cells_x + cx) * n_bins + b] / max;
                    if v <= 0.0 {
                        continue;
                    }
                    // edges run perpendicular to the gradient
                    let theta = b as f64 * range / n_bins as f64 + PI / 2.0;
                    let (dy, dx) = theta.sin_cos();
                    let steps = (4.0 * half) as i32;
                    for s in -steps..=steps {
                        let t = s as f64 / 4.0;
                        let y = (centre.0 + t * dy).round() as usize;
                        let x = (centre.1 + t * dx).round() as usize;
                        let slot = &mut px[y * w + x];
                        *slot = slot.max(v);
                    }
                }
            }
        }
    }
    Ok(GrayImage::new(h, w, px)?)
}

/// Visual form of `params` applied to an already preprocessed image.
pub fn render_feature(img: &GrayImage, params: &FeatureParams) -> Result<GrayImage> {
    let (h, w) = (img.height(), img.width());
    Ok(match params {
        FeatureParams::Hog(p) => hog_glyphs(img, p)?,
        FeatureParams::Lbp(p) => {
            let flat = handcraft_core::features::LbpParams { mode: LbpMode::FlatImage, ..*p };
            GrayImage::new(h, w, lbp(img, &flat)?.values)?
        }
        FeatureParams::Gabor(p) => {
            let r = gabor_response(img, p)?;
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let px = if hi - lo > 1e-12 {
                r.iter().map(|v| (v - lo) / (hi - lo)).collect()
            } else {
                r.iter().map(|v| v.clamp(0.0, 1.0)).collect()
            };
            GrayImage::new(h, w, px)?
        }
        FeatureParams::Raw => img.clone(),
    })
}

/// Writes `original.pgm`, `preprocessed.pgm` and `<method>.pgm` into `dir`.
pub fn visualize(img: &GrayImage, pre: &PreprocessConfig, params: &FeatureParams, dir: &Path) -> Result<[PathBuf; 3]> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let processed = preprocess(img, pre)?;
    let rendering = render_feature(&processed, params)?;
    let paths = [
        dir.join("original.pgm"),
        dir.join("preprocessed.pgm"),
        dir.join(format!("{}.pgm", params.method().name().to_ascii_lowercase())),
    ];
    write_pgm(&paths[0], img)?;
    write_pgm(&paths[1], &processed)?;
    write_pgm(&paths[2], &rendering)?;
    Ok(paths)
}
