use alloc::vec::Vec;

use super::GrayImage;
use crate::{Error, Result};

const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// BT.601 luma of an interleaved `height x width x 3` RGB buffer in `[0, 1]`.
pub fn to_grayscale(rgb: &[f64], height: usize, width: usize) -> Result<GrayImage> {
    if height == 0 || width == 0 {
        return Err(Error::Dimension(alloc::format!("empty image {height}x{width}")));
    }
    if rgb.len() != height * width * 3 {
        return Err(Error::Dimension(alloc::format!(
            "{} samples do not fill {height}x{width}x3",
            rgb.len()
        )));
    }
    if rgb.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Parameter("channel values must lie in [0, 1]".into()));
    }
    let px = rgb
        .chunks_exact(3)
        .map(|c| LUMA[0] * c[0] + LUMA[1] * c[1] + LUMA[2] * c[2])
        .collect();
    Ok(GrayImage::from_clamped(height, width, px))
}

/// Source coordinate for destination sample `dst` under half-pixel alignment,
/// clamped into `[0, src_len - 1]`.
#[inline]
fn source_coord(dst: usize, scale: f64, src_len: usize) -> f64 {
    let s = (dst as f64 + 0.5) * scale - 0.5;
    s.clamp(0.0, (src_len - 1) as f64)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Bilinear resize with `src = (dst + 0.5) * scale - 0.5`, clamped to the borders.
pub fn resize_bilinear(img: &GrayImage, out_h: usize, out_w: usize) -> Result<GrayImage> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::Dimension(alloc::format!("target size {out_h}x{out_w}")));
    }
    let (h, w) = (img.height(), img.width());
    if (h, w) == (out_h, out_w) {
        return Ok(img.clone());
    }
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    let cols: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|x| {
            let fx = source_coord(x, sx, w);
            let x0 = fx as usize;
            ((x0), (x0 + 1).min(w - 1), fx - x0 as f64)
        })
        .collect();
    let mut out = Vec::with_capacity(out_h * out_w);
    for y in 0..out_h {
        let fy = source_coord(y, sy, h);
        let y0 = fy as usize;
        let y1 = (y0 + 1).min(h - 1);
        let ty = fy - y0 as f64;
        for &(x0, x1, tx) in &cols {
            let top = lerp(img.get(y0, x0), img.get(y0, x1), tx);
            let bottom = lerp(img.get(y1, x0), img.get(y1, x1), tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    Ok(GrayImage::from_clamped(out_h, out_w, out))
}

struct Moments {
    centroid_y: f64,
    mu11: f64,
    mu02: f64,
}

fn moments(img: &GrayImage) -> Option<Moments> {
    let (h, w) = (img.height(), img.width());
    let (mut m00, mut m10, mut m01) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let v = img.get(y, x);
            m00 += v;
            m10 += v * x as f64;
            m01 += v * y as f64;
        }
    }
    if m00 <= 0.0 {
        return None;
    }
    let (cx, cy) = (m10 / m00, m01 / m00);
    let (mut mu11, mut mu02) = (0.0, 0.0);
    for y in 0..h {
        let dy = y as f64 - cy;
        for x in 0..w {
            let v = img.get(y, x);
            mu11 += v * (x as f64 - cx) * dy;
            mu02 += v * dy * dy;
        }
    }
    Some(Moments { centroid_y: cy, mu11, mu02 })
}

/// Slant `mu11 / mu02` of the intensity distribution; 0 for blank or
/// vertically degenerate images.
pub fn skew(img: &GrayImage) -> f64 {
    match moments(img) {
        Some(m) if m.mu02 >= 1e-12 => m.mu11 / m.mu02,
        _ => 0.0,
    }
}

/// Removes slant with the horizontal shear `x' = x - skew * (y - cy)`.
/// Positive skew shears rows below the centroid left and rows above it right;
/// negative skew does the opposite. Pixels sheared in from outside are zero.
pub fn deskew(img: &GrayImage) -> GrayImage {
    let Some(m) = moments(img) else {
        return img.clone();
    };
    if m.mu02 < 1e-12 || m.mu11 == 0.0 {
        return img.clone();
    }
    let s = m.mu11 / m.mu02;
    let (h, w) = (img.height(), img.width());
    let mut out = alloc::vec![0.0; h * w];
    for y in 0..h {
        let offset = s * (y as f64 - m.centroid_y);
        for x in 0..w {
            // destination x' pulls from source x = x' + skew * (y - cy)
            let sx = x as f64 + offset;
            let x0 = libm::floor(sx);
            let t = sx - x0;
            let sample = |xi: f64| {
                if xi < 0.0 || xi > (w - 1) as f64 {
                    0.0
                } else {
                    img.get(y, xi as usize)
                }
            };
            out[y * w + x] = lerp(sample(x0), sample(x0 + 1.0), t);
        }
    }
    GrayImage::from_clamped(h, w, out)
}
