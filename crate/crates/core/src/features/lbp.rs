use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureMethod, FeatureVector};
use crate::imaging::GrayImage;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LbpMode {
    /// Code image flattened and scaled by `1 / (2^P - 1)`.
    FlatImage,
    /// Normalized `2^P`-bin histogram of the codes of interior pixels.
    Histogram,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbpParams {
    pub neighbors: usize,
    pub radius: f64,
    pub mode: LbpMode,
}

impl Default for LbpParams {
    fn default() -> Self {
        Self { neighbors: 10, radius: 3.0, mode: LbpMode::FlatImage }
    }
}

impl LbpParams {
    pub fn validate(&self, h: usize, w: usize) -> Result<()> {
        if !(1..=24).contains(&self.neighbors) {
            return Err(Error::Parameter(alloc::format!(
                "LBP neighbors must be in 1..=24, got {}",
                self.neighbors
            )));
        }
        if !(self.radius >= 1.0) || !self.radius.is_finite() {
            return Err(Error::Parameter(alloc::format!("LBP radius must be >= 1, got {}", self.radius)));
        }
        if 2.0 * self.radius >= h.min(w) as f64 {
            return Err(Error::Parameter(alloc::format!(
                "LBP radius {} too large for {h}x{w} image",
                self.radius
            )));
        }
        Ok(())
    }

    /// `(dy, dx)` of each circle sample, rounded to 5 decimals so points that
    /// should sit on the pixel grid do so exactly.
    fn offsets(&self) -> Vec<(f64, f64)> {
        let round5 = |v: f64| libm::round(v * 1e5) / 1e5;
        (0..self.neighbors)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / self.neighbors as f64;
                (round5(-self.radius * libm::sin(a)), round5(self.radius * libm::cos(a)))
            })
            .collect()
    }
}

#[inline]
fn bilinear(img: &GrayImage, y: f64, x: f64) -> f64 {
    let (y0, x0) = (libm::floor(y), libm::floor(x));
    let (ty, tx) = (y - y0, x - x0);
    let (y0, x0) = (y0 as usize, x0 as usize);
    let y1 = (y0 + 1).min(img.height() - 1);
    let x1 = (x0 + 1).min(img.width() - 1);
    let top = img.get(y0, x0) + tx * (img.get(y0, x1) - img.get(y0, x0));
    let bottom = img.get(y1, x0) + tx * (img.get(y1, x1) - img.get(y1, x0));
    top + ty * (bottom - top)
}

/// Per-pixel rotation-variant LBP codes, `None` where the sampling circle
/// leaves the image.
fn codes_with_mask(img: &GrayImage, p: &LbpParams) -> Result<Vec<Option<u32>>> {
    let (h, w) = (img.height(), img.width());
    p.validate(h, w)?;
    let offsets = p.offsets();
    let (ymax, xmax) = ((h - 1) as f64, (w - 1) as f64);
    let mut out = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let inside = offsets.iter().all(|&(dy, dx)| {
                let (y, x) = (r as f64 + dy, c as f64 + dx);
                (0.0..=ymax).contains(&y) && (0.0..=xmax).contains(&x)
            });
            if !inside {
                out.push(None);
                continue;
            }
            let centre = img.get(r, c);
            let code = offsets.iter().enumerate().fold(0u32, |acc, (k, &(dy, dx))| {
                let s = bilinear(img, r as f64 + dy, c as f64 + dx);
                if s >= centre {
                    acc | (1 << k)
                } else {
                    acc
                }
            });
            out.push(Some(code));
        }
    }
    Ok(out)
}

/// Code image: bit `k` is set when the `k`-th circle sample is `>=` the centre.
/// Border pixels whose circle leaves the image get code 0.
pub fn lbp_codes(img: &GrayImage, p: &LbpParams) -> Result<Vec<u32>> {
    Ok(codes_with_mask(img, p)?.into_iter().map(|c| c.unwrap_or(0)).collect())
}

pub fn lbp(img: &GrayImage, p: &LbpParams) -> Result<FeatureVector> {
    let values = match p.mode {
        LbpMode::FlatImage => {
            let scale = ((1u64 << p.neighbors) - 1) as f64;
            lbp_codes(img, p)?.into_iter().map(|c| c as f64 / scale).collect()
        }
        LbpMode::Histogram => {
            let codes = codes_with_mask(img, p)?;
            let mut hist = alloc::vec![0.0; 1 << p.neighbors];
            let mut n = 0usize;
            for c in codes.into_iter().flatten() {
                hist[c as usize] += 1.0;
                n += 1;
            }
            if n > 0 {
                for v in &mut hist {
                    *v /= n as f64;
                }
            }
            hist
        }
    };
    Ok(FeatureVector { values, method: FeatureMethod::Lbp })
}
