use alloc::vec::Vec;

use super::GrayImage;
use crate::{Error, Result};

/// Maps any integer coordinate onto `0..n` by mirror reflection that repeats
/// the edge sample (`b a | a b c d | d c`). Works for offsets larger than `n`.
#[inline]
pub fn reflect_index(i: isize, n: usize) -> usize {
    debug_assert!(n > 0);
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Normalized 1-D Gaussian taps of radius `ceil(3 sigma)`, centre at index `radius`.
pub fn gaussian_kernel_1d(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(alloc::format!("sigma must be > 0, got {sigma}")));
    }
    let radius = libm::ceil(3.0 * sigma) as isize;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> =
        (-radius..=radius).map(|x| libm::exp(-((x * x) as f64) / denom)).collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    Ok(taps)
}

/// Separable Gaussian smoothing with reflect padding.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    let taps = gaussian_kernel_1d(sigma)?;
    let (h, w) = (img.height(), img.width());
    let r = (taps.len() / 2) as isize;
    let src = img.pixels();

    let mut horiz = alloc::vec![0.0; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, t) in taps.iter().enumerate() {
                acc += t * row[reflect_index(x as isize + k as isize - r, w)];
            }
            horiz[y * w + x] = acc;
        }
    }

    let mut out = alloc::vec![0.0; h * w];
    for y in 0..h {
        for (k, t) in taps.iter().enumerate() {
            let sy = reflect_index(y as isize + k as isize - r, h);
            let src_row = &horiz[sy * w..(sy + 1) * w];
            for (o, s) in out[y * w..(y + 1) * w].iter_mut().zip(src_row) {
                *o += t * s;
            }
        }
    }
    Ok(GrayImage::from_clamped(h, w, out))
}

/// Dense 2-D correlation of an `h x w` plane with a `kh x kw` kernel centred
/// at `(kh/2, kw/2)`, reflect padding. Output is unclamped.
pub(crate) fn correlate_reflect(
    plane: &[f64],
    h: usize,
    w: usize,
    kernel: &[f64],
    kh: usize,
    kw: usize,
) -> Vec<f64> {
    let (ry, rx) = ((kh / 2) as isize, (kw / 2) as isize);
    let mut out = alloc::vec![0.0; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for ky in 0..kh {
                let sy = reflect_index(y as isize + ky as isize - ry, h);
                let src_row = &plane[sy * w..(sy + 1) * w];
                let krow = &kernel[ky * kw..(ky + 1) * kw];
                for (kx, kv) in krow.iter().enumerate() {
                    acc += kv * src_row[reflect_index(x as isize + kx as isize - rx, w)];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}
