use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{FeatureMethod, FeatureVector};
use crate::imaging::GrayImage;
use crate::{Error, Result};

const L2HYS_CLIP: f64 = 0.2;
const NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogParams {
    /// Cell side in pixels.
    pub cell_side: usize,
    /// Block side in cells.
    pub block_side: usize,
    pub n_bins: usize,
    /// Block stride in cells.
    pub block_stride: usize,
    /// Orientations over 0..360 instead of 0..180.
    pub signed_gradients: bool,
}

impl Default for HogParams {
    fn default() -> Self {
        Self { cell_side: 4, block_side: 2, n_bins: 9, block_stride: 1, signed_gradients: false }
    }
}

/// Cell and block layout of a HOG descriptor for one image size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HogGeometry {
    pub cells_y: usize,
    pub cells_x: usize,
    pub blocks_y: usize,
    pub blocks_x: usize,
    pub params: HogParams,
}

impl HogGeometry {
    pub fn new(h: usize, w: usize, p: &HogParams) -> Result<Self> {
        if p.cell_side == 0 || p.block_side == 0 || p.block_stride == 0 {
            return Err(Error::Parameter("HOG cell, block and stride must be positive".into()));
        }
        if p.n_bins < 2 {
            return Err(Error::Parameter(alloc::format!("HOG needs >= 2 bins, got {}", p.n_bins)));
        }
        if !h.is_multiple_of(p.cell_side) || !w.is_multiple_of(p.cell_side) {
            return Err(Error::Parameter(alloc::format!(
                "cell side {} does not divide {h}x{w}",
                p.cell_side
            )));
        }
        let (cells_y, cells_x) = (h / p.cell_side, w / p.cell_side);
        if p.block_side > cells_y || p.block_side > cells_x {
            return Err(Error::Parameter(alloc::format!(
                "block of {} cells exceeds {cells_y}x{cells_x} cell grid",
                p.block_side
            )));
        }
        Ok(Self {
            cells_y,
            cells_x,
            blocks_y: (cells_y - p.block_side) / p.block_stride + 1,
            blocks_x: (cells_x - p.block_side) / p.block_stride + 1,
            params: *p,
        })
    }

    pub fn block_len(&self) -> usize {
        self.params.block_side * self.params.block_side * self.params.n_bins
    }

    pub fn descriptor_len(&self) -> usize {
        self.blocks_y * self.blocks_x * self.block_len()
    }
}

/// Magnitude-weighted orientation histograms, one per cell, laid out
/// `[cell_y][cell_x][bin]`. Bin `b` is centred on `b * range / n_bins`, so
/// bin 0 collects horizontal gradients (vertical edges).
pub fn hog_cell_histograms(img: &GrayImage, p: &HogParams) -> Result<(HogGeometry, Vec<f64>)> {
    let (h, w) = (img.height(), img.width());
    let geo = HogGeometry::new(h, w, p)?;
    let n_bins = p.n_bins;
    let range = if p.signed_gradients { 2.0 * PI } else { PI };
    let bin_width = range / n_bins as f64;
    let mut hist = alloc::vec![0.0; geo.cells_y * geo.cells_x * n_bins];

    for y in 0..h {
        let (up, down) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (left, right) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = img.get(y, right) - img.get(y, left);
            let gy = img.get(down, x) - img.get(up, x);
            let mag = libm::sqrt(gx * gx + gy * gy);
            if mag == 0.0 {
                continue;
            }
            let mut angle = libm::atan2(gy, gx);
            if angle < 0.0 {
                angle += range;
            }
            if angle >= range {
                angle -= range;
            }
            let pos = angle / bin_width;
            let lo = libm::floor(pos);
            let frac = pos - lo;
            let lo = (lo as usize) % n_bins;
            let hi = (lo + 1) % n_bins;
            let cell = ((y / p.cell_side) * geo.cells_x + x / p.cell_side) * n_bins;
            hist[cell + lo] += mag * (1.0 - frac);
            hist[cell + hi] += mag * frac;
        }
    }
    Ok((geo, hist))
}

fn l2_normalize(v: &mut [f64]) {
    let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>() + NORM_EPS * NORM_EPS);
    for x in v.iter_mut() {
        *x /= norm;
    }
}

/// Dense HOG descriptor: overlapping blocks of cell histograms, each block
/// L2-Hys normalized (normalize, clip at 0.2, renormalize).
pub fn hog(img: &GrayImage, p: &HogParams) -> Result<FeatureVector> {
    let (geo, hist) = hog_cell_histograms(img, p)?;
    let n_bins = p.n_bins;
    let mut values = Vec::with_capacity(geo.descriptor_len());
    let mut block = Vec::with_capacity(geo.block_len());
    for by in 0..geo.blocks_y {
        for bx in 0..geo.blocks_x {
            block.clear();
            for cy in by * p.block_stride..by * p.block_stride + p.block_side {
                for cx in bx * p.block_stride..bx * p.block_stride + p.block_side {
                    let start = (cy * geo.cells_x + cx) * n_bins;
                    block.extend_from_slice(&hist[start..start + n_bins]);
                }
            }
            l2_normalize(&mut block);
            for x in block.iter_mut() {
                *x = x.min(L2HYS_CLIP);
            }
            l2_normalize(&mut block);
            values.extend_from_slice(&block);
        }
    }
    Ok(FeatureVector { values, method: FeatureMethod::Hog })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_edge(side: usize) -> GrayImage {
        let px = (0..side * side).map(|i| if i % side >= side / 2 { 1.0 } else { 0.0 }).collect();
        GrayImage::new(side, side, px).unwrap()
    }

    #[test]
    fn default_dimension_is_1296() {
        let img = GrayImage::filled(28, 28, 0.3).unwrap();
        assert_eq!(hog(&img, &HogParams::default()).unwrap().dim(), 1296);
    }

    #[test]
    fn dimension_formula_holds_for_param_sets() {
        let img = GrayImage::filled(24, 24, 0.0).unwrap();
        for cell in [2, 3, 4, 6, 8] {
            for block in 1..=3 {
                for stride in 1..=2 {
                    for bins in [2, 6, 9] {
                        let p = HogParams { cell_side: cell, block_side: block, block_stride: stride, n_bins: bins, signed_gradients: false };
                        let cells = 24 / cell;
                        if block > cells {
                            assert!(hog(&img, &p).is_err());
                            continue;
                        }
                        let per_side = (cells - block) / stride + 1;
                        let expect = per_side * per_side * block * block * bins;
                        assert_eq!(hog(&img, &p).unwrap().dim(), expect, "{p:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_indivisible_geometry() {
        let img = GrayImage::filled(28, 28, 0.0).unwrap();
        let p = HogParams { cell_side: 5, ..Default::default() };
        assert!(matches!(hog(&img, &p), Err(Error::Parameter(_))));
        let p = HogParams { n_bins: 1, ..Default::default() };
        assert!(hog(&img, &p).is_err());
    }

    #[test]
    fn constant_image_gives_zero_descriptor() {
        let img = GrayImage::filled(28, 28, 0.7).unwrap();
        assert!(hog(&img, &HogParams::default()).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_edge_votes_match_bruteforce_oracle() {
        let img = step_edge(28);
        let p = HogParams::default();
        let (_, hist) = hog_cell_histograms(&img, &p).unwrap();

        // oracle: per-pixel replicate-border gradient, nearest bin centre by angle
        let mut votes = [0.0f64; 9];
        for y in 0..28usize {
            for x in 0..28usize {
                let at = |yy: isize, xx: isize| img.get(yy.clamp(0, 27) as usize, xx.clamp(0, 27) as usize);
                let gx = at(y as isize, x as isize + 1) - at(y as isize, x as isize - 1);
                let gy = at(y as isize + 1, x as isize) - at(y as isize - 1, x as isize);
                let mag = (gx * gx + gy * gy).sqrt();
                if mag > 0.0 {
                    let deg = gy.atan2(gx).to_degrees().rem_euclid(180.0);
                    let bin = ((deg / 20.0).round() as usize) % 9;
                    votes[bin] += mag;
                }
            }
        }
        let oracle_bin = (0..9).max_by(|&a, &b| votes[a].total_cmp(&votes[b])).unwrap();
        assert_eq!(oracle_bin, 0);

        let mut totals = [0.0f64; 9];
        for cell in hist.chunks_exact(9) {
            for (t, v) in totals.iter_mut().zip(cell) {
                *t += v;
            }
        }
        let got = (0..9).max_by(|&a, &b| totals[a].total_cmp(&totals[b])).unwrap();
        assert_eq!(got, oracle_bin);
        assert!((totals[0] - votes[0]).abs() < 1e-12);
    }

    #[test]
    fn blocks_are_bounded_by_unit_norm() {
        let px = (0..28 * 28).map(|i| ((i * 2654435761usize) % 1000) as f64 / 999.0).collect();
        let img = GrayImage::new(28, 28, px).unwrap();
        let v = hog(&img, &HogParams::default()).unwrap();
        for block in v.values.chunks_exact(36) {
            let n: f64 = block.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(n <= 1.0 + 1e-9);
            assert!(block.iter().all(|&x| (0.0..=1.0).contains(&x)));
        }
    }

    #[test]
    fn one_cell_shift_permutes_cell_histograms() {
        let side = 28;
        let dots = |dx: usize| {
            let mut px = vec![0.0; side * side];
            for &(y, x) in &[(9usize, 9usize), (10, 14), (15, 11), (13, 13)] {
                px[y * side + x + dx] = 1.0;
                px[(y + 1) * side + x + dx] = 0.5;
            }
            GrayImage::new(side, side, px).unwrap()
        };
        let p = HogParams::default();
        let (g, a) = hog_cell_histograms(&dots(0), &p).unwrap();
        let (_, b) = hog_cell_histograms(&dots(4), &p).unwrap();
        for cy in 0..g.cells_y {
            for cx in 0..g.cells_x - 1 {
                let src = (cy * g.cells_x + cx) * 9;
                let dst = (cy * g.cells_x + cx + 1) * 9;
                assert_eq!(a[src..src + 9], b[dst..dst + 9], "cell ({cy},{cx})");
            }
        }
    }

    #[test]
    fn signed_mode_separates_opposite_gradients() {
        let img = step_edge(28);
        let flipped = img.flip_horizontal();
        let p = HogParams { signed_gradients: true, n_bins: 8, ..Default::default() };
        let (_, a) = hog_cell_histograms(&img, &p).unwrap();
        let (_, b) = hog_cell_histograms(&flipped, &p).unwrap();
        let sum_bin = |h: &[f64], k: usize| h.chunks_exact(8).map(|c| c[k]).sum::<f64>();
        assert!(sum_bin(&a, 0) > 0.0 && sum_bin(&a, 4) == 0.0);
        assert!(sum_bin(&b, 4) > 0.0 && sum_bin(&b, 0) == 0.0);
    }
}
