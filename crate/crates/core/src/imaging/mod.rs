//! Grayscale image type and the preprocessing chain applied to every digit:
//! resize to a square canvas, Gaussian denoise, then moment-based deskew.

mod filter;
mod geometry;

use alloc::vec::Vec;

use crate::{Error, Result};

pub use filter::{gaussian_blur, gaussian_kernel_1d, reflect_index};
pub(crate) use filter::correlate_reflect as filter_correlate;
pub use geometry::{deskew, resize_bilinear, skew, to_grayscale};

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Validates dimensions and the `[0, 1]` intensity range.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(alloc::format!("empty image {height}x{width}")));
        }
        if pixels.len() != height * width {
            return Err(Error::Dimension(alloc::format!(
                "{} pixels do not fill {height}x{width}",
                pixels.len()
            )));
        }
        if let Some((i, v)) = pixels.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Parameter(alloc::format!(
                "pixel {i} has intensity {v} outside [0, 1]"
            )));
        }
        Ok(Self { height, width, pixels })
    }

    /// Like [`GrayImage::new`] but clamps out-of-range values instead of failing.
    pub(crate) fn from_clamped(height: usize, width: usize, mut pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), height * width);
        for p in &mut pixels {
            *p = p.clamp(0.0, 1.0);
        }
        Self { height, width, pixels }
    }

    /// Converts 8-bit samples by dividing by 255.
    pub fn from_u8(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(height, width, bytes.iter().map(|&b| f64::from(b) / 255.0).collect())
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, alloc::vec![value; height * width])
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// Mirror left-right.
    pub fn flip_horizontal(&self) -> Self {
        let mut out = Vec::with_capacity(self.pixels.len());
        for r in 0..self.height {
            out.extend(self.pixels[r * self.width..(r + 1) * self.width].iter().rev());
        }
        Self { height: self.height, width: self.width, pixels: out }
    }

    /// Mirror top-bottom.
    pub fn flip_vertical(&self) -> Self {
        let mut out = Vec::with_capacity(self.pixels.len());
        for r in (0..self.height).rev() {
            out.extend_from_slice(&self.pixels[r * self.width..(r + 1) * self.width]);
        }
        Self { height: self.height, width: self.width, pixels: out }
    }

    /// Quantizes to 8 bits, rounding to nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| libm::round(p * 255.0) as u8).collect()
    }
}

/// Preprocessing settings shared by every image of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    pub target_side: usize,
    pub gaussian_sigma: f64,
    pub deskew_enabled: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { target_side: 28, gaussian_sigma: 0.8, deskew_enabled: true }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_side < 8 {
            return Err(Error::Parameter(alloc::format!(
                "target_side must be >= 8, got {}",
                self.target_side
            )));
        }
        if !(self.gaussian_sigma > 0.0) || !self.gaussian_sigma.is_finite() {
            return Err(Error::Parameter(alloc::format!(
                "gaussian_sigma must be > 0, got {}",
                self.gaussian_sigma
            )));
        }
        Ok(())
    }
}

/// resize → blur → deskew (when enabled). The order is fixed.
pub fn preprocess(img: &GrayImage, cfg: &PreprocessConfig) -> Result<GrayImage> {
    cfg.validate()?;
    let resized = resize_bilinear(img, cfg.target_side, cfg.target_side)?;
    let blurred = gaussian_blur(&resized, cfg.gaussian_sigma)?;
    Ok(if cfg.deskew_enabled { deskew(&blurred) } else { blurred })
}
