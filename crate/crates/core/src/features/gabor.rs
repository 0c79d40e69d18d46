use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI};

use super::{FeatureMethod, FeatureVector};
use crate::imaging::{filter_correlate, GrayImage};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborParams {
    /// Cycles per pixel.
    pub frequency: f64,
    /// Radians.
    pub orientation: f64,
    /// Octaves.
    pub bandwidth: f64,
    /// Kernel half-width in envelope standard deviations.
    pub n_stds: f64,
}

impl Default for GaborParams {
    fn default() -> Self {
        Self { frequency: 0.9, orientation: 0.0, bandwidth: 1.0, n_stds: 3.0 }
    }
}

impl GaborParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::Parameter(alloc::format!("Gabor frequency must be > 0, got {}", self.frequency)));
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::Parameter(alloc::format!("Gabor bandwidth must be > 0, got {}", self.bandwidth)));
        }
        if !(self.n_stds > 0.0) || !self.orientation.is_finite() {
            return Err(Error::Parameter("Gabor n_stds must be > 0 and orientation finite".into()));
        }
        Ok(())
    }

    /// Envelope standard deviation implied by frequency and octave bandwidth.
    pub fn sigma(&self) -> f64 {
        let b = libm::exp2(self.bandwidth);
        (1.0 / (PI * self.frequency)) * libm::sqrt(LN_2 / 2.0) * (b + 1.0) / (b - 1.0)
    }
}

/// Complex kernel on a `(2r+1) x (2r+1)` grid; entry `(y, x)` lives at
/// `(y + r) * side + (x + r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    pub radius: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl GaborKernel {
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// `(re, im)` at signed offset `(y, x)` from the centre.
    pub fn at(&self, y: isize, x: isize) -> (f64, f64) {
        let r = self.radius as isize;
        let i = ((y + r) as usize) * self.side() + (x + r) as usize;
        (self.re[i], self.im[i])
    }
}

/// Unnormalized kernel `exp(-(x'^2 + y'^2) / 2 sigma^2) * exp(i 2 pi f x')`
/// with `(x', y')` rotated by the orientation.
pub fn gabor_kernel(p: &GaborParams) -> Result<GaborKernel> {
    p.validate()?;
    let sigma = p.sigma();
    let radius = libm::ceil(p.n_stds * sigma) as usize;
    let (st, ct) = (libm::sin(p.orientation), libm::cos(p.orientation));
    let r = radius as isize;
    let n = (2 * radius + 1) * (2 * radius + 1);
    let (mut re, mut im) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for y in -r..=r {
        for x in -r..=r {
            let (xf, yf) = (x as f64, y as f64);
            let xr = xf * ct + yf * st;
            let yr = -xf * st + yf * ct;
            let env = libm::exp(-(xr * xr + yr * yr) / (2.0 * sigma * sigma));
            let phase = 2.0 * PI * p.frequency * xr;
            re.push(env * libm::cos(phase));
            im.push(env * libm::sin(phase));
        }
    }
    Ok(GaborKernel { radius, re, im })
}

/// Real-part filter response, same size as the image, reflect padding.
/// The real kernel is point-symmetric so correlation equals convolution.
pub fn gabor_response(img: &GrayImage, p: &GaborParams) -> Result<Vec<f64>> {
    gabor_response_plane(img.pixels(), img.height(), img.width(), p)
}

/// [`gabor_response`] on an arbitrary real `h x w` plane (no range check).
pub fn gabor_response_plane(plane: &[f64], h: usize, w: usize, p: &GaborParams) -> Result<Vec<f64>> {
    if h == 0 || w == 0 || plane.len() != h * w {
        return Err(Error::Dimension(alloc::format!("{} values for a {h}x{w} plane", plane.len())));
    }
    let k = gabor_kernel(p)?;
    let side = k.side();
    Ok(filter_correlate(plane, h, w, &k.re, side, side))
}

pub fn gabor(img: &GrayImage, p: &GaborParams) -> Result<FeatureVector> {
    Ok(FeatureVector { values: gabor_response(img, p)?, method: FeatureMethod::Gabor })
}
