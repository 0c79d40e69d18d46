//! Handcrafted descriptors mapping a preprocessed [`GrayImage`] to a
//! fixed-length [`FeatureVector`].

mod gabor;
mod hog;
mod lbp;

use alloc::vec::Vec;
use core::fmt;

use crate::imaging::GrayImage;
use crate::{Error, Result};

pub use gabor::{gabor, gabor_kernel, gabor_response, gabor_response_plane, GaborKernel, GaborParams};
pub use hog::{hog, hog_cell_histograms, HogGeometry, HogParams};
pub use lbp::{lbp, lbp_codes, LbpMode, LbpParams};

/// Which extractor produced a vector. `Raw` is the flattened image itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureMethod {
    Hog,
    Lbp,
    Gabor,
    Raw,
}

impl FeatureMethod {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMethod::Hog => "HOG",
            FeatureMethod::Lbp => "LBP",
            FeatureMethod::Gabor => "Gabor",
            FeatureMethod::Raw => "Raw",
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for FeatureMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hog" => Ok(FeatureMethod::Hog),
            "lbp" => Ok(FeatureMethod::Lbp),
            "gabor" => Ok(FeatureMethod::Gabor),
            "raw" => Ok(FeatureMethod::Raw),
            other => Err(Error::Parameter(alloc::format!("unknown feature method `{other}`"))),
        }
    }
}

/// Parameters for one extractor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureParams {
    Hog(HogParams),
    Lbp(LbpParams),
    Gabor(GaborParams),
    Raw,
}

impl FeatureParams {
    pub fn method(&self) -> FeatureMethod {
        match self {
            FeatureParams::Hog(_) => FeatureMethod::Hog,
            FeatureParams::Lbp(_) => FeatureMethod::Lbp,
            FeatureParams::Gabor(_) => FeatureMethod::Gabor,
            FeatureParams::Raw => FeatureMethod::Raw,
        }
    }

    /// Default parameters for `method`.
    pub fn defaults(method: FeatureMethod) -> Self {
        match method {
            FeatureMethod::Hog => FeatureParams::Hog(HogParams::default()),
            FeatureMethod::Lbp => FeatureParams::Lbp(LbpParams::default()),
            FeatureMethod::Gabor => FeatureParams::Gabor(GaborParams::default()),
            FeatureMethod::Raw => FeatureParams::Raw,
        }
    }

    /// Length of the vector this extractor yields for an `h x w` image.
    pub fn output_dim(&self, h: usize, w: usize) -> Result<usize> {
        match self {
            FeatureParams::Hog(p) => Ok(HogGeometry::new(h, w, p)?.descriptor_len()),
            FeatureParams::Lbp(p) => {
                p.validate(h, w)?;
                Ok(match p.mode {
                    LbpMode::FlatImage => h * w,
                    LbpMode::Histogram => 1 << p.neighbors,
                })
            }
            FeatureParams::Gabor(p) => {
                p.validate()?;
                Ok(h * w)
            }
            FeatureParams::Raw => Ok(h * w),
        }
    }
}

/// One image's descriptor, tagged with the extractor that made it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub method: FeatureMethod,
}

impl FeatureVector {
    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Runs the extractor named by `method` with `params`.
pub fn extract(img: &GrayImage, method: FeatureMethod, params: &FeatureParams) -> Result<FeatureVector> {
    if params.method() != method {
        return Err(Error::Parameter(alloc::format!(
            "{method} requested with {} parameters",
            params.method()
        )));
    }
    match params {
        FeatureParams::Hog(p) => hog(img, p),
        FeatureParams::Lbp(p) => lbp(img, p),
        FeatureParams::Gabor(p) => gabor(img, p),
        FeatureParams::Raw => Ok(FeatureVector { values: img.pixels().to_vec(), method }),
    }
}
