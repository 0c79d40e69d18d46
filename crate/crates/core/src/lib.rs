//! Handcrafted-feature digit recognition primitives.
//!
//! Everything in this crate is a pure function of its inputs and only needs
//! `alloc`: image preprocessing ([`imaging`]), the HOG/LBP/Gabor descriptors
//! ([`features`]), four classifiers behind one fit/predict contract
//! ([`classify`]), confusion-matrix metrics ([`metrics`]) and seeded
//! stratified splitting ([`dataset`]). File formats, the CLI and any
//! threading live in the `handcraft-bench` companion crate.
#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod classify;
pub mod dataset;
mod error;
pub mod features;
pub mod imaging;
mod matrix;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::Matrix;
