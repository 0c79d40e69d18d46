//! On-disk cache of extracted feature matrices.
//!
//! ```text
//! "HCFEAT\0\0"  u32 version  u32 key_len  key (UTF-8)
//! u64 rows  u64 cols  u64 labels[rows]  f64 data[rows*cols]   (little-endian)
//! ```
//!
//! The key spells out the dataset digest, preprocessing settings and
//! extractor parameters; a file whose key differs is ignored.

use std::path::{Path, PathBuf};

use handcraft_core::dataset::{LabeledDataset, Source};
use handcraft_core::features::{FeatureParams, LbpMode};
use handcraft_core::imaging::PreprocessConfig;

use crate::binio::{Reader, Writer};
use crate::datasets::sha256_hex;
use crate::error::{BenchError, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"HCFEAT\0\0";
pub const CACHE_VERSION: u32 = 1;

/// Canonical description of everything that determines a feature matrix.
pub fn cache_key(digest: &str, pre: &PreprocessConfig, params: &FeatureParams) -> String {
    let feature = match params {
        FeatureParams::Hog(p) => format!(
            "hog:cell={},block={},bins={},stride={},signed={}",
            p.cell_side, p.block_side, p.n_bins, p.block_stride, p.signed_gradients
        ),
        FeatureParams::Lbp(p) => format!(
            "lbp:p={},r={:?},mode={}",
            p.neighbors,
            p.radius,
            match p.mode {
                LbpMode::FlatImage => "flat_image",
                LbpMode::Histogram => "histogram",
            }
        ),
        FeatureParams::Gabor(p) => format!(
            "gabor:f={:?},theta={:?},b={:?},nstds={:?}",
            p.frequency, p.orientation, p.bandwidth, p.n_stds
        ),
        FeatureParams::Raw => "raw".to_string(),
    };
    format!(
        "digest={digest};side={};sigma={:?};deskew={};{feature}",
        pre.target_side, pre.gaussian_sigma, pre.deskew_enabled
    )
}

/// File name for `key` inside a cache directory.
pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{}.hcf", &sha256_hex(key.as_bytes())[..24]))
}

pub fn encode(key: &str, ds: &LabeledDataset) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(CACHE_MAGIC);
    w.u32(CACHE_VERSION);
    w.str(key);
    w.matrix_header(&ds.features);
    ds.labels.iter().for_each(|&l| w.len(l));
    ds.features.as_slice().iter().for_each(|&v| w.f64(v));
    w.buf
}

/// Decodes a cache file; returns `Ok(None)` when it belongs to another key.
pub fn decode(bytes: &[u8], key: &str, source: &Source, params: &FeatureParams) -> Result<Option<LabeledDataset>> {
    let mut r = Reader::new(bytes, "feature cache");
    r.magic(CACHE_MAGIC)?;
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return r.fail(format!("unsupported version {version}"));
    }
    if r.str()? != key {
        return Ok(None);
    }
    let rows = r.len(8)?;
    let cols = r.u64()? as usize;
    let labels = (0..rows).map(|_| r.u64().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let features = r.matrix_body(rows, cols)?;
    r.finish()?;
    Ok(Some(LabeledDataset::new(features, labels)?.with_source(source.clone()).with_method(params.method())))
}

pub fn store(dir: &Path, key: &str, ds: &LabeledDataset) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let path = cache_path(dir, key);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, encode(key, ds)).map_err(|e| BenchError::io(&tmp, e))?;
    std::fs::rename(&tmp, &path).map_err(|e| BenchError::io(&path, e))?;
    Ok(path)
}

/// Loads the cached matrix for `key`, or `None` if absent or stale.
pub fn fetch(dir: &Path, key: &str, source: &Source, params: &FeatureParams) -> Result<Option<LabeledDataset>> {
    let path = cache_path(dir, key);
    match std::fs::read(&path) {
        Ok(bytes) => decode(&bytes, key, source, params),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(BenchError::io(path, e)),
    }
}
