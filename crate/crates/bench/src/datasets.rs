//! MNIST-style CSV ingestion and batch preprocessing / extraction.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use handcraft_core::dataset::{LabeledDataset, Source};
use handcraft_core::features::{extract, FeatureParams};
use handcraft_core::imaging::{preprocess, GrayImage, PreprocessConfig};
use handcraft_core::Matrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

/// Highest accepted class label.
pub const MAX_LABEL: usize = 9;

/// Where the label sits in each CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schema {
    #[default]
    LabelFirst,
    LabelLast,
}

impl Schema {
    pub fn name(self) -> &'static str {
        match self {
            Schema::LabelFirst => "label_first",
            Schema::LabelLast => "label_last",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "label_first" => Ok(Schema::LabelFirst),
            "label_last" => Ok(Schema::LabelLast),
            other => Err(format!("unknown schema `{other}` (expected label_first or label_last)")),
        }
    }
}

/// Decoded images with their labels, before any feature extraction.
#[derive(Debug, Clone)]
pub struct ImageSet {
    pub images: Vec<GrayImage>,
    pub labels: Vec<usize>,
    pub source: Source,
}

impl ImageSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a CSV of `side * side` pixels plus one label per row.
///
/// Pixels may be 8-bit (0..=255) or already in [0, 1]; a file whose largest
/// pixel exceeds 1 is treated as 8-bit and divided by 255. A first row with
/// any non-numeric field is skipped as a header. Row `i` of the file becomes
/// sample `i`.
pub fn load_csv(path: &Path, schema: Schema, side: usize) -> Result<ImageSet> {
    let bytes = std::fs::read(path).map_err(|e| BenchError::io(path, e))?;
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let source = Source { name, digest: sha256_hex(&bytes) };
    parse_csv(&bytes, path, schema, side, source)
}

pub(crate) fn parse_csv(bytes: &[u8], path: &Path, schema: Schema, side: usize, source: Source) -> Result<ImageSet> {
    let err = |line: u64, msg: String| BenchError::Parse { path: path.to_path_buf(), line, msg };
    if side == 0 {
        return Err(err(0, "image side must be at least 1".into()));
    }
    let n_pixels = side * side;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(bytes);

    let mut pixels: Vec<f64> = Vec::new();
    let mut labels = Vec::new();
    let mut max_pixel = 0.0f64;
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(err(line, e.to_string()));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if std::mem::take(&mut first) && record.iter().any(|f| f.trim().parse::<f64>().is_err()) {
            continue;
        }
        if record.len() != n_pixels + 1 {
            return Err(err(line, format!("expected {} fields, found {}", n_pixels + 1, record.len())));
        }
        let (label_at, pixel_range) = match schema {
            Schema::LabelFirst => (0, 1..=n_pixels),
            Schema::LabelLast => (n_pixels, 0..=n_pixels - 1),
        };
        let label_text = record[label_at].trim();
        let label = label_text
            .parse::<f64>()
            .ok()
            .filter(|v| v.fract() == 0.0 && (0.0..=MAX_LABEL as f64).contains(v))
            .ok_or_else(|| err(line, format!("label `{label_text}` is not an integer in 0..={MAX_LABEL}")))?;
        labels.push(label as usize);
        for col in pixel_range {
            let text = record[col].trim();
            let v: f64 = text
                .parse()
                .map_err(|_| err(line, format!("field {} (`{text}`) is not numeric", col + 1)))?;
            if !(0.0..=255.0).contains(&v) {
                return Err(err(line, format!("field {} value {v} outside [0, 255]", col + 1)));
            }
            max_pixel = max_pixel.max(v);
            pixels.push(v);
        }
    }
    if labels.is_empty() {
        return Err(err(0, "no data rows".into()));
    }
    if max_pixel > 1.0 {
        pixels.iter_mut().for_each(|v| *v /= 255.0);
    }
    let images = pixels
        .chunks_exact(n_pixels)
        .map(|p| GrayImage::new(side, side, p.to_vec()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ImageSet { images, labels, source })
}

/// Runs [`preprocess`] on every image in parallel. Output order matches input
/// order; the first failing image (by index) is reported.
pub fn preprocess_all(images: &[GrayImage], cfg: &PreprocessConfig) -> Result<Vec<GrayImage>> {
    cfg.validate()?;
    let out: Vec<_> = images.par_iter().map(|img| preprocess(img, cfg)).collect();
    out.into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|source| BenchError::Image { index, source }))
        .collect()
}

/// Extracts one feature vector per image into a row-major matrix.
pub fn extract_all(images: &[GrayImage], params: &FeatureParams) -> Result<Matrix> {
    let Some(first) = images.first() else {
        return Ok(Matrix::zeros(0, 0));
    };
    let dim = params.output_dim(first.height(), first.width())?;
    let method = params.method();
    let rows: Vec<_> = images.par_iter().map(|img| extract(img, method, params)).collect();
    let mut data = Vec::with_capacity(images.len() * dim);
    for (index, r) in rows.into_iter().enumerate() {
        let v = r.map_err(|source| BenchError::Image { index, source })?;
        if v.dim() != dim {
            return Err(BenchError::Image {
                index,
                source: handcraft_core::Error::Shape { expected: dim, got: v.dim() },
            });
        }
        data.extend_from_slice(&v.values);
    }
    Ok(Matrix::from_vec(images.len(), dim, data)?)
}

/// Preprocessed images turned into a labelled feature matrix.
pub fn featurize(images: &[GrayImage], labels: &[usize], source: &Source, params: &FeatureParams) -> Result<LabeledDataset> {
    let features = extract_all(images, params)?;
    Ok(LabeledDataset::new(features, labels.to_vec())?
        .with_source(source.clone())
        .with_method(params.method()))
}
