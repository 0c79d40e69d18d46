//! The dataset x feature x classifier benchmark grid.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use handcraft_core::classify::{
    self, default_svm_grid, forest, grid_search, ClassifierKind, ForestModel, Prediction, TrainConfig, TrainedModel,
};
use handcraft_core::dataset::{split, split_indices, LabeledDataset, Source, SplitSpec};
use handcraft_core::features::{FeatureMethod, FeatureParams};
use handcraft_core::imaging::GrayImage;
use handcraft_core::metrics::{confusion, report, EvaluationReport, ReportMeta};
use handcraft_core::Matrix;
use rayon::prelude::*;

use crate::cache;
use crate::config::{DatasetSpec, RunConfig};
use crate::datasets::{featurize, load_csv, preprocess_all, sha256_hex, ImageSet};
use crate::error::{BenchError, Result};
use crate::model_io;

/// Wall-clock time spent in one shared stage (load, preprocess, extract).
#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub dataset: String,
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub report: EvaluationReport,
    pub n_train: usize,
    pub n_test: usize,
    pub dim: usize,
    /// Hyperparameters picked by tuning, when tuning ran.
    pub tuned: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub dataset: String,
    pub feature: FeatureMethod,
    pub classifier: ClassifierKind,
    /// `Err` holds the failure cause.
    pub outcome: std::result::Result<CellMetrics, String>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

impl CellResult {
    pub fn accuracy(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.report.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
    pub stages: Vec<StageTiming>,
    pub config_echo: String,
    pub split_seed: u64,
}

impl GridResult {
    pub fn all_succeeded(&self) -> bool {
        self.cells.iter().all(|c| c.outcome.is_ok())
    }
}

/// Preprocessed images with a fixed train/test partition.
pub struct PreparedData {
    pub images: Vec<GrayImage>,
    pub labels: Vec<usize>,
    pub source: Source,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Loads, partitions and preprocesses one dataset.
pub fn prepare(spec: &DatasetSpec, cfg: &RunConfig, stages: &mut Vec<StageTiming>) -> Result<PreparedData> {
    let mut timed = |stage: &str, t: Instant| {
        stages.push(StageTiming { dataset: spec.name.clone(), stage: stage.into(), seconds: t.elapsed().as_secs_f64() })
    };
    let t = Instant::now();
    let mut set = load_csv(&spec.path, spec.schema, spec.side)?;
    let (train, test) = match &spec.test_path {
        Some(path) => {
            let held_out = load_csv(path, spec.schema, spec.side)?;
            let n = set.len();
            let digest = sha256_hex(format!("{}+{}", set.source.digest, held_out.source.digest).as_bytes());
            set = ImageSet {
                images: set.images.into_iter().chain(held_out.images).collect(),
                labels: set.labels.into_iter().chain(held_out.labels).collect(),
                source: Source { name: set.source.name, digest },
            };
            ((0..n).collect(), (n..set.len()).collect())
        }
        None => split_indices(&set.labels, &cfg.split)?,
    };
    timed("load", t);

    let t = Instant::now();
    let images = preprocess_all(&set.images, &cfg.preprocess)?;
    timed("preprocess", t);
    Ok(PreparedData { images, labels: set.labels, source: Source { name: spec.name.clone(), ..set.source }, train, test })
}

/// Feature matrix for every prepared image, read from or written to the cache
/// directory when one is configured.
pub fn features_for(data: &PreparedData, params: &FeatureParams, cfg: &RunConfig) -> Result<LabeledDataset> {
    let Some(dir) = &cfg.cache_dir else {
        return featurize(&data.images, &data.labels, &data.source, params);
    };
    let key = cache::cache_key(&data.source.digest, &cfg.preprocess, params);
    if let Some(ds) = cache::fetch(dir, &key, &data.source, params)? {
        if ds.labels == data.labels {
            return Ok(ds);
        }
    }
    let ds = featurize(&data.images, &data.labels, &data.source, params)?;
    cache::store(dir, &key, &ds)?;
    Ok(ds)
}

/// Predictions for `queries`, computed in parallel row blocks.
pub fn predict_parallel(model: &TrainedModel, queries: &Matrix) -> Result<Vec<Prediction>> {
    const BLOCK: usize = 32;
    let idx: Vec<usize> = (0..queries.rows()).collect();
    let blocks: Vec<_> = idx.par_chunks(BLOCK).map(|rows| model.predict(&queries.select_rows(rows))).collect();
    let mut out = Vec::with_capacity(queries.rows());
    for b in blocks {
        out.extend(b?);
    }
    Ok(out)
}

/// Fits `cfg`, growing forest trees in parallel. Same result as
/// [`classify::fit`].
pub fn fit_parallel(train: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainedModel> {
    match cfg {
        TrainConfig::Rf(rf) => {
            rf.validate()?;
            let trees = (0..rf.n_trees)
                .into_par_iter()
                .map(|t| forest::fit_tree(train, rf, t))
                .collect::<handcraft_core::Result<Vec<_>>>()?;
            Ok(TrainedModel::Rf(ForestModel::from_trees(train.n_classes(), train.dim(), trees)?))
        }
        _ => Ok(classify::fit(train, cfg)?),
    }
}

/// Chooses SVM `C` and `gamma` by validation accuracy on a stratified split
/// of `train`, then refits on all of `train`.
fn tune_svm(train: &LabeledDataset, cfg: &TrainConfig, seed: u64) -> Result<(TrainedModel, String)> {
    let TrainConfig::Svm(base) = cfg else {
        return Ok((fit_parallel(train, cfg)?, String::new()));
    };
    let spec = SplitSpec { train_fraction: 0.8, seed, stratified: true };
    let (inner, valid) = split(train, &spec)?;
    let grid = default_svm_grid(*base);
    let search = grid_search(&inner, &valid, &grid)?;
    let label = match search.best {
        TrainConfig::Svm(c) => format!("C={} gamma={:?}", c.c, c.gamma),
        _ => unreachable!("svm grid holds svm configs"),
    };
    Ok((fit_parallel(train, &search.best)?, label))
}

struct CellJob<'a> {
    data: &'a PreparedData,
    features: &'a std::result::Result<LabeledDataset, String>,
    method: FeatureMethod,
    classifier: &'a TrainConfig,
    n_classes: usize,
}

fn run_cell(job: &CellJob<'_>, cfg: &RunConfig) -> CellResult {
    let mut fit_seconds = 0.0;
    let mut predict_seconds = 0.0;
    let mut body = || -> std::result::Result<CellMetrics, String> {
        let ds = job.features.as_ref().map_err(Clone::clone)?;
        let train = ds.subset(&job.data.train);
        let test = ds.subset(&job.data.test);
        let t = Instant::now();
        let (model, tuned) = if cfg.svm_tune && job.classifier.kind() == ClassifierKind::Svm {
            let (m, label) = tune_svm(&train, job.classifier, cfg.split.seed).map_err(|e| e.to_string())?;
            (m, Some(label))
        } else {
            (fit_parallel(&train, job.classifier).map_err(|e| e.to_string())?, None)
        };
        fit_seconds = t.elapsed().as_secs_f64();
        if cfg.save_models {
            let dir = cfg.out.join("models");
            std::fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e).to_string())?;
            let name = format!(
                "{}_{}_{}.hcm",
                job.data.source.name,
                job.method.name().to_ascii_lowercase(),
                job.classifier.kind().name().to_ascii_lowercase()
            );
            model_io::save(&dir.join(name), &model).map_err(|e| e.to_string())?;
        }
        let t = Instant::now();
        let pred = predict_parallel(&model, &test.features).map_err(|e| e.to_string())?;
        predict_seconds = t.elapsed().as_secs_f64();
        let labels: Vec<usize> = pred.iter().map(|p| p.label).collect();
        let cm = confusion(&test.labels, &labels, job.n_classes).map_err(|e| e.to_string())?;
        let mut rep = report(&cm).map_err(|e| e.to_string())?;
        rep.meta = ReportMeta {
            dataset: job.data.source.name.clone(),
            feature: job.method.name().into(),
            classifier: job.classifier.kind().name().into(),
            split_seed: cfg.split.seed,
        };
        Ok(CellMetrics { report: rep, n_train: train.len(), n_test: test.len(), dim: ds.dim(), tuned })
    };
    let outcome = match catch_unwind(AssertUnwindSafe(&mut body)) {
        Ok(r) => r,
        Err(panic) => Err(panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .map_or_else(|| "panicked".to_string(), |m| format!("panicked: {m}"))),
    };
    CellResult {
        dataset: job.data.source.name.clone(),
        feature: job.method,
        classifier: job.classifier.kind(),
        outcome,
        fit_seconds,
        predict_seconds,
    }
}

fn failed_cells(spec: &DatasetSpec, cfg: &RunConfig, cause: &str) -> Vec<CellResult> {
    let mut cells = Vec::new();
    for f in cfg.grid_features() {
        for c in &cfg.classifiers {
            cells.push(CellResult {
                dataset: spec.name.clone(),
                feature: f.method(),
                classifier: c.kind(),
                outcome: Err(cause.to_string()),
                fit_seconds: 0.0,
                predict_seconds: 0.0,
            });
        }
    }
    cells
}

/// Runs every cell of the grid on a pool of `cfg.effective_jobs()` threads.
///
/// A failing dataset, extractor or classifier marks the affected cells as
/// failed; the rest of the grid still runs. Results do not depend on the
/// number of threads.
pub fn run_grid(cfg: &RunConfig) -> Result<GridResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.effective_jobs())
        .build()
        .map_err(|e| BenchError::Config { line: 0, msg: format!("thread pool: {e}") })?;
    pool.install(|| run_grid_in_pool(cfg))
}

fn run_grid_in_pool(cfg: &RunConfig) -> Result<GridResult> {
    let mut cells = Vec::new();
    let mut stages = Vec::new();
    let features = cfg.grid_features();
    for spec in &cfg.datasets {
        let data = match prepare(spec, cfg, &mut stages) {
            Ok(d) => d,
            Err(e) => {
                cells.extend(failed_cells(spec, cfg, &e.to_string()));
                continue;
            }
        };
        let n_classes = data.labels.iter().max().map_or(0, |m| m + 1);
        let extracted: Vec<_> = features
            .iter()
            .map(|params| {
                let t = Instant::now();
                let r = features_for(&data, params, cfg).map_err(|e| e.to_string());
                stages.push(StageTiming {
                    dataset: spec.name.clone(),
                    stage: format!("extract {}", params.method()),
                    seconds: t.elapsed().as_secs_f64(),
                });
                r
            })
            .collect();
        let jobs: Vec<CellJob<'_>> = features
            .iter()
            .zip(&extracted)
            .flat_map(|(params, ds)| {
                cfg.classifiers.iter().map(|classifier| CellJob {
                    data: &data,
                    features: ds,
                    method: params.method(),
                    classifier,
                    n_classes,
                })
            })
            .collect();
        cells.par_extend(jobs.par_iter().map(|job| run_cell(job, cfg)));
    }
    Ok(GridResult { cells, stages, config_echo: cfg.echo(), split_seed: cfg.split.seed })
}
