//! Std companion to `handcraft-core`: CSV ingestion, feature caching, model
//! files, run configuration, the benchmark grid and its reports.

mod binio;
pub mod cache;
pub mod config;
pub mod datasets;
mod error;
pub mod grid;
pub mod model_io;
pub mod report;
pub mod synth;
pub mod visualize;

pub use config::{DatasetSpec, RunConfig};
pub use datasets::{load_csv, preprocess_all, ImageSet, Schema};
pub use error::{BenchError, Result};
pub use grid::{run_grid, CellResult, GridResult};
pub use report::emit_report;
