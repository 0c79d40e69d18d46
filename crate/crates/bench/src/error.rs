use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// A malformed dataset row; `line` is 1-based.
    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    /// A cache or model file that is truncated, mislabelled or inconsistent.
    #[error("bad {what} file: {msg}")]
    Format { what: &'static str, msg: String },
    #[error("image {index}: {source}")]
    Image { index: usize, source: handcraft_core::Error },
    #[error(transparent)]
    Core(#[from] handcraft_core::Error),
}

impl BenchError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
