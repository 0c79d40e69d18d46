use alloc::string::String;

/// Errors produced by the core pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An image or matrix has an unusable shape.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// A configuration value violates its invariant.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Operands disagree in shape (e.g. query width vs. training width).
    #[error("shape error: expected {expected} columns, got {got}")]
    Shape { expected: usize, got: usize },
    /// The operation cannot run on the supplied data (empty set, one class, ...).
    #[error("state error: {0}")]
    State(String),
    /// Malformed labels or predictions handed to the metrics layer.
    #[error("input error: {0}")]
    Input(String),
    /// A stratified split was requested on a class that is too small.
    #[error("split error: class {class} has {count} sample(s), need at least 2")]
    Split { class: usize, count: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
