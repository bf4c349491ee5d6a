use thiserror::Error;

/// Errors raised by the bound computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("point lies outside the domain unit ball (norm {norm})")]
    OutsideDomain { norm: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("expected {expected} covering centers, got {got}")]
    CenterCount { expected: usize, got: usize },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("volume condition violated at request {index}: partial sum {partial_sum} exceeds {capacity}")]
    VolumeExceeded {
        index: usize,
        partial_sum: f64,
        capacity: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("parameter vector has {got} entries, network needs {expected}")]
    ParamCount { expected: usize, got: usize },

    #[error("layer {layer} output {value} exceeds bound {bound}")]
    LayerBound {
        layer: usize,
        value: f64,
        bound: f64,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
