use thiserror::Error;

/// Errors raised by the grid, seminorm, maximal, decomposition and weight routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain has no active cells")]
    EmptyDomain,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("cube does not intersect the active domain")]
    DisjointCube,

    #[error("cube side {scale} exceeds the available extent {extent}")]
    ScaleTooLarge { scale: usize, extent: usize },

    #[error("functions live on different domains")]
    DomainMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample count mismatch: expected {expected}, found {actual}")]
    SampleCount { expected: usize, actual: usize },

    #[error("non-finite sample at position {0}")]
    NonFinite(usize),

    #[error("measure condition fails: cube at origin {origin:?} with side {len} has no active cells")]
    MeasureCondition { origin: [i64; 2], len: usize },

    #[error("cube family does not cover active cell {0}")]
    Uncovered(usize),

    #[error("negative value {value} at cell {cell}")]
    Negative { cell: usize, value: f64 },

    #[error("average {average} over the base cube already exceeds the level {level}")]
    LevelTooLow { average: f64, level: f64 },

    #[error("weight must be strictly positive, cell {cell} holds {value}")]
    NonPositiveWeight { cell: usize, value: f64 },

    #[error("exponential fit needs at least 3 positive points in range, found {0}")]
    FitFailure(usize),

    #[error("B = {b} is below the observed single-step growth {observed}")]
    BoundTooSmall { b: f64, observed: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
