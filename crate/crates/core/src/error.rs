use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("K ≥ 3 required, got K = {0}")]
    TooFewLeaves(usize),

    #[error("points belong to different books: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("leaf index {index} out of range 1..={leaves}")]
    LeafOutOfRange { index: usize, leaves: usize },

    #[error("distance to the spine must be nonnegative and finite, got {0}")]
    InvalidHeight(f64),

    #[error("cannot unfold a vector with negative first coordinate {0}")]
    NotInClosedHalfSpace(f64),

    #[error("scale factor must be nonnegative, got {0}")]
    NegativeScale(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid component: {0}")]
    InvalidComponent(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    Indefinite(f64),

    #[error("sample is empty")]
    EmptySample,

    #[error("need at least {needed} samples, got {actual}")]
    TooFewSamples { needed: usize, actual: usize },

    #[error("first moments {0:?} have more than one nonnegative entry")]
    TrichotomyViolated(Vec<f64>),

    #[error("measure is {actual}, expected {expected}")]
    RegimeMismatch { expected: String, actual: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
