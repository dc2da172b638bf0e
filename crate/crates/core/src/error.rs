use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("Hilbert embedding requires p = 2, got p = {0}")]
    WrongExponent(String),

    #[error("non-finite entry at position {0}")]
    NonFinite(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum has negative or non-real eigenvalues")]
    NegativeSpectrum,

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("symmetric lift dimension {dim} exceeds cap {cap}")]
    LiftTooLarge { dim: usize, cap: usize },

    #[error("need at least 2 vectors, got {0}")]
    TooFewVectors(usize),

    #[error("pair is not normalized: max |f_j(tau_j) - 1| = {0:e}")]
    NotNormalized(f64),

    #[error("bound needs n >= d, got n = {n}, d = {d}")]
    DegenerateCount { n: usize, d: usize },

    #[error("measure has no off-diagonal mass (single atom)")]
    DegenerateMeasure,

    #[error("mass at index {index} is not positive: {value}")]
    NonPositiveMass { index: usize, value: f64 },

    #[error("negative radicand {0:e}: spectral hypothesis fails")]
    NegativeRadicand(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
