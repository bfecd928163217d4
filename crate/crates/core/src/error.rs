use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("Hilbert-space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("zero vector cannot be normalized")]
    ZeroNorm,

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("order k = {k} outside the allowed range [{min}, {max}]")]
    OrderOutOfRange { k: usize, min: usize, max: usize },

    #[error("sum rule violated: I1 = {total}, sum of I^k = {sum}")]
    SumRule { total: f64, sum: f64 },

    #[error("truncated displacement deviates from the reference by {defect:.3e} on low Fock layers")]
    TruncationLoss { defect: f64 },

    #[error("malformed grid specification `{0}` (expected min:max:steps)")]
    GridSpec(String),

    #[error("unknown measure `{0}` (expected gmc, qfi, global, energy or all)")]
    UnknownMeasure(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
