use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace must be 1, got {trace}")]
    TraceNotOne { trace: f64 },

    #[error("vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("no convergence after {sweeps} sweeps (off-diagonal norm {off:.3e})")]
    Convergence { sweeps: usize, off: f64 },

    #[error("weights must be non-negative and sum to 1 (sum {sum})")]
    WeightSum { sum: f64 },

    #[error("rank {rank} exceeds purifying dimension {dim_k}")]
    RankTooLarge { rank: usize, dim_k: usize },

    #[error("value {value} outside of range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("pairing search exhausted: best average {best:.6} below target {target:.6}")]
    PairingSearch {
        best: f64,
        target: f64,
        pairing: Vec<(usize, usize)>,
    },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("model violation: {0}")]
    ModelViolation(String),

    #[error("reduction error: {0}")]
    Reduction(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
