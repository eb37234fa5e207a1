use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("data lies outside the affine support (residual norm {residual:.3e}, allowed {allowed:.3e})")]
    SupportViolation { residual: f64, allowed: f64 },

    #[error("vector lies outside the covariance range (residual norm {residual:.3e})")]
    OutsideRange { residual: f64 },

    #[error("index point not present in dataset: {0}")]
    MissingPoint(String),

    #[error("rank-deficient observation covariance: rank {rank} of {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("estimator contract violated: {0}")]
    Contract(String),

    #[error("classes are not separable (margin {rho:.3e})")]
    SeparationFailure { rho: f64 },

    #[error("no convergence after {iterations} iterations (duality gap {gap:.3e})")]
    Convergence { iterations: usize, gap: f64 },

    #[error("labelled sets overlap: {0}")]
    OverlappingSets(String),

    #[error("row {row} column {column}: {message}")]
    Data { row: usize, column: usize, message: String },

    #[error("invalid epsilon grid: {0}")]
    InvalidGrid(String),
}
