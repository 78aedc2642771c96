use thiserror::Error;

/// Errors produced by the solvers, generators and file readers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix A is not stable (largest real part of its spectrum is {0:e})")]
    Unstable(f64),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("system is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("problem size n = {n} exceeds the configured cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("requested {requested} singular vectors but the numerical rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("iteration diverged after {iterations} steps (relative residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },

    #[error("iteration did not reach the requested accuracy: {0}")]
    NotConverged(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
