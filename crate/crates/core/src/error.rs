use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("diagonal singularity: the two points coincide")]
    DiagonalSingularity,
    #[error("exterior point ({0}, {1})")]
    ExteriorPoint(f64, f64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("mfs conditioning: condition estimate {0:e}")]
    MfsConditioning(f64),
    #[error("pole: t equals s")]
    Pole,
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("root not bracketed: {0}")]
    NoBracket(String),
    #[error("zero on boundary")]
    ZeroOnBoundary,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
