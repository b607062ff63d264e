use thiserror::Error;

/// Errors raised by the numerical routines and the report pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("cutoff half-width too large: {0}")]
    DeltaTooLarge(String),

    #[error("sphere not covered by grid: {0}")]
    Coverage(String),

    #[error("oscillation budget exceeded: {0}")]
    Budget(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("invalid symbol: {0}")]
    Symbol(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
