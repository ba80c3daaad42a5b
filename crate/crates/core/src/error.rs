use thiserror::Error;

/// Errors produced by model construction, discretization, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error at line {line}: {msg}")]
    ConfigAt { line: usize, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dense tensor of {needed} elements exceeds the element budget {budget}")]
    Budget { needed: usize, budget: usize },

    #[error("configuration incomplete: {0}")]
    Incomplete(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("fixed-point oracle failed to converge after {0} sweeps")]
    OracleFailure(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
