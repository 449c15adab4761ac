use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid channel pair: {0}")]
    Validation(String),
    #[error("malformed pair file: {0}")]
    Format(String),
    #[error("alphabet cap exceeded at transform step {step}: {size} symbols > cap {cap}")]
    AlphabetCap { step: usize, size: usize, cap: usize },
    #[error("root finder failed to converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
