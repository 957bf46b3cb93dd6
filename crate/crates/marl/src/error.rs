use swarmsec_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid trainer setting `{name}`: {reason}")]
    InvalidConfig { name: &'static str, reason: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MarlError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        MarlError::InvalidConfig {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = MarlError> = std::result::Result<T, E>;
