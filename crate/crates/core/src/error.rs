use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    /// Two points that must be distinct coincide.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    /// The array radiates no power (all excitation weights are zero).
    #[error("degenerate array: {0}")]
    DegenerateArray(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error("malformed action: {0}")]
    MalformedAction(String),

    #[error("episode already finished")]
    EpisodeFinished,
}

impl SimError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
