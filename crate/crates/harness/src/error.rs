use swarmsec_core::SimError;
use swarmsec_marl::MarlError;

/// Harness errors, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Unreadable, malformed or invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Failure while a run was executing.
    #[error("runtime error: {0}")]
    Runtime(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub const CONFIG_EXIT: i32 = 2;
    pub const RUNTIME_EXIT: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => Self::CONFIG_EXIT,
            HarnessError::Runtime(_) | HarnessError::Io { .. } => Self::RUNTIME_EXIT,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<MarlError> for HarnessError {
    fn from(e: MarlError) -> Self {
        match e {
            MarlError::InvalidConfig { .. } | MarlError::Sim(SimError::InvalidParameter { .. }) => {
                HarnessError::Config(e.to_string())
            }
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

impl From<SimError> for HarnessError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidParameter { .. } => HarnessError::Config(e.to_string()),
            other => HarnessError::Runtime(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
