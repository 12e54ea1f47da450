use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter { key: key.into(), reason: reason.into() }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::NoEquilibrium(_) => 2,
            LabError::Verification(_) => 3,
            LabError::NonConvergence(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
