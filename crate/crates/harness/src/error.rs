use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Core(#[from] sbs_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{method} on {function}-{dim}d used {used} evaluations, over the budget of {budget}")]
    BudgetExceeded {
        method: String,
        function: String,
        dim: usize,
        used: u64,
        budget: u64,
    },
    #[error("trajectory log {0}")]
    BadLog(String),
    #[error("trajectory plots need a 2-d run, got dimension {dim}")]
    NotTwoDimensional { dim: usize },
}

impl HarnessError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        HarnessError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error comes from the user's input rather than from a run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HarnessError::Config { .. }
                | HarnessError::Parse { .. }
                | HarnessError::Core(
                    sbs_core::Error::UnknownFunction(_)
                        | sbs_core::Error::UnsupportedDimension { .. }
                        | sbs_core::Error::InvalidParameter { .. }
                        | sbs_core::Error::BudgetTooSmall { .. }
                )
        )
    }
}
