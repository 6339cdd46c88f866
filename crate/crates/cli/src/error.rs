use serde_json::json;
use thiserror::Error;

/// Failure of a CLI run, classified by exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable, malformed or invalid configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// A module refused or failed the computation.
    #[error("{module} failed: {message}")]
    Numerical { module: &'static str, message: String },
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn numerical(module: &'static str, err: impl std::fmt::Display) -> Self {
        Self::Numerical {
            module,
            message: err.to_string(),
        }
    }

    /// 1 for configuration errors, 2 for failures during the run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Numerical { .. } | Self::Io(_) => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let body = match self {
            Self::Config(m) => json!({ "kind": "config", "message": m }),
            Self::Numerical { module, message } => json!({ "kind": "numerical", "module": module, "message": message }),
            Self::Io(m) => json!({ "kind": "io", "message": m }),
        };
        json!({ "error": body })
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
