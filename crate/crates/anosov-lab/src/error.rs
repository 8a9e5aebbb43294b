//! Error type for the CLI: every failure maps to an exit code and a
//! machine-readable JSON object on stderr.

use std::fmt;

#[derive(Debug, Clone)]
pub enum LabError {
    /// Bad config, bad flags, unreadable input: exit 2.
    Validation(String),
    /// A numeric routine refused or diverged: exit 3.
    Numeric(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Validation(_) => 2,
            LabError::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LabError::Validation(_) => "validation",
            LabError::Numeric(_) => "numeric",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            LabError::Validation(m) | LabError::Numeric(m) => m,
        }
    }

    /// `{"error":{"kind":...,"message":...}}` for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.message() }
        })
        .to_string()
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for LabError {}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Validation(format!("io: {e}"))
    }
}

impl From<serde_json::Error> for LabError {
    fn from(e: serde_json::Error) -> Self {
        LabError::Validation(format!("json: {e}"))
    }
}

pub fn numeric<E: fmt::Display>(e: E) -> LabError {
    LabError::Numeric(e.to_string())
}

pub fn invalid<S: Into<String>>(msg: S) -> LabError {
    LabError::Validation(msg.into())
}
