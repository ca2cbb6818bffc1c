use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitKind {
    Validation,
    Unlocalizable,
    ToleranceBreach,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Validation => 2,
            ExitKind::Unlocalizable => 3,
            ExitKind::ToleranceBreach => 4,
        }
    }
}

/// Failure reported as one JSON object on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub exit: ExitKind,
    /// Machine-readable name of the violated assumption or tolerance.
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl CliError {
    pub fn new(exit: ExitKind, error: &str, message: impl Into<String>) -> Self {
        CliError {
            exit,
            error: error.to_string(),
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Validation, "validation", message)
    }

    pub fn from_core(e: netloc_core::Error) -> Self {
        Self::new(ExitKind::Validation, e.tag(), e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(ExitKind::Validation, "io", format!("{}: {e}", path.display()))
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn code(&self) -> i32 {
        self.exit.code()
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("error serializes");
        v["exit_code"] = self.code().into();
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.error, self.code(), self.message)
    }
}

impl std::error::Error for CliError {}
