use std::fmt;
use std::path::Path;

use tokenprune_core::Error;

/// A failed command: an error code, a message and the process exit status.
#[derive(Debug)]
pub struct CliError {
    code: &'static str,
    message: String,
    exit: u8,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: "ValidationError",
            message: message.into(),
            exit: 2,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: "IoFailure",
            message: format!("{}: {err}", path.display()),
            exit: 1,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.exit
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.code,
            "message": self.message,
            "exit": self.exit,
        })
        .to_string()
    }

    /// Wraps a library error raised while handling `path`.
    pub fn at(path: &Path, err: Error) -> Self {
        let mut e = Self::from(err);
        e.message = format!("{}: {}", path.display(), e.message);
        e
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self {
            code: err.code(),
            message: err.to_string(),
            exit: if err.is_io() { 1 } else { 2 },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}
