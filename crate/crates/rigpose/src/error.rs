use std::fmt::Display;
use std::path::Path;

use thiserror::Error;

/// Failures surfaced by the command-line tool. Each renders as one line,
/// `error: <kind>: <message>`.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] rigpose_core::Error),
}

impl CliError {
    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), message: err.to_string() }
    }

    pub fn parse(path: &Path, line: usize, msg: impl Display) -> Self {
        CliError::Parse { path: path.display().to_string(), line, message: msg.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Core(_) => "solver",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    /// The single machine-readable line printed on stderr.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace('\n', " ");
        format!("error: {}: {}", self.kind(), msg.trim())
    }
}
