use std::fmt;

use serde::Serialize;

/// Failure of a subcommand, classified for the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file or referenced paths.
    Config(String),
    /// Input data that cannot be processed.
    Data(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) => m,
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            code: i32,
            kind: &'a str,
            message: &'a str,
        }
        serde_json::json!({
            "error": Body {
                code: self.exit_code(),
                kind: self.kind(),
                message: self.message(),
            }
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<lectalign::Error> for CliError {
    fn from(e: lectalign::Error) -> Self {
        match e {
            lectalign::Error::Config(_) | lectalign::Error::Pattern { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("io error on {}: {e}", path.display()))
}
