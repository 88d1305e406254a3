use std::fmt;

use crate::config::ConfigError;

/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 4;
/// Exit status for invalid configurations, refused requests and failed checks.
pub const EXIT_INVALID: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Core(peakon_core::Error),
    Io {
        path: String,
        source: std::io::Error,
    },
    Refused(String),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_INVALID,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "invalid configuration: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Refused(m) => write!(f, "refused: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<peakon_core::Error> for CliError {
    fn from(e: peakon_core::Error) -> Self {
        CliError::Core(e)
    }
}
