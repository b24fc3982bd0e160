use std::fmt;
use std::path::PathBuf;

use serde_json::json;

use crate::config::ConfigError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Invalid(String),
    Core(cetlab_core::Error),
    Io { path: PathBuf, source: std::io::Error },
    /// Acceptance criteria that did not pass.
    Acceptance(Vec<usize>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Invalid(_) | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Core(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Core(_) | CliError::Acceptance(_) => EXIT_NUMERICAL,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Invalid(_) => "invalid-argument",
            CliError::Core(e) => e.code(),
            CliError::Io { .. } => "io",
            CliError::Acceptance(_) => "acceptance-failed",
        }
    }

    /// One-line JSON for standard error.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.code(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Core(cetlab_core::Error::BlowUpDetected { t, r }) = self {
            v["blow_up_time"] = json!(t);
            v["blow_up_radius"] = json!(r);
        }
        if let CliError::Acceptance(ids) = self {
            v["failed_criteria"] = json!(ids);
        }
        v.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Invalid(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Acceptance(ids) => write!(f, "acceptance criteria failed: {ids:?}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<cetlab_core::Error> for CliError {
    fn from(e: cetlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn io_error(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
