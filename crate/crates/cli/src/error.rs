use std::path::Path;

use hdrcal::ErrorKind;
use serde::Serialize;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// Error reported on stderr as one JSON object per line.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub code: u8,
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl CliError {
    fn new(code: u8, message: String) -> Self {
        let error = match code {
            EXIT_USAGE => "usage",
            EXIT_IO => "io",
            _ => "numeric",
        };
        Self {
            code,
            error,
            message,
            path: None,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message.into())
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(EXIT_IO, message.into())
    }

    pub fn at(mut self, path: &Path) -> Self {
        if self.path.is_none() {
            self.path = Some(path.display().to_string());
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error report serializes")
    }
}

impl From<hdrcal::Error> for CliError {
    fn from(e: hdrcal::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Usage => EXIT_USAGE,
            ErrorKind::Io => EXIT_IO,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

pub trait Context<T> {
    fn at(self, path: &Path) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> Context<T> for Result<T, E> {
    fn at(self, path: &Path) -> Result<T, CliError> {
        self.map_err(|e| e.into().at(path))
    }
}
