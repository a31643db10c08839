use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FileRecord {
    pub fn ok(inputs: Vec<String>, outputs: Vec<String>, result: serde_json::Value) -> Self {
        Self {
            inputs,
            outputs,
            status: Status::Ok,
            result: Some(result),
            error: None,
        }
    }

    pub fn failed(inputs: Vec<String>, err: &CliError) -> Self {
        Self {
            inputs,
            outputs: Vec::new(),
            status: Status::Error,
            result: None,
            error: Some(err.message.clone()),
        }
    }
}

/// Written next to every output. `parameters` holds every resolved value,
/// so `--config <manifest>` with the same inputs reproduces the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub parameters: Params,
    pub files: Vec<FileRecord>,
}

impl JobManifest {
    pub fn new(subcommand: &str, parameters: Params, files: Vec<FileRecord>) -> Self {
        Self {
            tool: "hdrcal".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            parameters,
            files,
        }
    }
}
