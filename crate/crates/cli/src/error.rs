use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("config is not valid TOML: {0}")]
    Syntax(String),

    #[error("config does not match the schema: {0}")]
    Schema(String),

    #[error("unknown experiment kind `{kind}`{}", suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownKind { kind: String, suggestion: Option<String> },

    #[error("{0} already exists; pass --force to overwrite")]
    OutputExists(PathBuf),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Simulation(#[from] fermion_pair::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "read",
            CliError::Syntax(_) => "syntax",
            CliError::Schema(_) => "schema",
            CliError::UnknownKind { .. } => "unknown-kind",
            CliError::OutputExists(_) => "output-exists",
            CliError::Write { .. } => "write",
            CliError::Simulation(_) => "simulation",
        }
    }

    /// 2 for problems with the config or command line, 1 for failures while running.
    pub fn exit_status(&self) -> i32 {
        match self {
            CliError::Simulation(_) | CliError::Write { .. } => 1,
            _ => 2,
        }
    }

    /// One-line JSON record written to stderr.
    pub fn record(&self) -> serde_json::Value {
        let mut rec = json!({ "error": self.code(), "message": self.to_string() });
        if let CliError::UnknownKind { suggestion: Some(s), .. } = self {
            rec["suggestion"] = json!(s);
        }
        rec
    }
}
