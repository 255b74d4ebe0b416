use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Solver(planwise::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

/// Machine-readable form written to stderr.
#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), reason: reason.into() }
    }

    /// Map a core error raised while building the scenario. Everything
    /// the core rejects at construction time is a problem with the config.
    pub fn from_config(prefix: &str, err: planwise::Error) -> Self {
        match err {
            planwise::Error::Validation { field, reason } => CliError::config(format!("{prefix}.{field}"), reason),
            other => CliError::config(prefix, other.to_string()),
        }
    }

    /// 2 for anything wrong with the input, 1 for failures while solving.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse(_) | CliError::Config { .. } => 2,
            CliError::Solver(_) | CliError::Write { .. } => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } => "unreadable_config",
            CliError::Parse(_) | CliError::Config { .. } => "invalid_config",
            CliError::Solver(planwise::Error::AmbiguitySetEmpty) => "ambiguity_set_empty",
            CliError::Solver(planwise::Error::ConvergenceFailure { .. }) => "convergence_failure",
            CliError::Solver(_) => "solver_failure",
            CliError::Write { .. } => "unwritable_output",
        }
    }

    pub fn to_json(&self) -> String {
        let field = match self {
            CliError::Config { field, .. } => Some(field.as_str()),
            _ => None,
        };
        let report = ErrorReport { error: self.kind(), field, message: self.to_string() };
        serde_json::to_string(&report).expect("error report serializes")
    }
}

impl From<planwise::Error> for CliError {
    fn from(err: planwise::Error) -> Self {
        CliError::Solver(err)
    }
}
