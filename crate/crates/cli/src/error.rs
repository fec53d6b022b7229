use std::io;
use std::path::Path;

use thiserror::Error;

use cpd_core::{GeometryError, PlanError, RcpdError, ValidationError};

/// Failure classes of the `cpd` binary; each maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<RcpdError> for CliError {
    fn from(e: RcpdError) -> Self {
        match e {
            RcpdError::StarvedWindow { .. } | RcpdError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Validation(format!("rcpd: {e}")),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::Trace(_) | GeometryError::Catalog(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        CliError::Validation(e.to_string())
    }
}
