use std::path::PathBuf;

use qgf_core::QgfError;
use thiserror::Error;

/// Failures surfaced by the experiment harness, each with a stable category.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Simulation(#[from] QgfError),
    #[error("aggregation failed: {0}")]
    Aggregation(String),
    #[error("{0} invariant check(s) failed")]
    Check(usize),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Parse { .. } => "parse",
            Self::Io { .. } => "io",
            Self::Simulation(_) => "simulation",
            Self::Aggregation(_) => "aggregation",
            Self::Check(_) => "check",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Parse { .. } => 3,
            Self::Io { .. } => 4,
            Self::Simulation(_) => 5,
            Self::Aggregation(_) => 6,
            Self::Check(_) => 7,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
