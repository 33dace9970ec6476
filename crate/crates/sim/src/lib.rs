//! Experiment orchestration for the MIMO JSCC link simulator: declarative
//! sweep configs, a deterministic parallel runner, CSV output and SVG plots.

pub mod config;
pub mod csvio;
pub mod plot;
pub mod sweep;
pub mod tables;

use std::path::PathBuf;
use thiserror::Error;

pub use config::{ConfigError, SweepConfig};
pub use sweep::{run_sweep, ResultRow, SweepResult};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{0}")]
    Plot(String),
    #[error(transparent)]
    Core(#[from] mimo_jscc::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for I/O, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_) => 2,
            SimError::Io { .. } | SimError::Csv { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
