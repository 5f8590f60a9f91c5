//! Config-driven experiment runs: parsing, execution, output files.

mod check;
mod config;
mod run;

pub use check::{oracle_check, CheckLine};
pub use config::{
    from_flat, parse_flat, split_sweep, value_label, AnalysisOptions, ConfigError, ConfigFile, Engine, EngineParams,
    ExperimentConfig, InitSpec, Observable, SweepSpec,
};
pub use run::{
    compute_point, run, sha256_hex, sweep, ManifestEntry, OutputDir, PointResult, RunManifest, RunSummary,
    MAGNETIZATION_HEADER,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("runtime: {0}")]
    Runtime(String),
    #[error("io: {0}")]
    Io(String),
}

impl HarnessError {
    /// `1` for bad input, `2` for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Usage(_) => 1,
            HarnessError::Runtime(_) | HarnessError::Io(_) => 2,
        }
    }
}

/// Parses and validates a config without running it; returns the number of
/// points.
pub fn validate(config_text: &str) -> Result<usize, HarnessError> {
    Ok(ConfigFile::parse(config_text)?.points.len())
}
