//! Experiment runner for `naifs-core`: JSON configs in, CSV curves and verdict
//! files out.

pub mod catalog;
pub mod config;
pub mod runner;

pub use config::{parse, Check, ExperimentConfig, Mode};
pub use runner::{run, Outcome, Overrides, Record};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] naifs_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit status: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 3,
        }
    }
}

/// Loads a config from a path, or from the bundled examples by name.
pub fn load_config(arg: &str) -> Result<ExperimentConfig, LabError> {
    let path = std::path::Path::new(arg);
    if !path.exists() {
        if let Some(text) = catalog::example(arg) {
            return parse(text);
        }
    }
    config::load(path)
}
