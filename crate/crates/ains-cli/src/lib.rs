//! Configuration, scenario catalogue and commands behind the `ains` binary.

pub mod commands;
pub mod config;
pub mod scenarios;

use ains_measurement::MeasError;
use ains_observability::ObsError;
use ains_sim::SimError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Obs(#[from] ObsError),
    #[error(transparent)]
    Meas(#[from] MeasError),
}

impl CliError {
    /// 2 for bad input (configuration or unsatisfiable scene), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Sim(SimError::InvalidSpec(_) | SimError::PlacementFailure(_)) => 2,
            _ => 1,
        }
    }
}
