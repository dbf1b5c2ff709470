//! Configuration loading, experiment orchestration and CSV export.

pub mod config;
pub mod experiments;
pub mod table;

use thiserror::Error;

use crate::game::GameError;
use crate::model::ModelError;
use crate::montecarlo::McError;

pub use config::{load_config, parse_config, Config};
pub use experiments::{run_experiment, Experiment, RunOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {message}")]
    Validation { pointer: String, message: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    MonteCarlo(#[from] McError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation {
            pointer: e.field().to_string(),
            message: e.to_string(),
        }
    }
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Validation { .. } => 2,
            CliError::Game(GameError::CellularInfeasible { .. })
            | CliError::Game(GameError::IntraD2DInfeasible { .. }) => 2,
            CliError::Game(_) => 3,
            CliError::MonteCarlo(McError::Pool(_)) => 1,
            CliError::MonteCarlo(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}
