use qgband_core::{Error, PolygonError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Graph(_) | Error::Config(_) | Error::Oracle(_) => CliError::Config(e.to_string()),
            Error::Polygon(PolygonError::InvalidSides(_)) => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<qgband_core::GraphError> for CliError {
    fn from(e: qgband_core::GraphError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<qgband_core::SolverError> for CliError {
    fn from(e: qgband_core::SolverError) -> Self {
        CliError::Solver(e.to_string())
    }
}
