use std::process::ExitCode;

use dephom::filtration::FiltrationError;
use dephom::limits::LimitsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Outputs were written but a statistical check flagged or failed.
    #[error("statistical check reported `{0}`; see summary.json")]
    Statistical(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Statistical(_) => 4,
        })
    }

    pub fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {err}"))
    }
}

impl From<LimitsError> for CliError {
    fn from(e: LimitsError) -> Self {
        match e {
            LimitsError::Budget { .. } | LimitsError::Filtration(FiltrationError::BudgetExceeded { .. }) => {
                CliError::Budget(e.to_string())
            }
            LimitsError::Invalid(_) | LimitsError::Sampler(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<FiltrationError> for CliError {
    fn from(e: FiltrationError) -> Self {
        match e {
            FiltrationError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            FiltrationError::UnsupportedMetric(_) | FiltrationError::InvalidScale(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
