use std::io;

use thiserror::Error;

/// Failure of a command, grouped by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<catspace::Error> for CliError {
    fn from(e: catspace::Error) -> Self {
        use catspace::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidArgument(_) => CliError::Usage(msg),
            E::NonFinite(_)
            | E::DimensionMismatch { .. }
            | E::TooManyClasses { .. }
            | E::ClassTooSmall { .. }
            | E::SingleClass => CliError::Data(msg),
            E::IterationLimit { .. }
            | E::NotOrthonormal { .. }
            | E::DegenerateGram { .. }
            | E::BracketFailure { .. }
            | E::BudgetExceeded { .. }
            | E::RankDeficient { .. } => CliError::Numerical(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
