use thiserror::Error;

use sepconf::baselines::BaselineError;
use sepconf::catalog::CatalogError;
use sepconf::ensemble::EnsembleError;
use sepconf::harness::HarnessError;
use sepconf::llm::LlmError;
use sepconf::mps::MpsError;
use sepconf::textfree::TextFreeError;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    /// Artifacts were written but are incomplete (short pool, failed instances).
    pub const PARTIAL: u8 = 3;
    /// Solver binary or API credentials unavailable.
    pub const ENVIRONMENT: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Environment(String),
    #[error("artifacts cover different instance sets: {0}")]
    SchemaMismatch(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Environment(_) => exit::ENVIRONMENT,
            CliError::SchemaMismatch(_) | CliError::Failure(_) => exit::FAILURE,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn failure(message: impl std::fmt::Display) -> Self {
        CliError::Failure(message.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::SolverNotFound(_) => CliError::Environment(e.to_string()),
            other => CliError::failure(other),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        CliError::failure(e)
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        CliError::failure(e)
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::MissingValidationSet | EnsembleError::KTooLarge { .. } | EnsembleError::ZeroK => {
                CliError::Usage(e.to_string())
            }
            other => CliError::failure(other),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Harness(h) => h.into(),
            BaselineError::EmptyValidationSet | BaselineError::ZeroCandidates => CliError::Usage(e.to_string()),
            other => CliError::failure(other),
        }
    }
}

impl From<MpsError> for CliError {
    fn from(e: MpsError) -> Self {
        CliError::failure(e)
    }
}

impl From<TextFreeError> for CliError {
    fn from(e: TextFreeError) -> Self {
        CliError::failure(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::failure(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::failure(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
