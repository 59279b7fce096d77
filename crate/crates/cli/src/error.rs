use thiserror::Error;

use weylcap_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid channel specification: {0}")]
    Validation(String),

    #[error("no capacity formula applies: {0}")]
    FormulaNotApplicable(String),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("inequality margin violated: {0}")]
    MarginViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Validation(_) => 3,
            CliError::FormulaNotApplicable(_) => 4,
            CliError::ResourceGuard(_) => 5,
            CliError::MarginViolation(_) => 6,
            CliError::Io(_) | CliError::Core(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::ResourceGuard { .. } => CliError::ResourceGuard(e.to_string()),
            CoreError::NotDeformation(_) => CliError::Validation(e.to_string()),
            CoreError::InvalidProbability(_) | CoreError::DimensionTooSmall(_) => CliError::Validation(e.to_string()),
            CoreError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
