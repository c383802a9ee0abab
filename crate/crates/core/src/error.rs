use thiserror::Error;

/// Errors raised by the numerical operations and file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A named precondition of an operation did not hold.
    #[error("precondition `{name}` violated: {detail}")]
    Precondition { name: &'static str, detail: String },

    #[error("unsupported dimension: expected {expected}, found {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("infeasible measurement record: residual {residual:.3e} exceeds {threshold:.3e}")]
    InfeasibleRecord { residual: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable label for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Precondition { .. } => "precondition",
            Error::UnsupportedDimension { .. } => "unsupported_dimension",
            Error::InfeasibleRecord { .. } => "infeasible_record",
            Error::Parse(_) => "parse",
        }
    }

    /// The violated precondition, when there is one.
    pub fn precondition(&self) -> Option<&'static str> {
        match self {
            Error::Precondition { name, .. } => Some(name),
            _ => None,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition_failed(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            name,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
