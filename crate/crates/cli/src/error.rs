use padic_harmonic::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            _ => 1,
        }
    }
}

/// 2 for certification failures, 3 for precision failures.
pub fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::NotStabilized(_) | Error::SupportNotCertified(_) | Error::NotFound(_) => 2,
        Error::InsufficientPrecision { .. } | Error::DepthTooSmall { .. } | Error::PrecisionOverflow(_) => 3,
        _ => 1,
    }
}

/// Stable name of an error variant for reports.
pub fn kind(e: &Error) -> &'static str {
    match e {
        Error::InsufficientPrecision { .. } => "insufficient-precision",
        Error::DivisionByZero => "division-by-zero",
        Error::FieldMismatch(..) => "field-mismatch",
        Error::InvalidField(_) => "invalid-field",
        Error::LevelCapExceeded { .. } => "level-cap-exceeded",
        Error::PrecisionOverflow(_) => "precision-overflow",
        Error::NotFiniteType(_) => "not-finite-type",
        Error::PointOutsideAlcove => "point-outside-alcove",
        Error::Syntax { .. } => "syntax",
        Error::Sort(_) => "sort",
        Error::Unassigned(_) => "unassigned",
        Error::DomainUndecided => "domain-undecided",
        Error::NotFound(_) => "not-found",
        Error::NotRegular => "not-regular",
        Error::NotStabilized(_) => "not-stabilized",
        Error::SupportNotCertified(_) => "support-not-certified",
        Error::DepthTooSmall { .. } => "depth-too-small",
        Error::InvalidInput(_) => "invalid-input",
    }
}
