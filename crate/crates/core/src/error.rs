use thiserror::Error;

/// Errors raised across the workbench.
///
/// Precision failures are never silently resolved: a computation that cannot
/// certify its output returns [`Error::InsufficientPrecision`] and the caller
/// retries with more digits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The result is only known modulo `ϖ^known_to`, which does not pin down
    /// the requested quantity (e.g. all known digits cancelled).
    #[error("insufficient precision: value only known modulo ϖ^{known_to}")]
    InsufficientPrecision { known_to: i64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("character argument has valuation {valuation}, below the level cap -{cap}")]
    LevelCapExceeded { valuation: i64, cap: u32 },
    #[error("precision overflow: ϖ^{0} does not fit the machine word")]
    PrecisionOverflow(u32),
    #[error("cartan matrix is not of finite type: {0}")]
    NotFiniteType(String),
    #[error("point lies outside the alcove closure")]
    PointOutsideAlcove,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unassigned variable `{0}`")]
    Unassigned(String),
    #[error("definable-set predicate undecided on a coset")]
    DomainUndecided,
    #[error("no local-constancy depth found up to {0}")]
    NotFound(u32),
    #[error("element is not regular semisimple")]
    NotRegular,
    #[error("truncation windows did not stabilize up to window {0}")]
    NotStabilized(i64),
    #[error("eta kernel does not vanish on outer shells of window {0}")]
    SupportNotCertified(i64),
    #[error("depth {depth} is below the sufficiency depth {required}")]
    DepthTooSmall { depth: u32, required: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
