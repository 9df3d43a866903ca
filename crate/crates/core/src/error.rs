use thiserror::Error;

/// Every failure mode of the library. Each variant carries a short human-readable detail.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("absolute continuity violated: {0}")]
    AbsoluteContinuityViolation(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("combinatorial blowup: {count} type classes exceed the cap {cap}")]
    CombinatorialBlowup { count: u128, cap: u128 },
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("standing channel assumption violated: {0}")]
    AssumptionViolation(String),
    #[error("cubic has no trigonometric real root (arccos argument {0})")]
    ComplexRootRegime(f64),
    #[error("infeasible blocklength: {0}")]
    InfeasibleBlocklength(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("infeasible weight: {0}")]
    InfeasibleWeight(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("unknown verification suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Kebab-case variant name, used as a status column in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AbsoluteContinuityViolation(_) => "absolute-continuity-violation",
            Error::AlphabetMismatch(_) => "alphabet-mismatch",
            Error::DomainError(_) => "domain-error",
            Error::CombinatorialBlowup { .. } => "combinatorial-blowup",
            Error::DegenerateVariance(_) => "degenerate-variance",
            Error::InvalidParams(_) => "invalid-params",
            Error::AssumptionViolation(_) => "assumption-violation",
            Error::ComplexRootRegime(_) => "complex-root-regime",
            Error::InfeasibleBlocklength(_) => "infeasible-blocklength",
            Error::PreconditionViolation(_) => "precondition-violation",
            Error::InfeasibleWeight(_) => "infeasible-weight",
            Error::ConfigError(_) => "config-error",
            Error::UnknownSuite(_) => "unknown-suite",
        }
    }
}
