use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("defining polynomial is reducible modulo {p}")]
    ReducibleModulus { p: u64 },

    #[error("invalid ring parameters: {0}")]
    InvalidRing(String),

    #[error("element is not a unit (valuation {valuation:?})")]
    NotUnit { valuation: Option<u32> },

    #[error("precision exhausted while {context}; retry with precision >= {suggested}")]
    PrecisionExhausted { context: String, suggested: u32 },

    #[error("polygons have mismatched endpoints: {0}")]
    EndpointMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid datum: {0}")]
    InvalidDatum(String),

    #[error("invalid module: {0}")]
    InvalidModule(String),

    #[error("exterior power is not divisible by p^{expected} (minimum valuation {found})")]
    DivisibilityFailure { expected: u32, found: u32 },

    #[error("divided operator does not annihilate Fil^1 of the exterior power")]
    FiltrationNotKilled,

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("size guard violated: {0}")]
    SizeGuard(String),

    #[error("precision budget exceeded: need {needed} extra digits, budget {budget}")]
    PrecisionBudget { needed: u32, budget: u32 },

    #[error("signature ({a}, {a}) is split; the classical ordinary locus applies")]
    SplitSignature { a: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn precision(context: impl Into<String>, current: u32) -> Self {
        Error::PrecisionExhausted {
            context: context.into(),
            suggested: current.saturating_mul(2).max(current + 8),
        }
    }
}
