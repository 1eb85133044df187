use thiserror::Error;

/// Errors raised by the arithmetic layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IwaError {
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("precision exhausted: result indistinguishable from zero")]
    PrecisionExhausted,
    #[error("exact zero has no valuation")]
    ZeroValuation,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precision mismatch: {0}")]
    PrecisionMismatch(String),
    #[error("{0}")]
    Divisibility(DivisibilityFailure),
    #[error("not a unit modulo the radical")]
    NonUnit,
    #[error("stabilisation not reached: {0}")]
    NoStabilisation(String),
}

/// Where an exact division broke down.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DivisibilityFailure {
    /// Matrix row (1-based) when raised by the signed factorisation, else `None`.
    pub row: Option<usize>,
    pub tame: usize,
    pub degree: usize,
    /// Valuation of the offending coefficient, as a string ("-3", "1/2", ...).
    pub valuation: String,
    pub reason: String,
}

impl std::fmt::Display for DivisibilityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(r) = self.row {
            write!(f, "row {r}: ")?;
        }
        write!(
            f,
            "divisibility failure at tame {} degree {} (valuation {}): {}",
            self.tame, self.degree, self.valuation, self.reason
        )
    }
}

pub type Result<T> = std::result::Result<T, IwaError>;
