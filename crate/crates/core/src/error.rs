use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("degenerate map: |resultant| = {resultant:e} is not above {threshold:e}")]
    DegenerateMap { resultant: f64, threshold: f64 },

    #[error("effective degree {degree} is below 2")]
    DegreeTooLow { degree: usize },

    #[error("budget exceeded: {needed} roots requested, cap is {cap}")]
    BudgetExceeded { needed: u128, cap: usize },

    #[error("derivative is indeterminate at the given point")]
    IndeterminateDerivative,

    #[error("root finder did not converge (worst residual {worst_residual:e})")]
    NoConvergence { worst_residual: f64 },

    #[error("derivative denominator is not invertible modulo the fixed-point polynomial")]
    SingularReduction,

    #[error("a multiplier lies within {tolerance:e} of 1")]
    ParabolicPresent { tolerance: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("zero-multiplier counts are inconsistent at level {level}")]
    InconsistentZeroCounts { level: usize },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("not realizable by a quadratic map: {0}")]
    NotRealizable(String),

    #[error("singular curve: discriminant {discriminant} vanishes")]
    SingularCurve { discriminant: num_complex::Complex64 },

    #[error("spectra differ (distance {distance:e})")]
    SpectraDiffer { distance: f64 },

    #[error("duplicate id {0} with a different payload")]
    DuplicateId(String),

    #[error("catalog line {line}: {reason}")]
    CorruptEntry { line: usize, reason: String },

    #[error("catalog header missing or unsupported: {0:?}")]
    BadHeader(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(offset: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    /// True for failures of the numerical engine, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::IndeterminateDerivative
                | Error::SingularReduction
                | Error::InconsistentZeroCounts { .. }
                | Error::ParabolicPresent { .. }
        )
    }
}
