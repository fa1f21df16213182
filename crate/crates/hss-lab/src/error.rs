use thiserror::Error;

/// Errors surfaced by the library. Scalar arithmetic on mismatched fields
/// panics instead (see `field`); every fallible API returns one of these.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("modulus {0} is not below 2^61")]
    ModulusTooLarge(u64),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("operands belong to different fields (moduli {0} and {1})")]
    ModulusMismatch(u64, u64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular")]
    Singular,

    #[error("evaluation points must be distinct and nonzero (offending residue {0})")]
    DuplicatePoint(u64),

    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid scheme parameters: {0}")]
    ParamViolation(String),

    #[error("polynomial degree {degree} exceeds the evaluation bound {bound}")]
    DegreeViolation { degree: u64, bound: u64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("server index {index} outside 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("enumeration of {required} cases exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("inputs are not related coordinatewise by the given nonzero scalars")]
    ScalarMismatch,

    #[error("invalid distinguisher input pair: {0}")]
    InvalidPair(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
