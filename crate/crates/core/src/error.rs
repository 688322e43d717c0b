use thiserror::Error;

use crate::arith::ExtendedPrime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime number")]
    NotPrime(u64),

    #[error("{0} is undefined at zero")]
    ZeroArgument(&'static str),

    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("integer {0} is too large to factor (limit is 64 bits)")]
    FactorizationTooLarge(String),

    #[error("precision {0} must be at least 1")]
    ZeroPrecision(usize),

    #[error("insufficient precision: digits known below exponent {known}, ball needs exponent {needed}")]
    InsufficientPrecision { known: i64, needed: i64 },

    #[error("expansions over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),

    #[error("invalid step distribution: {0}")]
    InvalidMeasure(String),

    #[error("degenerate step distribution: {0}")]
    DegenerateMeasure(String),

    #[error("place {0} is not contracting (drift is not negative)")]
    NonContracting(ExtendedPrime),

    #[error("place {0} is contracting (drift is negative)")]
    Contracting(ExtendedPrime),

    #[error("gauge radius {k} exceeds the enumeration cap {cap}")]
    GaugeCapExceeded { k: f64, cap: f64 },

    #[error("convolution budget exceeded at n = {n}: {cells} cells requested from a table of size {reached}, budget {budget}")]
    BudgetExceeded {
        n: usize,
        reached: usize,
        cells: usize,
        budget: usize,
    },

    #[error("walk did not stabilize within {steps} steps")]
    StabilizationFailed { steps: usize },

    #[error("insufficient stabilization depth: requested n = {n}, boundary stabilized at {stabilized}")]
    InsufficientStabilization { n: usize, stabilized: usize },

    #[error("exact value exceeded the bit-size guard of {limit} bits at step {step}")]
    BitSizeExceeded { step: usize, limit: u64 },

    #[error("trajectory too short: needed {needed} steps, have {have}")]
    TrajectoryTooShort { needed: usize, have: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
