//! Exact rational arithmetic, places of Q, valuations and heights.

mod height;
mod prime;
mod rational;

pub use height::{
    factor_rational, height, height_plus, log_norm, log_plus_norm, partial_height_plus, reassemble,
    valuation, valuation_at, valuation_uint, LogNorm, Valuation,
};
pub use prime::{factor_biguint, factor_u64, is_prime, ExtendedPrime, Prime};
pub use rational::{cmp_abs, ln_biguint, Rational};
