//! Valuations, absolute values and heights on Q.
//!
//! Heights are evaluated from the reduced fraction `r/s`:
//! `⟨r/s⟩ = ln|r| + ln s` and `⟨r/s⟩⁺ = ln max(|r|, s)`. Per-prime quantities
//! are only ever computed at explicitly requested primes, so no factoring of
//! walk values is needed.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;

use super::prime::{ExtendedPrime, Prime};
use super::rational::{ln_biguint, Rational};
use crate::error::{Error, Result};

/// p-adic valuation; `Infinite` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

/// Exponent of `p` in a positive integer.
pub fn valuation_uint(n: &BigUint, p: Prime) -> u64 {
    if n.is_zero() {
        panic!("valuation of zero integer");
    }
    let p = p.get();
    if p == 2 {
        return n.trailing_zeros().unwrap_or(0);
    }
    // strip the largest power of p that fits in a word at a time
    let mut chunk = p;
    let mut chunk_exp = 1u64;
    while let Some(next) = chunk.checked_mul(p) {
        chunk = next;
        chunk_exp += 1;
    }
    let chunk_big = BigUint::from(chunk);
    let mut m = n.clone();
    let mut v = 0u64;
    loop {
        let (q, r) = m.div_rem(&chunk_big);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += chunk_exp;
    }
    let p_small = BigUint::from(p);
    loop {
        let (q, r) = m.div_rem(&p_small);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    v
}

/// `v_p(q)`, with [`Valuation::Infinite`] for `q = 0`.
pub fn valuation(q: &Rational, p: Prime) -> Valuation {
    if q.is_zero() {
        return Valuation::Infinite;
    }
    let num = valuation_uint(q.numer().magnitude(), p) as i64;
    let den = valuation_uint(q.denom().magnitude(), p) as i64;
    Valuation::Finite(num - den)
}

/// `ln|q|_p` together with the exact valuation when `p` is finite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNorm {
    pub valuation: Option<i64>,
    pub value: f64,
}

pub fn log_norm(q: &Rational, p: ExtendedPrime) -> Result<LogNorm> {
    if q.is_zero() {
        return Err(Error::ZeroArgument("log_norm"));
    }
    Ok(match p {
        ExtendedPrime::Finite(p) => {
            let v = valuation(q, p).finite().expect("nonzero");
            LogNorm {
                valuation: Some(v),
                value: -(v as f64) * p.ln(),
            }
        }
        ExtendedPrime::Infinity => LogNorm {
            valuation: None,
            value: q.ln_abs(),
        },
    })
}

/// `ln⁺|q|_p`; zero contributes nothing.
pub fn log_plus_norm(q: &Rational, p: ExtendedPrime) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    match p {
        ExtendedPrime::Finite(p) => {
            // only primes of the denominator can make |q|_p exceed 1
            let den_v = valuation_uint(q.denom().magnitude(), p);
            den_v as f64 * p.ln()
        }
        ExtendedPrime::Infinity => q.ln_abs().max(0.0),
    }
}

/// `⟨q⟩ = Σ_p |ln|q|_p| = ln|num| + ln den`.
pub fn height(q: &Rational) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroArgument("height"));
    }
    Ok(ln_biguint(q.numer().magnitude()) + ln_biguint(q.denom().magnitude()))
}

/// `⟨q⟩⁺ = Σ_{p ≤ ∞} ln⁺|q|_p = ln max(|num|, den)`, and 0 at q = 0.
pub fn height_plus(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    ln_biguint(num.max(den))
}

/// Sum of `ln⁺|z_p|_p` over the places in `places`; absent coordinates are 0.
pub fn partial_height_plus(
    z: &BTreeMap<ExtendedPrime, Rational>,
    places: &BTreeSet<ExtendedPrime>,
) -> f64 {
    places
        .iter()
        .filter_map(|p| z.get(p).map(|q| log_plus_norm(q, *p)))
        .sum()
}

/// `Π p^{v_p}` over the given factorization, as an exact rational.
pub fn reassemble(factors: &[(u64, i64)]) -> Rational {
    factors
        .iter()
        .fold(Rational::one(), |acc, &(p, e)| acc * Rational::prime_power(p, e))
}

/// Exact signed-exponent factorization of a nonzero rational whose numerator
/// and denominator fit in 64 bits.
pub fn factor_rational(q: &Rational) -> Result<Vec<(u64, i64)>> {
    if q.is_zero() {
        return Err(Error::ZeroArgument("factor_rational"));
    }
    let mut out: BTreeMap<u64, i64> = BTreeMap::new();
    for (p, e) in super::prime::factor_biguint(q.numer().magnitude())? {
        *out.entry(p).or_default() += e as i64;
    }
    for (p, e) in super::prime::factor_biguint(q.denom().magnitude())? {
        *out.entry(p).or_default() -= e as i64;
    }
    Ok(out.into_iter().filter(|(_, e)| *e != 0).collect())
}

/// Small helper for callers holding a `u64` prime.
pub fn valuation_at(q: &Rational, p: u64) -> Result<Valuation> {
    Ok(valuation(q, Prime::new(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn ep(n: u64) -> ExtendedPrime {
        ExtendedPrime::finite(n).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let q = Rational::frac(12, 5);
        assert_eq!(valuation(&q, p(2)), Valuation::Finite(2));
        assert_eq!(valuation(&q, p(5)), Valuation::Finite(-1));
        assert_eq!(valuation(&Rational::zero(), p(3)), Valuation::Infinite);
        assert_eq!(valuation_at(&q, 4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn valuation_of_large_powers() {
        let q = Rational::prime_power(3, 500) * Rational::frac(2, 7);
        assert_eq!(valuation(&q, p(3)), Valuation::Finite(500));
        assert_eq!(valuation(&q, p(7)), Valuation::Finite(-1));
        let q = Rational::prime_power(2, -700);
        assert_eq!(valuation(&q, p(2)), Valuation::Finite(-700));
    }

    #[test]
    fn log_norm_examples() {
        let q = Rational::frac(12, 5);
        let ln = log_norm(&q, ep(2)).unwrap();
        assert_eq!(ln.valuation, Some(2));
        assert!((ln.value + 2.0 * LN_2).abs() < 1e-12);
        for prime in [ep(2), ep(3), ep(101), ExtendedPrime::Infinity] {
            assert_eq!(log_norm(&Rational::one(), prime).unwrap().value, 0.0);
        }
        let real = log_norm(&q, ExtendedPrime::Infinity).unwrap();
        assert!((real.value - 2.4f64.ln()).abs() < 1e-12);
        assert_eq!(log_norm(&Rational::zero(), ep(2)), Err(Error::ZeroArgument("log_norm")));
    }

    #[test]
    fn height_examples() {
        assert!((height(&Rational::frac(3, 4)).unwrap() - 12f64.ln()).abs() < 1e-12);
        assert!((height(&Rational::frac(3, 4)).unwrap() - 2.48490665).abs() < 1e-8);
        assert_eq!(height(&Rational::one()).unwrap(), 0.0);
        assert_eq!(height(&Rational::from(-1)).unwrap(), 0.0);
        assert!((height(&Rational::from(-6)).unwrap() - 6f64.ln()).abs() < 1e-12);
        assert!(height(&Rational::zero()).is_err());
    }

    #[test]
    fn height_plus_examples() {
        assert!((height_plus(&Rational::frac(3, 4)) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(height_plus(&Rational::zero()), 0.0);
        assert!((height_plus(&Rational::frac(5, 2)) - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn height_plus_is_sum_of_local_terms() {
        // ⟨q⟩⁺ over all places equals the sum of ln⁺ at ∞ and the denominator primes
        for q in [Rational::frac(3, 4), Rational::frac(-50, 63), Rational::frac(1001, 2)] {
            let mut places: BTreeSet<ExtendedPrime> = factor_rational(&q)
                .unwrap()
                .into_iter()
                .map(|(p, _)| ep(p))
                .collect();
            places.insert(ExtendedPrime::Infinity);
            let z: BTreeMap<_, _> = places.iter().map(|p| (*p, q.clone())).collect();
            assert!((partial_height_plus(&z, &places) - height_plus(&q)).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_height_examples() {
        let q = Rational::frac(3, 4);
        // |3/4|_2 = 4 and |3/4|_∞ < 1
        let z = BTreeMap::from([(ep(2), q.clone()), (ExtendedPrime::Infinity, q.clone())]);
        let places = BTreeSet::from([ep(2), ExtendedPrime::Infinity]);
        assert!((partial_height_plus(&z, &places) - 2.0 * LN_2).abs() < 1e-12);
        // |3/4|_3 = 1/3
        let z = BTreeMap::from([(ep(3), q.clone()), (ExtendedPrime::Infinity, q)]);
        let places = BTreeSet::from([ep(3), ExtendedPrime::Infinity]);
        assert_eq!(partial_height_plus(&z, &places), 0.0);

        let z = BTreeMap::from([(ep(2), Rational::frac(1, 2))]);
        assert!((partial_height_plus(&z, &BTreeSet::from([ep(2)])) - LN_2).abs() < 1e-12);
        assert_eq!(partial_height_plus(&z, &BTreeSet::new()), 0.0);
        // missing coordinate counts as zero
        assert_eq!(partial_height_plus(&z, &BTreeSet::from([ep(3)])), 0.0);
    }

    #[test]
    fn factor_and_reassemble() {
        let q = Rational::frac(-360, 49);
        let f = factor_rational(&q).unwrap();
        assert_eq!(f, vec![(2, 3), (3, 2), (5, 1), (7, -2)]);
        assert_eq!(reassemble(&f), q.abs());
    }
}
