//! Truncated p-adic digit expansions of rationals.
//!
//! A nonzero `q = p^v · r/s` with `p ∤ rs` expands as
//! `Σ d_i p^{v+i}`, where the digits `d_0 d_1 …` are the base-p digits of
//! `r · s⁻¹ mod p^N`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{valuation, Prime, Rational, Valuation};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicExpansion {
    pub p: Prime,
    /// `v_p` of the value, 0 for the zero expansion.
    pub start_exponent: i64,
    /// Digits in `[0, p)`, least significant first.
    pub digits: Vec<u64>,
    pub exact_source: Option<Rational>,
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Expand `q` to `precision` p-adic digits starting at `v_p(q)`.
pub fn expand(q: &Rational, p: Prime, precision: usize) -> Result<PadicExpansion> {
    if precision == 0 {
        return Err(Error::ZeroPrecision(precision));
    }
    let v = match valuation(q, p) {
        Valuation::Infinite => {
            return Ok(PadicExpansion {
                p,
                start_exponent: 0,
                digits: vec![0; precision],
                exact_source: Some(q.clone()),
            })
        }
        Valuation::Finite(v) => v,
    };
    let unit = q * Rational::prime_power(p.get(), -v);
    let modulus = num_traits::pow(BigInt::from(p.get()), precision);
    let inv = mod_inverse(unit.denom(), &modulus);
    let mut residue: BigUint = (unit.numer() * inv)
        .mod_floor(&modulus)
        .to_biguint()
        .expect("non-negative residue");

    let pb = BigUint::from(p.get());
    let mut digits = Vec::with_capacity(precision);
    for _ in 0..precision {
        let (next, d) = residue.div_rem(&pb);
        digits.push(d.to_u64().expect("digit below p"));
        residue = next;
    }
    Ok(PadicExpansion {
        p,
        start_exponent: v,
        digits,
        exact_source: Some(q.clone()),
    })
}

impl PadicExpansion {
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Exponent below which every digit is known. Unbounded for an exact zero.
    pub fn known_below(&self) -> Option<i64> {
        match &self.exact_source {
            Some(q) if q.is_zero() => None,
            _ => Some(self.start_exponent + self.digits.len() as i64),
        }
    }

    /// `Σ d_i p^{start+i}` as an exact rational.
    pub fn resum(&self) -> Rational {
        let p = BigInt::from(self.p.get());
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * &p + BigInt::from(d);
        }
        Rational::from_integer(acc) * Rational::prime_power(self.p.get(), self.start_exponent)
    }

    /// Digit at absolute exponent `e`, when known.
    pub fn digit_at(&self, e: i64) -> Option<u64> {
        if self.known_below().is_some_and(|k| e >= k) {
            return None;
        }
        if e < self.start_exponent {
            return Some(0);
        }
        Some(self.digits.get((e - self.start_exponent) as usize).copied().unwrap_or(0))
    }

    /// Whether two expansions carry the same digits up to the common precision.
    pub fn agrees_with(&self, other: &PadicExpansion) -> bool {
        if self.p != other.p {
            return false;
        }
        let lo = self.start_exponent.min(other.start_exponent);
        let hi = match (self.known_below(), other.known_below()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => return self == other,
        };
        (lo..hi).all(|e| self.digit_at(e) == other.digit_at(e))
    }
}

impl fmt::Display for PadicExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        write!(
            f,
            "{} (base {}), start={}",
            digits.join(" "),
            self.p,
            self.start_exponent
        )
    }
}

/// `ln|q1 − q2|_p`.
pub fn padic_log_distance(q1: &Rational, q2: &Rational, p: Prime) -> Result<f64> {
    let diff = q1 - q2;
    match valuation(&diff, p) {
        Valuation::Infinite => Err(Error::ZeroArgument("padic_log_distance")),
        Valuation::Finite(v) => Ok(-(v as f64) * p.ln()),
    }
}

/// Identifies the ball `q + p^r Z_p`: the nonzero digits below exponent `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallKey {
    pub p: u64,
    pub radius_exponent: i64,
    pub digits: Vec<(i64, u64)>,
}

impl fmt::Display for BallKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}[{}]", self.p, self.radius_exponent)?;
        for (e, d) in &self.digits {
            write!(f, " {d}@{e}")?;
        }
        Ok(())
    }
}

/// Key of the closed ball of radius `p^{-radius_exponent}` containing `e`.
pub fn ball_key(e: &PadicExpansion, radius_exponent: i64) -> Result<BallKey> {
    if let Some(known) = e.known_below() {
        if known < radius_exponent {
            return Err(Error::InsufficientPrecision {
                known,
                needed: radius_exponent,
            });
        }
    }
    let digits = e
        .digits
        .iter()
        .enumerate()
        .map(|(i, &d)| (e.start_exponent + i as i64, d))
        .filter(|&(exp, d)| exp < radius_exponent && d != 0)
        .collect();
    Ok(BallKey {
        p: e.p.get(),
        radius_exponent,
        digits,
    })
}

/// Center-free ball test used by callers holding exact values.
pub fn same_ball(q1: &Rational, q2: &Rational, p: Prime, radius_exponent: i64) -> bool {
    match valuation(&(q1 - q2), p) {
        Valuation::Infinite => true,
        Valuation::Finite(v) => v >= radius_exponent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn two() -> Prime {
        Prime::new(2).unwrap()
    }

    #[test]
    fn expand_examples() {
        let e = expand(&Rational::from(5), two(), 4).unwrap();
        assert_eq!((e.start_exponent, e.digits.clone()), (0, vec![1, 0, 1, 0]));
        let e = expand(&Rational::frac(1, 2), two(), 3).unwrap();
        assert_eq!((e.start_exponent, e.digits.clone()), (-1, vec![1, 0, 0]));
    }

    #[test]
    fn expand_one_third_matches_modular_inverse() {
        // oracle: 3 * 11 = 33 ≡ 1 (mod 16), and 11 = 1 + 2 + 8
        let inv = (1..16u64).find(|x| (3 * x) % 16 == 1).unwrap();
        assert_eq!(inv, 11);
        let oracle: Vec<u64> = (0..4).map(|i| (inv >> i) & 1).collect();
        let e = expand(&Rational::frac(1, 3), two(), 4).unwrap();
        assert_eq!(e.start_exponent, 0);
        assert_eq!(e.digits, oracle);
        assert_eq!(e.digits, vec![1, 1, 0, 1]);
    }

    #[test]
    fn expand_negative_and_zero() {
        // -1 = ...1111 in Z_2
        let e = expand(&Rational::from(-1), two(), 5).unwrap();
        assert_eq!(e.digits, vec![1; 5]);
        let z = expand(&Rational::zero(), two(), 3).unwrap();
        assert_eq!((z.start_exponent, z.digits.clone()), (0, vec![0, 0, 0]));
        assert!(z.is_zero());
        assert_eq!(expand(&Rational::one(), two(), 0), Err(Error::ZeroPrecision(0)));
    }

    #[test]
    fn render() {
        let e = expand(&Rational::from(5), two(), 4).unwrap();
        assert_eq!(e.to_string(), "1 0 1 0 (base 2), start=0");
    }

    #[test]
    fn log_distance_examples() {
        let d = padic_log_distance(&Rational::from(1), &Rational::from(9), two()).unwrap();
        assert!((d + 3.0 * LN_2).abs() < 1e-12);
        let third = Rational::frac(1, 3);
        let d = padic_log_distance(&third, &(&third + Rational::from(4)), two()).unwrap();
        assert!((d + 2.0 * LN_2).abs() < 1e-12);
        let d = padic_log_distance(&Rational::zero(), &Rational::frac(1, 4), two()).unwrap();
        assert!((d - 2.0 * LN_2).abs() < 1e-12);
        assert!(padic_log_distance(&third, &third, two()).is_err());
    }

    #[test]
    fn ball_key_examples() {
        let one = expand(&Rational::from(1), two(), 8).unwrap();
        let nine = expand(&Rational::from(9), two(), 8).unwrap();
        assert_eq!(ball_key(&one, 3).unwrap(), ball_key(&nine, 3).unwrap());
        assert_ne!(ball_key(&one, 4).unwrap(), ball_key(&nine, 4).unwrap());

        let zero = expand(&Rational::zero(), two(), 8).unwrap();
        for k in 0..8 {
            let q = Rational::prime_power(2, k) * Rational::from(3);
            let e = expand(&q, two(), 8).unwrap();
            assert_eq!(ball_key(&zero, k).unwrap(), ball_key(&e, k).unwrap());
        }
    }

    #[test]
    fn ball_key_precision_guard() {
        let e = expand(&Rational::frac(1, 3), two(), 4).unwrap();
        assert_eq!(
            ball_key(&e, 5),
            Err(Error::InsufficientPrecision { known: 4, needed: 5 })
        );
        // exact zero is known at every precision
        let z = expand(&Rational::zero(), two(), 2).unwrap();
        assert!(ball_key(&z, 40).is_ok());
    }

    #[test]
    fn agreement_across_precisions() {
        let q = Rational::frac(7, 12);
        let short = expand(&q, two(), 6).unwrap();
        let long = expand(&q, two(), 20).unwrap();
        assert!(short.agrees_with(&long));
        let other = expand(&(q + Rational::prime_power(2, 3)), two(), 20).unwrap();
        assert!(!short.agrees_with(&other));
    }
}
