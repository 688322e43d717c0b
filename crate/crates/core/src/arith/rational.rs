use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with a positive denominator.
///
/// Zero is `0/1`. All arithmetic is exact; division by zero is reported
/// through [`Rational::checked_div`] and panics through the `/` operator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// Convenience constructor for small fractions; panics on a zero denominator.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs_numer(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denom_u(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    /// Integer power, negative exponents allowed for nonzero values.
    pub fn pow(&self, exp: i64) -> Result<Self> {
        if exp < 0 && self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let e = i32::try_from(exp).map_err(|_| Error::Parse {
            what: "exponent",
            input: exp.to_string(),
        })?;
        Ok(Rational(num_traits::Pow::pow(&self.0, e)))
    }

    /// `p^k` for a (possibly negative) integer exponent.
    pub fn prime_power(p: u64, k: i64) -> Self {
        let mag = num_traits::pow::pow(BigInt::from(p), k.unsigned_abs() as usize);
        if k >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational(BigRational::new(BigInt::one(), mag))
        }
    }

    /// Nearest-ish float; saturates to ±inf only for astronomically large values.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let ln = self.ln_abs();
        let sign = if self.is_negative() { -1.0 } else { 1.0 };
        if ln.abs() < 700.0 {
            if let (Some(n), Some(d)) = (self.numer().to_f64(), self.denom().to_f64()) {
                if n.is_finite() && d.is_finite() {
                    return n / d;
                }
            }
        }
        sign * ln.exp()
    }

    /// `ln |q|`, computed from the bit representation so it never overflows.
    /// Panics on zero; callers check first.
    pub fn ln_abs(&self) -> f64 {
        assert!(!self.is_zero(), "ln of zero");
        ln_biguint(self.numer().magnitude()) - ln_biguint(self.denom().magnitude())
    }

    /// Total bit size of numerator and denominator.
    pub fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }
}

/// Natural logarithm of a positive big integer, accurate to float precision
/// regardless of magnitude.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().expect("finite below 2^1000").ln()
    } else {
        let shift = bits - 64;
        let top = (n >> shift).to_u64().expect("64 leading bits");
        (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<BigInt> for Rational {
    fn from(value: BigInt) -> Self {
        Rational::from_integer(value)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "rational",
            input: s.to_string(),
        };
        let s_trim = s.trim();
        let (n, d) = match s_trim.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s_trim, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if d.sign() == Sign::NoSign {
            return Err(bad());
        }
        Rational::new(n, d)
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(n) => Ok(Rational::from(n)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Compare `|x|` for two rationals without allocating a float.
pub fn cmp_abs(x: &Rational, y: &Rational) -> Ordering {
    (x.numer().magnitude() * y.denom().magnitude()).cmp(&(y.numer().magnitude() * x.denom().magnitude()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let q = Rational::frac(6, -8);
        assert_eq!(q.to_string(), "-3/4");
        assert_eq!(Rational::zero().to_string(), "0/1");
        assert_eq!(Rational::frac(0, -5), Rational::zero());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("-3/4".parse::<Rational>().unwrap(), Rational::frac(-3, 4));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::from(7));
        assert_eq!(" 2 / 4 ".parse::<Rational>().unwrap(), Rational::frac(1, 2));
        assert_eq!("3/-6".parse::<Rational>().unwrap(), Rational::frac(-1, 2));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        assert!("".parse::<Rational>().is_err());
    }

    #[test]
    fn floor_of_negative() {
        assert_eq!(Rational::frac(-5, 1).floor(), BigInt::from(-5));
        assert_eq!(Rational::frac(-1, 2).floor(), BigInt::from(-1));
        assert_eq!(Rational::frac(3, 2).floor(), BigInt::from(1));
    }

    #[test]
    fn ln_of_huge_values() {
        let big = BigUint::one() << 5000u32;
        let ln = ln_biguint(&big);
        assert!((ln - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        let q = Rational::from_integer(BigInt::from(big)) / Rational::from(3);
        assert!((q.ln_abs() - (5000.0 * std::f64::consts::LN_2 - 3f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn prime_power_signs() {
        assert_eq!(Rational::prime_power(2, 5), Rational::from(32));
        assert_eq!(Rational::prime_power(3, -2), Rational::frac(1, 9));
        assert_eq!(Rational::prime_power(7, 0), Rational::one());
    }
}
