use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use super::StepDistribution;
use crate::arith::{factor_rational, height, height_plus, ExtendedPrime, Prime, Rational};
use crate::error::Result;

/// Above this many bits the exact sign test for the real drift falls back to floats.
const EXACT_SIGN_BIT_LIMIT: u64 = 1 << 22;

/// Drifts `φ_p = E[ln|a|_p]` of a finitely supported step law.
///
/// Each finite drift is kept exactly as `φ_p = −c_p · ln p` with the rational
/// coefficient `c_p = Σ w · v_p(a)`, so sign tests never depend on rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftProfile {
    coefficients: BTreeMap<Prime, Rational>,
    infinite_drift: f64,
}

impl DriftProfile {
    pub fn of(mu: &StepDistribution) -> Result<Self> {
        let mut coefficients: BTreeMap<Prime, Rational> = BTreeMap::new();
        let mut infinite_drift = 0.0;
        for (g, w) in mu.atoms() {
            for (p, v) in factor_rational(g.a())? {
                let p = Prime::new(p)?;
                let c = coefficients.entry(p).or_insert_with(Rational::zero);
                *c = &*c + w * Rational::from(v);
            }
            infinite_drift += w.to_f64() * g.a().ln_abs();
        }
        Ok(DriftProfile {
            coefficients,
            infinite_drift,
        })
    }

    /// Profile with every drift zero.
    pub fn zero() -> Self {
        DriftProfile {
            coefficients: BTreeMap::new(),
            infinite_drift: 0.0,
        }
    }

    /// `c_p = Σ w v_p(a)`; zero for primes dividing no atom.
    pub fn coefficient(&self, p: Prime) -> Rational {
        self.coefficients.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    /// Primes dividing the numerator or denominator of some atom's `a`.
    pub fn primes(&self) -> impl Iterator<Item = Prime> + '_ {
        self.coefficients.keys().copied()
    }

    pub fn finite_drifts(&self) -> BTreeMap<Prime, f64> {
        self.coefficients
            .iter()
            .map(|(p, c)| (*p, -c.to_f64() * p.ln()))
            .collect()
    }

    /// `φ_∞` as computed directly from `E[ln|a|]`.
    pub fn infinite_drift(&self) -> f64 {
        self.infinite_drift
    }

    pub fn drift(&self, p: ExtendedPrime) -> f64 {
        match p {
            ExtendedPrime::Finite(p) => -self.coefficient(p).to_f64() * p.ln(),
            ExtendedPrime::Infinity => self.infinite_drift,
        }
    }

    /// `φ_p / ln p` for finite `p`, exactly.
    pub fn drift_over_log(&self, p: Prime) -> Rational {
        -self.coefficient(p)
    }

    /// `φ_∞ + Σ_p φ_p`, which vanishes by the product formula.
    pub fn product_formula_residual(&self) -> f64 {
        self.infinite_drift + self.finite_drifts().values().sum::<f64>()
    }

    /// Exact sign of `φ_p`: −1, 0 or 1.
    pub fn drift_sign(&self, p: ExtendedPrime) -> i8 {
        match p {
            ExtendedPrime::Finite(p) => {
                let c = self.coefficient(p);
                if c.is_zero() {
                    0
                } else if c.is_negative() {
                    1
                } else {
                    -1
                }
            }
            ExtendedPrime::Infinity => self.infinite_sign(),
        }
    }

    // φ_∞ = Σ c_p ln p = ln Π p^{c_p}; compare the two sides of Π p^{D c_p} = 1 exactly
    fn infinite_sign(&self) -> i8 {
        let common = self
            .coefficients
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut up = BigUint::one();
        let mut down = BigUint::one();
        let mut bits = 0u64;
        for (p, c) in &self.coefficients {
            let e = (c.numer() * &common) / c.denom();
            let Some(e_abs) = e.abs().to_u64() else {
                return float_sign(self.infinite_drift);
            };
            bits = bits.saturating_add(e_abs.saturating_mul(64 - p.get().leading_zeros() as u64));
            if bits > EXACT_SIGN_BIT_LIMIT {
                return float_sign(self.infinite_drift);
            }
            let power = num_traits::pow(BigUint::from(p.get()), e_abs as usize);
            if e.is_positive() {
                up *= power;
            } else {
                down *= power;
            }
        }
        match up.cmp(&down) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn is_contracting(&self, p: ExtendedPrime) -> bool {
        self.drift_sign(p) < 0
    }

    /// The places with negative drift. Finite for finitely supported laws.
    pub fn contracting_set(&self) -> BTreeSet<ExtendedPrime> {
        let mut set: BTreeSet<ExtendedPrime> = self
            .primes()
            .map(ExtendedPrime::Finite)
            .filter(|p| self.is_contracting(*p))
            .collect();
        if self.is_contracting(ExtendedPrime::Infinity) {
            set.insert(ExtendedPrime::Infinity);
        }
        set
    }

    /// Places with a nonzero drift, ∞ included when its drift is nonzero.
    pub fn nonzero_places(&self) -> BTreeSet<ExtendedPrime> {
        let mut set: BTreeSet<ExtendedPrime> = self
            .coefficients
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, _)| ExtendedPrime::Finite(*p))
            .collect();
        if self.drift_sign(ExtendedPrime::Infinity) != 0 {
            set.insert(ExtendedPrime::Infinity);
        }
        set
    }

    /// `φ_p⁺ = max(φ_p, 0)`.
    pub fn drift_plus(&self, p: ExtendedPrime) -> f64 {
        if self.drift_sign(p) > 0 {
            self.drift(p)
        } else {
            0.0
        }
    }

    /// `φ_p⁻ = max(−φ_p, 0)`.
    pub fn drift_minus(&self, p: ExtendedPrime) -> f64 {
        if self.drift_sign(p) < 0 {
            -self.drift(p)
        } else {
            0.0
        }
    }

    /// `q_n = Π_p p^{−⌊n φ_p / ln p⌋}`, the rational whose p-adic sizes track `A_n`.
    pub fn q_n(&self, n: u64) -> Rational {
        let n = Rational::from_integer(BigInt::from(n));
        self.coefficients
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .fold(Rational::one(), |acc, (p, c)| {
                let exponent = (&n * -c).floor();
                let exponent = exponent.to_i64().expect("exponent fits in i64");
                acc * Rational::prime_power(p.get(), -exponent)
            })
    }

    pub fn rows(&self) -> Vec<DriftRow> {
        let mut rows: Vec<DriftRow> = self
            .coefficients
            .iter()
            .map(|(p, c)| DriftRow {
                place: ExtendedPrime::Finite(*p),
                drift: -c.to_f64() * p.ln(),
                log_coefficient: Some(-c.clone()),
                contracting: self.is_contracting(ExtendedPrime::Finite(*p)),
            })
            .collect();
        rows.push(DriftRow {
            place: ExtendedPrime::Infinity,
            drift: self.infinite_drift,
            log_coefficient: None,
            contracting: self.is_contracting(ExtendedPrime::Infinity),
        });
        rows
    }
}

fn float_sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// One line of a drift table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRow {
    pub place: ExtendedPrime,
    pub drift: f64,
    /// `φ_p / ln p` as an exact rational, for finite places.
    pub log_coefficient: Option<Rational>,
    pub contracting: bool,
}

impl fmt::Display for DriftProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            writeln!(f, "{}\t{}\t{}", row.place, row.drift, row.contracting)?;
        }
        Ok(())
    }
}

/// `E[‖(a, b)‖] = Σ w (⟨a⟩ + ⟨b⟩⁺)`.
pub fn first_moment(mu: &StepDistribution) -> f64 {
    mu.atoms()
        .iter()
        .map(|(g, w)| w.to_f64() * (height(g.a()).expect("a ≠ 0") + height_plus(g.b())))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn mu(atoms: &[super::super::AtomFractions]) -> StepDistribution {
        StepDistribution::from_fractions(atoms).unwrap()
    }

    fn bias() -> StepDistribution {
        mu(&[((2, 1), (0, 1), (1, 4)), ((1, 2), (1, 1), (3, 4))])
    }

    fn sym() -> StepDistribution {
        mu(&[((2, 1), (0, 1), (1, 2)), ((1, 2), (1, 1), (1, 2))])
    }

    fn rev() -> StepDistribution {
        mu(&[((2, 1), (0, 1), (3, 4)), ((1, 2), (1, 1), (1, 4))])
    }

    fn two() -> ExtendedPrime {
        ExtendedPrime::finite(2).unwrap()
    }

    #[test]
    fn drift_examples() {
        let d = DriftProfile::of(&bias()).unwrap();
        assert!((d.drift(two()) - 0.5 * LN_2).abs() < 1e-12);
        assert!((d.drift(ExtendedPrime::Infinity) + 0.5 * LN_2).abs() < 1e-12);
        assert_eq!(d.drift(ExtendedPrime::finite(3).unwrap()), 0.0);
        assert_eq!(d.drift_over_log(Prime::new(2).unwrap()), Rational::frac(1, 2));
        assert!(d.product_formula_residual().abs() < 1e-12);
    }

    #[test]
    fn contracting_sets() {
        let inf = BTreeSet::from([ExtendedPrime::Infinity]);
        assert_eq!(DriftProfile::of(&bias()).unwrap().contracting_set(), inf);
        assert!(DriftProfile::of(&sym()).unwrap().contracting_set().is_empty());
        assert_eq!(DriftProfile::of(&rev()).unwrap().contracting_set(), BTreeSet::from([two()]));
    }

    #[test]
    fn exact_sign_at_infinity_with_several_primes() {
        // a = 2 w.p. 1/2 and a = 1/3 w.p. 1/2: φ_∞ = (ln 2 − ln 3)/2 < 0
        let d = DriftProfile::of(&mu(&[((2, 1), (0, 1), (1, 2)), ((1, 3), (1, 1), (1, 2))])).unwrap();
        assert_eq!(d.drift_sign(ExtendedPrime::Infinity), -1);
        // a = 8 w.p. 1/3 and a = 1/2 w.p. 2/3: φ_∞ = (1/3)·ln 2 > 0
        let d = DriftProfile::of(&mu(&[((8, 1), (0, 1), (1, 3)), ((1, 2), (1, 1), (2, 3))])).unwrap();
        assert_eq!(d.drift_sign(ExtendedPrime::Infinity), 1);
        // a = 4 w.p. 1/3 and 1/2 w.p. 2/3: exactly zero drift everywhere
        let d = DriftProfile::of(&mu(&[((4, 1), (0, 1), (1, 3)), ((1, 2), (1, 1), (2, 3))])).unwrap();
        assert_eq!(d.drift_sign(ExtendedPrime::Infinity), 0);
        assert_eq!(d.drift_sign(two()), 0);
    }

    #[test]
    fn first_moment_examples() {
        assert!((first_moment(&sym()) - LN_2).abs() < 1e-12);
        assert!((first_moment(&bias()) - LN_2).abs() < 1e-12);
        let shift = mu(&[((1, 1), (1, 1), (1, 2)), ((2, 1), (0, 1), (1, 2))]);
        // the (1, 1) atom contributes nothing
        assert!((first_moment(&shift) - 0.5 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn q_n_examples() {
        let rev = DriftProfile::of(&rev()).unwrap();
        assert_eq!(rev.q_n(10), Rational::from(32));
        assert_eq!(DriftProfile::zero().q_n(17), Rational::one());
        let bias = DriftProfile::of(&bias()).unwrap();
        assert_eq!(bias.q_n(3), Rational::frac(1, 2));
        assert_eq!(bias.q_n(0), Rational::one());
    }

    #[test]
    fn reflected_drifts_are_negated() {
        for m in [bias(), sym(), rev()] {
            let d = DriftProfile::of(&m).unwrap();
            let r = DriftProfile::of(&m.reflect()).unwrap();
            for p in [two(), ExtendedPrime::Infinity] {
                assert!((d.drift(p) + r.drift(p)).abs() < 1e-12);
            }
        }
        let r = DriftProfile::of(&bias().reflect()).unwrap();
        assert!((r.drift(two()) + 0.5 * LN_2).abs() < 1e-12);
        assert!(DriftProfile::of(&sym().reflect()).unwrap().nonzero_places().is_empty());
    }

    #[test]
    fn drift_split() {
        let d = DriftProfile::of(&bias()).unwrap();
        assert!((d.drift_plus(two()) - 0.5 * LN_2).abs() < 1e-12);
        assert_eq!(d.drift_minus(two()), 0.0);
        assert!((d.drift_minus(ExtendedPrime::Infinity) - 0.5 * LN_2).abs() < 1e-12);
        assert_eq!(d.drift_plus(ExtendedPrime::Infinity), 0.0);
    }
}
