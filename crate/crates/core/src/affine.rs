//! The rational affine group, its extension over the adeles, adelic length
//! and gauges.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;

use crate::arith::{height, height_plus, log_plus_norm, ExtendedPrime, Rational};
use crate::error::{Error, Result};

/// Slack used when comparing adelic lengths against a float radius.
pub const GAUGE_TOLERANCE: f64 = 1e-12;

/// Default cap on the radius accepted by [`gauge_enumerate`].
pub const DEFAULT_GAUGE_CAP: f64 = 5.0;

/// The affinity `x ↦ a·x + b`, `a ≠ 0`.
///
/// Ordered lexicographically by `(a, b)` as rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineMap {
    a: Rational,
    b: Rational,
}

impl AffineMap {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroArgument("affine map with a = 0"));
        }
        Ok(AffineMap { a, b })
    }

    /// Small-fraction constructor for tests and examples; panics on `a = 0`.
    pub fn of(a: (i64, i64), b: (i64, i64)) -> Self {
        AffineMap::new(Rational::frac(a.0, a.1), Rational::frac(b.0, b.1)).expect("a ≠ 0")
    }

    pub fn identity() -> Self {
        AffineMap {
            a: Rational::one(),
            b: Rational::zero(),
        }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// `self ∘ other`: `(a, b)(a', b') = (aa', ab' + b)`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            a: &self.a * &other.a,
            b: &self.a * &other.b + &self.b,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv_a = self.a.recip().expect("a ≠ 0");
        AffineMap {
            b: -(&self.b * &inv_a),
            a: inv_a,
        }
    }

    pub fn act(&self, z: &Rational) -> Rational {
        &self.a * z + &self.b
    }

    /// The unique rational fixed point, when `a ≠ 1`.
    pub fn fixed_point(&self) -> Option<Rational> {
        if self.a.is_one() {
            return None;
        }
        Some(&self.b / (Rational::one() - &self.a))
    }

    pub fn embed(&self) -> HPoint {
        HPoint {
            a: self.a.clone(),
            base: self.b.clone(),
            overrides: BTreeMap::new(),
        }
    }

    /// `‖(a, b)‖ = ⟨a⟩ + ⟨b⟩⁺`.
    pub fn adelic_length(&self) -> f64 {
        height(&self.a).expect("a ≠ 0") + height_plus(&self.b)
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={};b={}", self.a, self.b)
    }
}

impl fmt::Debug for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

impl FromStr for AffineMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "affine map",
            input: s.to_string(),
        };
        let (a_part, b_part) = s.split_once(';').ok_or_else(bad)?;
        let a = a_part.trim().strip_prefix("a=").ok_or_else(bad)?;
        let b = b_part.trim().strip_prefix("b=").ok_or_else(bad)?;
        AffineMap::new(a.parse()?, b.parse()?)
    }
}

/// A point `(a, (z_p)_p)` of `Q* × A`, with exact rational coordinates.
///
/// The translation is stored as a diagonal `base` value shared by every place
/// plus finitely many per-place `overrides`. A diagonal embedding of an
/// affinity has no overrides; a finitely supported coordinate map has base 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPoint {
    a: Rational,
    base: Rational,
    overrides: BTreeMap<ExtendedPrime, Rational>,
}

impl HPoint {
    /// A point with the given coordinates at listed places and 0 elsewhere.
    pub fn from_coordinates(a: Rational, coords: BTreeMap<ExtendedPrime, Rational>) -> Result<Self> {
        Self::with_base(a, Rational::zero(), coords)
    }

    /// Coordinates `coords` at listed places and `base` elsewhere.
    pub fn with_base(
        a: Rational,
        base: Rational,
        coords: BTreeMap<ExtendedPrime, Rational>,
    ) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroArgument("H point with a = 0"));
        }
        let mut y = HPoint {
            a,
            base,
            overrides: coords,
        };
        y.normalize();
        Ok(y)
    }

    fn normalize(&mut self) {
        let base = &self.base;
        self.overrides.retain(|_, z| z != base);
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn base(&self) -> &Rational {
        &self.base
    }

    pub fn overrides(&self) -> &BTreeMap<ExtendedPrime, Rational> {
        &self.overrides
    }

    pub fn coordinate(&self, p: ExtendedPrime) -> &Rational {
        self.overrides.get(&p).unwrap_or(&self.base)
    }

    /// `Some(g)` when this point is the diagonal image of an affinity.
    pub fn as_affine(&self) -> Option<AffineMap> {
        self.overrides
            .is_empty()
            .then(|| AffineMap::new(self.a.clone(), self.base.clone()).expect("a ≠ 0"))
    }

    /// `(a, z)(a', z') = (aa', a·z' + z)` coordinate-wise.
    pub fn compose(&self, other: &HPoint) -> HPoint {
        let mut overrides = BTreeMap::new();
        for p in self.overrides.keys().chain(other.overrides.keys()) {
            overrides
                .entry(*p)
                .or_insert_with(|| &self.a * other.coordinate(*p) + self.coordinate(*p));
        }
        let mut y = HPoint {
            a: &self.a * &other.a,
            base: &self.a * &other.base + &self.base,
            overrides,
        };
        y.normalize();
        y
    }

    pub fn inverse(&self) -> HPoint {
        let inv_a = self.a.recip().expect("a ≠ 0");
        HPoint {
            base: -(&self.base * &inv_a),
            overrides: self
                .overrides
                .iter()
                .map(|(p, z)| (*p, -(z * &inv_a)))
                .collect(),
            a: inv_a,
        }
    }

    /// `Σ_{p ≤ ∞} ln⁺|z_p|_p`.
    pub fn translation_height_plus(&self) -> f64 {
        let mut total = height_plus(&self.base);
        for (p, z) in &self.overrides {
            total += log_plus_norm(z, *p) - log_plus_norm(&self.base, *p);
        }
        total
    }

    /// `‖(a, z)‖ = ⟨a⟩ + ⟨z⟩⁺`.
    pub fn adelic_length(&self) -> f64 {
        height(&self.a).expect("a ≠ 0") + self.translation_height_plus()
    }
}

impl From<&AffineMap> for HPoint {
    fn from(g: &AffineMap) -> Self {
        g.embed()
    }
}

/// Whether `g` lies in the gauge set of radius `k` centered at `y`, i.e. `‖g⁻¹y‖ ≤ k`.
pub fn gauge_member(g: &AffineMap, y: &HPoint, k: f64) -> bool {
    g.inverse().embed().compose(y).adelic_length() <= k + GAUGE_TOLERANCE
}

/// `2e^{2k}(2e^{2k} + 1)`, the counting bound for the gauge centered at the identity.
pub fn gauge_count_bound(k: f64) -> f64 {
    let e2k = (2.0 * k).exp();
    2.0 * e2k * (2.0 * e2k + 1.0)
}

/// All elements of the gauge set of radius `k` centered at the identity, sorted.
pub fn gauge_enumerate(k: f64) -> Result<Vec<AffineMap>> {
    gauge_enumerate_capped(k, DEFAULT_GAUGE_CAP)
}

pub fn gauge_enumerate_capped(k: f64, cap: f64) -> Result<Vec<AffineMap>> {
    if k.is_nan() || k > cap {
        return Err(Error::GaugeCapExceeded { k, cap });
    }
    if k < -GAUGE_TOLERANCE {
        return Ok(Vec::new());
    }
    let limit = (k + GAUGE_TOLERANCE).exp().floor() as u64;
    let ln = |n: u64| (n as f64).ln();

    // elements h with ‖h‖ ≤ k; the gauge is their inverses
    let mut out: Vec<AffineMap> = (1..=limit)
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut local = Vec::new();
            for s in 1..=limit / r {
                if r.gcd(&s) != 1 {
                    continue;
                }
                let ha = ln(r) + ln(s);
                if ha > k + GAUGE_TOLERANCE {
                    continue;
                }
                let mut translations = vec![Rational::zero()];
                let m = (k - ha + GAUGE_TOLERANCE).exp().floor() as u64;
                for r2 in 1..=m {
                    for s2 in 1..=m {
                        if r2.gcd(&s2) != 1 || ha + ln(r2.max(s2)) > k + GAUGE_TOLERANCE {
                            continue;
                        }
                        let b = Rational::frac(r2 as i64, s2 as i64);
                        translations.push(-&b);
                        translations.push(b);
                    }
                }
                let a = Rational::frac(r as i64, s as i64);
                for a in [a.clone(), -a] {
                    for b in &translations {
                        let h = AffineMap::new(a.clone(), b.clone()).expect("a ≠ 0");
                        local.push(h.inverse());
                    }
                }
            }
            local
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
