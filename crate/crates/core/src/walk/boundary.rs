//! Boundary points of contracting fields.
//!
//! For a place `p` with negative drift the series `Z_∞ = Σ A_{k−1} b_k`
//! converges in `Q_p`. The walk is run until the running product is small in
//! every requested field for `margin` consecutive steps; the exact `Z_n` at that
//! point is the representative. Locking is a heuristic: a continuation probe
//! extends the walk by another `margin` steps and records whether the reported
//! digits (or the real interval) survive.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::rng::replica_seed;
use super::trajectory::{Trajectory, Walker};
use crate::arith::{valuation, ExtendedPrime, Prime, Rational};
use crate::error::{Error, Result};
use crate::padic::{ball_key, expand, BallKey, PadicExpansion};

/// `|A_n| · max|b|` must fall below `tol/2` by this factor at the real place.
const REAL_SAFETY_LN: f64 = 4.158_883_083_359_672; // ln 64

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryOptions {
    /// Digits reported per finite place.
    pub digits: usize,
    /// Consecutive locked steps required, and length of the continuation probe.
    pub margin: usize,
    /// Width budget of the real interval.
    pub real_tolerance: f64,
    /// Do not lock before this many steps.
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            digits: 32,
            margin: 32,
            real_tolerance: 1e-9,
            min_steps: 0,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySample {
    pub seed: u64,
    pub expansions: BTreeMap<Prime, PadicExpansion>,
    /// Outward-rounded interval around the real coordinate.
    pub real_coordinate: Option<(f64, f64)>,
    /// The exact `Z_n` at the stabilization index, shared by all places.
    pub representative: Rational,
    pub stabilization_index: usize,
    pub probe_agreed: bool,
}

impl BoundarySample {
    pub fn places(&self) -> BTreeSet<ExtendedPrime> {
        let mut set: BTreeSet<ExtendedPrime> =
            self.expansions.keys().map(|p| ExtendedPrime::Finite(*p)).collect();
        if self.real_coordinate.is_some() {
            set.insert(ExtendedPrime::Infinity);
        }
        set
    }

    pub fn expansion(&self, p: Prime) -> Option<&PadicExpansion> {
        self.expansions.get(&p)
    }
}

enum Lock {
    Finite { p: Prime, min_b: Option<i64> },
    Real { ln_max_b: f64 },
}

impl Lock {
    fn holds(&self, traj: &Trajectory, n: usize, opts: &BoundaryOptions) -> bool {
        match self {
            Lock::Finite { min_b: None, .. } => true,
            Lock::Finite { p, min_b: Some(min_b) } => {
                let a_val = valuation(traj.a(n), *p).finite().expect("A_n ≠ 0");
                let start = valuation(traj.z(n), *p).finite().unwrap_or(0);
                a_val > start + opts.digits as i64 - min_b
            }
            Lock::Real { ln_max_b } => {
                traj.a(n).ln_abs() + ln_max_b + REAL_SAFETY_LN <= (opts.real_tolerance / 2.0).ln()
            }
        }
    }
}

fn locks(walker: &Walker, places: &BTreeSet<ExtendedPrime>) -> Result<Vec<Lock>> {
    let atoms = walker.measure().atoms();
    places
        .iter()
        .map(|&place| {
            walker.require_contracting(place)?;
            Ok(match place {
                ExtendedPrime::Finite(p) => Lock::Finite {
                    p,
                    min_b: atoms
                        .iter()
                        .filter_map(|(g, _)| valuation(g.b(), p).finite())
                        .min(),
                },
                ExtendedPrime::Infinity => Lock::Real {
                    ln_max_b: atoms
                        .iter()
                        .filter(|(g, _)| !g.b().is_zero())
                        .map(|(g, _)| g.b().ln_abs())
                        .fold(f64::NEG_INFINITY, f64::max),
                },
            })
        })
        .collect()
}

fn real_interval(z: &Rational, tol: f64) -> (f64, f64) {
    let c = z.to_f64();
    ((c - tol / 2.0).next_down(), (c + tol / 2.0).next_up())
}

/// Boundary coordinates of `traj` at every place of `places`, extending the
/// trajectory as needed. All places must be contracting.
pub fn extract_boundary(
    walker: &Walker,
    traj: &mut Trajectory,
    places: &BTreeSet<ExtendedPrime>,
    opts: &BoundaryOptions,
) -> Result<BoundarySample> {
    if opts.digits == 0 {
        return Err(Error::ZeroPrecision(0));
    }
    let locks = locks(walker, places)?;
    let mut streak = vec![0usize; locks.len()];
    let mut n = 0usize;
    loop {
        walker.ensure_len(traj, n)?;
        let mut all = true;
        for (lock, s) in locks.iter().zip(streak.iter_mut()) {
            if lock.holds(traj, n, opts) {
                *s += 1;
            } else {
                *s = 0;
            }
            all &= *s >= opts.margin.max(1);
        }
        if all && n >= opts.min_steps {
            break;
        }
        n += 1;
        if n > opts.max_steps {
            return Err(Error::StabilizationFailed { steps: opts.max_steps });
        }
    }

    let representative = traj.z(n).clone();
    let mut expansions = BTreeMap::new();
    let mut real_coordinate = None;
    for place in places {
        match place {
            ExtendedPrime::Finite(p) => {
                expansions.insert(*p, expand(&representative, *p, opts.digits)?);
            }
            ExtendedPrime::Infinity => {
                real_coordinate = Some(real_interval(&representative, opts.real_tolerance));
            }
        }
    }

    walker.ensure_len(traj, n + opts.margin)?;
    let later = traj.z(n + opts.margin);
    let mut probe_agreed = true;
    for (p, e) in &expansions {
        let again = expand(later, *p, opts.digits)?;
        probe_agreed &= again.digits == e.digits && again.start_exponent == e.start_exponent;
    }
    if real_coordinate.is_some() {
        probe_agreed &= (later - &representative).to_f64().abs() <= opts.real_tolerance / 2.0;
    }

    Ok(BoundarySample {
        seed: traj.seed(),
        expansions,
        real_coordinate,
        representative,
        stabilization_index: n,
        probe_agreed,
    })
}

/// `N` digits of `Z_∞` in `Q_p` along the path of `seed`.
pub fn boundary_digits(
    walker: &Walker,
    p: Prime,
    digits: usize,
    seed: u64,
    margin: usize,
) -> Result<BoundarySample> {
    let opts = BoundaryOptions {
        digits,
        margin,
        ..BoundaryOptions::default()
    };
    let mut traj = walker.sample_path(seed, 0)?;
    extract_boundary(walker, &mut traj, &BTreeSet::from([ExtendedPrime::Finite(p)]), &opts)
}

/// Interval of width about `tol` around the real limit of `Z_n`.
pub fn real_limit(walker: &Walker, tol: f64, seed: u64) -> Result<BoundarySample> {
    let opts = BoundaryOptions {
        real_tolerance: tol,
        ..BoundaryOptions::default()
    };
    let mut traj = walker.sample_path(seed, 0)?;
    extract_boundary(walker, &mut traj, &BTreeSet::from([ExtendedPrime::Infinity]), &opts)
}

/// `x_n⁻¹ · ẑ = A_n⁻¹(ẑ − Z_n)` at each place of the sample, exactly.
pub fn tail_point(
    traj: &Trajectory,
    n: usize,
    sample: &BoundarySample,
) -> Result<BTreeMap<ExtendedPrime, Rational>> {
    if n > 0 && n >= sample.stabilization_index {
        return Err(Error::InsufficientStabilization {
            n,
            stabilized: sample.stabilization_index,
        });
    }
    let x = traj.checked_position(n)?;
    let value = x.inverse().act(&sample.representative);
    Ok(sample.places().into_iter().map(|p| (p, value.clone())).collect())
}

/// Ball key of the tail point at `p`, provided its digits are reliable below `radius_exponent`.
pub fn tail_ball_key(
    traj: &Trajectory,
    n: usize,
    sample: &BoundarySample,
    p: Prime,
    radius_exponent: i64,
) -> Result<BallKey> {
    let e = sample
        .expansion(p)
        .ok_or(Error::NonContracting(ExtendedPrime::Finite(p)))?;
    let value = tail_point(traj, n, sample)?.remove(&ExtendedPrime::Finite(p)).expect("place present");
    let a_val = valuation(traj.a(n), p).finite().expect("A_n ≠ 0");
    // digits of ẑ are trusted below `known`, those of the tail below `known − v_p(A_n)`
    let known = e.start_exponent + e.precision() as i64 - a_val;
    if known < radius_exponent {
        return Err(Error::InsufficientPrecision {
            known,
            needed: radius_exponent,
        });
    }
    let start = valuation(&value, p).finite().unwrap_or(radius_exponent);
    let digits = usize::try_from(radius_exponent - start).unwrap_or(0).max(1);
    ball_key(&expand(&value, p, digits)?, radius_exponent)
}

/// Histogram of boundary samples over balls of radius `p^{−radius_exponent}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub p: Prime,
    pub radius_exponent: i64,
    pub samples: usize,
    pub counts: BTreeMap<BallKey, usize>,
    pub probe_misses: usize,
}

impl EmpiricalMeasure {
    pub fn from_keys(p: Prime, radius_exponent: i64, keys: impl IntoIterator<Item = BallKey>) -> Self {
        let mut counts = BTreeMap::new();
        let mut samples = 0;
        for k in keys {
            *counts.entry(k).or_insert(0) += 1;
            samples += 1;
        }
        EmpiricalMeasure {
            p,
            radius_exponent,
            samples,
            counts,
            probe_misses: 0,
        }
    }

    pub fn max_mass(&self) -> f64 {
        let top = self.counts.values().copied().max().unwrap_or(0);
        top as f64 / self.samples.max(1) as f64
    }

    pub fn mass(&self, key: &BallKey) -> f64 {
        self.counts.get(key).copied().unwrap_or(0) as f64 / self.samples.max(1) as f64
    }

    /// Total-variation distance between the two bucket histograms.
    pub fn total_variation(&self, other: &EmpiricalMeasure) -> f64 {
        let keys: BTreeSet<&BallKey> = self.counts.keys().chain(other.counts.keys()).collect();
        0.5 * keys
            .into_iter()
            .map(|k| (self.mass(k) - other.mass(k)).abs())
            .sum::<f64>()
    }
}

/// Ball histogram of `samples` independent boundary points at `p`.
pub fn empirical_measure(
    walker: &Walker,
    p: Prime,
    radius_exponent: i64,
    samples: usize,
    base_seed: u64,
    opts: &BoundaryOptions,
) -> Result<EmpiricalMeasure> {
    let places = BTreeSet::from([ExtendedPrime::Finite(p)]);
    let results: Vec<Result<(BallKey, bool)>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut traj = walker.sample_path(replica_seed(base_seed, i), 0)?;
            let s = extract_boundary(walker, &mut traj, &places, opts)?;
            let key = ball_key(&s.expansions[&p], radius_exponent)?;
            Ok((key, s.probe_agreed))
        })
        .collect();
    let mut keys = Vec::with_capacity(samples);
    let mut misses = 0;
    for r in results {
        let (key, agreed) = r?;
        keys.push(key);
        misses += usize::from(!agreed);
    }
    let mut m = EmpiricalMeasure::from_keys(p, radius_exponent, keys);
    m.probe_misses = misses;
    Ok(m)
}
