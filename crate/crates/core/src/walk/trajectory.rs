use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use rand_pcg::Pcg64;

use super::rng;
use crate::affine::AffineMap;
use crate::arith::{ExtendedPrime, Rational};
use crate::error::{Error, Result};
use crate::measure::{DriftProfile, StepDistribution};

/// Default bit-size guard on the exact running product.
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;

/// A validated step law ready for sampling.
///
/// Increments are drawn by inverse CDF: with `D` the common denominator of the
/// weights, a uniform integer `u ∈ [0, D)` selects the first atom whose
/// cumulative numerator exceeds `u`.
#[derive(Clone, Debug)]
pub struct Walker {
    mu: StepDistribution,
    profile: DriftProfile,
    cumulative: Vec<u128>,
    denominator: u128,
    max_bits: u64,
}

impl Walker {
    /// Rejects degenerate laws.
    pub fn new(mu: StepDistribution) -> Result<Self> {
        let report = mu.validate();
        if let Some(d) = report.degeneracy {
            return Err(Error::DegenerateMeasure(d.to_string()));
        }
        Self::allow_degenerate(mu)
    }

    /// Accepts degenerate laws, for diagnostics on point boundaries.
    pub fn allow_degenerate(mu: StepDistribution) -> Result<Self> {
        let profile = DriftProfile::of(&mu)?;
        let common = mu
            .atoms()
            .iter()
            .fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
        let denominator = common
            .to_u128()
            .filter(|d| *d < u128::MAX)
            .ok_or_else(|| Error::InvalidMeasure("weight denominators too large to sample".into()))?;
        let mut acc = 0u128;
        let cumulative = mu
            .atoms()
            .iter()
            .map(|(_, w)| {
                let scaled = (w.numer() * &common) / w.denom();
                acc += scaled.to_u128().expect("numerator below denominator");
                acc
            })
            .collect();
        Ok(Walker {
            mu,
            profile,
            cumulative,
            denominator,
            max_bits: DEFAULT_MAX_BITS,
        })
    }

    pub fn with_max_bits(mut self, bits: u64) -> Self {
        self.max_bits = bits;
        self
    }

    pub fn measure(&self) -> &StepDistribution {
        &self.mu
    }

    pub fn profile(&self) -> &DriftProfile {
        &self.profile
    }

    pub fn require_contracting(&self, p: ExtendedPrime) -> Result<()> {
        if self.profile.is_contracting(p) {
            Ok(())
        } else {
            Err(Error::NonContracting(p))
        }
    }

    fn draw(&self, rng: &mut Pcg64) -> &AffineMap {
        let u = rng.random_range(0..self.denominator);
        let idx = self.cumulative.partition_point(|&c| c <= u);
        &self.mu.atoms()[idx].0
    }

    /// A trajectory of `n` steps from the stream of `seed`.
    pub fn sample_path(&self, seed: u64, n: usize) -> Result<Trajectory> {
        let mut traj = Trajectory {
            seed,
            rng: rng::stream(seed),
            steps: Vec::with_capacity(n),
            prefix: Vec::with_capacity(n + 1),
        };
        traj.prefix.push(AffineMap::identity());
        self.extend(&mut traj, n)?;
        Ok(traj)
    }

    /// Continue the same random stream for `k` more steps.
    pub fn extend(&self, traj: &mut Trajectory, k: usize) -> Result<()> {
        for _ in 0..k {
            let g = self.draw(&mut traj.rng).clone();
            let next = traj.prefix.last().expect("x_0 present").compose(&g);
            if next.a().bits().max(next.b().bits()) > self.max_bits {
                return Err(Error::BitSizeExceeded {
                    step: traj.steps.len() + 1,
                    limit: self.max_bits,
                });
            }
            traj.steps.push(g);
            traj.prefix.push(next);
        }
        Ok(())
    }

    /// Extend until the trajectory has at least `n` steps.
    pub fn ensure_len(&self, traj: &mut Trajectory, n: usize) -> Result<()> {
        let have = traj.len();
        if have < n {
            self.extend(traj, n - have)?;
        }
        Ok(())
    }
}

/// A sample path `x_n = g_1 ⋯ g_n = (A_n, Z_n)` with every prefix kept exactly.
#[derive(Clone, Debug)]
pub struct Trajectory {
    seed: u64,
    rng: Pcg64,
    steps: Vec<AffineMap>,
    prefix: Vec<AffineMap>,
}

impl Trajectory {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of steps taken.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The increment `g_k`, `1 ≤ k ≤ len`.
    pub fn step(&self, k: usize) -> &AffineMap {
        &self.steps[k - 1]
    }

    pub fn steps(&self) -> &[AffineMap] {
        &self.steps
    }

    /// `x_n`, with `x_0` the identity.
    pub fn position(&self, n: usize) -> &AffineMap {
        &self.prefix[n]
    }

    pub fn a(&self, n: usize) -> &Rational {
        self.prefix[n].a()
    }

    pub fn z(&self, n: usize) -> &Rational {
        self.prefix[n].b()
    }

    pub fn last(&self) -> &AffineMap {
        self.prefix.last().expect("x_0 present")
    }

    pub fn checked_position(&self, n: usize) -> Result<&AffineMap> {
        self.prefix.get(n).ok_or(Error::TrajectoryTooShort {
            needed: n,
            have: self.len(),
        })
    }
}
