use rayon::prelude::*;

use super::trajectory::{Trajectory, Walker};
use crate::arith::{valuation, ExtendedPrime, Prime, Valuation};
use crate::error::{Error, Result};

/// `M_n^p / n` with `M_n^p = max_{1≤k≤n} (ln|A_{k−1}|_p + ln|b_k|_p)⁺`.
///
/// Steps with `b_k = 0` contribute nothing. For a field with non-negative
/// drift this tracks the growth of the partial sums `Z_n` and approaches `φ_p⁺`.
pub fn divergence_statistic(traj: &Trajectory, p: ExtendedPrime, n: usize) -> Result<f64> {
    if n == 0 || traj.len() < n {
        return Err(Error::TrajectoryTooShort {
            needed: n.max(1),
            have: traj.len(),
        });
    }
    let best = match p {
        ExtendedPrime::Finite(p) => {
            // ln|x|_p = −v_p(x) ln p: track the smallest exponent exactly
            let lowest = (1..=n)
                .filter_map(|k| match valuation(traj.step(k).b(), p) {
                    Valuation::Infinite => None,
                    Valuation::Finite(vb) => {
                        Some(valuation(traj.a(k - 1), p).finite().expect("A ≠ 0") + vb)
                    }
                })
                .min();
            lowest.map_or(0.0, |v| (-(v as f64) * p.ln()).max(0.0))
        }
        ExtendedPrime::Infinity => (1..=n)
            .filter(|&k| !traj.step(k).b().is_zero())
            .map(|k| traj.a(k - 1).ln_abs() + traj.step(k).b().ln_abs())
            .fold(0.0, f64::max),
    };
    Ok(best / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceSummary {
    pub place: ExtendedPrime,
    pub n: usize,
    pub values: Vec<f64>,
    pub mean: f64,
}

/// Mean of the divergence statistic at step `n` over the paths of `seeds`.
pub fn divergence_diagnostic(
    walker: &Walker,
    p: ExtendedPrime,
    n: usize,
    seeds: &[u64],
) -> Result<DivergenceSummary> {
    if walker.profile().drift_sign(p) < 0 {
        return Err(Error::Contracting(p));
    }
    let values = seeds
        .par_iter()
        .map(|&s| divergence_statistic(&walker.sample_path(s, n)?, p, n))
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
    Ok(DivergenceSummary {
        place: p,
        n,
        values,
        mean,
    })
}

/// `v_p(Z_{k+1} − Z_k) · ln p / n` for the first `k ≥ n` with a nonzero
/// increment, extending the trajectory as needed. Tends to `−φ_p` on
/// contracting fields.
pub fn increment_rate(walker: &Walker, traj: &mut Trajectory, p: Prime, n: usize) -> Result<f64> {
    let mut k = n;
    loop {
        walker.ensure_len(traj, k + 1)?;
        let b = traj.step(k + 1).b();
        if !b.is_zero() {
            let v = valuation(traj.a(k), p).finite().expect("A ≠ 0")
                + valuation(b, p).finite().expect("b ≠ 0");
            return Ok(v as f64 * p.ln() / n.max(1) as f64);
        }
        k += 1;
        if k > n + 100_000 {
            return Err(Error::StabilizationFailed { steps: k });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::StepDistribution;
    use crate::walk::rng::replica_seeds;
    use std::f64::consts::LN_2;

    #[test]
    fn single_doubling_step() {
        let w = Walker::allow_degenerate(StepDistribution::from_fractions(&[((2, 1), (1, 1), (1, 1))]).unwrap()).unwrap();
        let t = w.sample_path(0, 1).unwrap();
        let two = ExtendedPrime::Finite(Prime::new(2).unwrap());
        assert_eq!(divergence_statistic(&t, two, 1).unwrap(), 0.0);
    }

    #[test]
    fn contracting_place_rejected() {
        let rev = StepDistribution::from_fractions(&[((1, 2), (0, 1), (1, 4)), ((2, 1), (-2, 1), (3, 4))]).unwrap();
        let w = Walker::new(rev).unwrap();
        let two = ExtendedPrime::Finite(Prime::new(2).unwrap());
        assert_eq!(divergence_diagnostic(&w, two, 10, &[1]).unwrap_err(), Error::Contracting(two));
    }

    #[test]
    fn divergence_tracks_positive_drift() {
        let bias = StepDistribution::from_fractions(&[((2, 1), (0, 1), (1, 4)), ((1, 2), (1, 1), (3, 4))]).unwrap();
        let w = Walker::new(bias).unwrap();
        let two = ExtendedPrime::Finite(Prime::new(2).unwrap());
        let d = divergence_diagnostic(&w, two, 800, &replica_seeds(2, 20)).unwrap();
        assert!((d.mean - 0.5 * LN_2).abs() < 0.05, "{}", d.mean);
    }
}
