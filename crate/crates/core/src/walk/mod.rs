//! Seeded sample paths of the walk `x_n = (A_n, Z_n)` and what can be read off them.

mod boundary;
mod diagnostics;
pub mod rng;
mod trajectory;

use rayon::prelude::*;

pub use boundary::{
    boundary_digits, empirical_measure, extract_boundary, real_limit, tail_ball_key, tail_point,
    BoundaryOptions, BoundarySample, EmpiricalMeasure,
};
pub use diagnostics::{divergence_diagnostic, divergence_statistic, increment_rate, DivergenceSummary};
pub use trajectory::{Trajectory, Walker, DEFAULT_MAX_BITS};

/// Run `f(replica, stream_seed)` for replicas `0..count` on the current pool.
/// Results come back in replica order whatever the number of workers.
pub fn run_replicas<T, F>(base_seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, u64) -> T + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, rng::replica_seed(base_seed, i as u64)))
        .collect()
}
