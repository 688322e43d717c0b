//! Experiment harness: configs, suites and reports.

mod config;
mod report;
mod suites;

use std::fmt;
use std::str::FromStr;

pub use config::{
    AlignmentParams, BoundaryDistanceParams, BoundaryParams, EntropyParams, ExperimentConfig, GaugeParams,
    PartialHeightParams, WalkParams, DEFAULT_EPSILON, DEFAULT_GRID,
};
pub use report::{Outcome, Report, Row, Value};
pub use suites::{
    alignment_rate, quantile, run_alignment, run_boundary, run_boundary_distance, run_drift, run_entropy,
    run_gauge, run_partial_height, run_validate, run_walk,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Validate,
    Drift,
    Gauge,
    Walk,
    Boundary,
    /// `⟨A_n⁻¹ q_n⟩ / n → 0`.
    Lln41,
    /// Partial heights of `Z_n` grow at most like the positive drifts.
    Lln43,
    /// Distance from the walk to the scaled boundary point.
    Prop44,
    Entropy,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Validate,
        Experiment::Drift,
        Experiment::Gauge,
        Experiment::Walk,
        Experiment::Boundary,
        Experiment::Lln41,
        Experiment::Lln43,
        Experiment::Prop44,
        Experiment::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Validate => "validate",
            Experiment::Drift => "drift",
            Experiment::Gauge => "gauge",
            Experiment::Walk => "walk",
            Experiment::Boundary => "boundary",
            Experiment::Lln41 => "lln41",
            Experiment::Lln43 => "lln43",
            Experiment::Prop44 => "prop44",
            Experiment::Entropy => "entropy",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<Report> {
        match self {
            Experiment::Validate => run_validate(cfg),
            Experiment::Drift => run_drift(cfg),
            Experiment::Gauge => run_gauge(cfg),
            Experiment::Walk => run_walk(cfg),
            Experiment::Boundary => run_boundary(cfg),
            Experiment::Lln41 => run_alignment(cfg),
            Experiment::Lln43 => run_partial_height(cfg),
            Experiment::Prop44 => run_boundary_distance(cfg),
            Experiment::Entropy => run_entropy(cfg),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse {
                what: "experiment",
                input: s.to_string(),
            })
    }
}
