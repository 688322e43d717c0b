use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::ExtendedPrime;
use crate::error::{Error, Result};
use crate::measure::{MeasureSpec, StepDistribution, DEFAULT_CELL_BUDGET};
use crate::walk::DEFAULT_MAX_BITS;

pub const DEFAULT_GRID: [usize; 5] = [125, 250, 500, 1000, 2000];
pub const DEFAULT_EPSILON: f64 = 0.1;

fn default_grid() -> Vec<usize> {
    DEFAULT_GRID.to_vec()
}

/// Everything an experiment run depends on. Reports embed the resolved value.
///
/// ```toml
/// seed = 1
/// replicas = 100
///
/// [measure]
/// atoms = [
///   { a = "2", b = "0", w = "1/4" },
///   { a = "1/2", b = "1", w = "3/4" },
/// ]
///
/// [lln43]
/// places = [2]
/// epsilon = 0.1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub replicas: usize,
    /// Bit-size guard on the exact running product of every path.
    pub max_bits: u64,
    pub measure: Option<MeasureSpec>,
    pub lln41: AlignmentParams,
    pub lln43: PartialHeightParams,
    pub prop44: BoundaryDistanceParams,
    pub entropy: EntropyParams,
    pub gauge: GaugeParams,
    pub walk: WalkParams,
    pub boundary: BoundaryParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            replicas: 100,
            max_bits: DEFAULT_MAX_BITS,
            measure: None,
            lln41: AlignmentParams::default(),
            lln43: PartialHeightParams::default(),
            prop44: BoundaryDistanceParams::default(),
            entropy: EntropyParams::default(),
            gauge: GaugeParams::default(),
            walk: WalkParams::default(),
            boundary: BoundaryParams::default(),
        }
    }
}

/// Mean of `⟨A_n⁻¹ q_n⟩ / n` along a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentParams {
    pub n_grid: Vec<usize>,
    /// The final mean must fall below this.
    pub epsilon: f64,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            n_grid: default_grid(),
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Frequency of `⟨Z_n⟩_P⁺ / n ≤ Σ_{p∈P} φ_p⁺ + ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialHeightParams {
    /// Defaults to every place with nonzero drift.
    pub places: Option<Vec<ExtendedPrime>>,
    pub n_grid: Vec<usize>,
    pub epsilon: f64,
    pub min_frequency: f64,
}

impl Default for PartialHeightParams {
    fn default() -> Self {
        PartialHeightParams {
            places: None,
            n_grid: default_grid(),
            epsilon: DEFAULT_EPSILON,
            min_frequency: 0.95,
        }
    }
}

/// Frequency of `‖x_n⁻¹ π_n(ẑ)‖ / n ≤ Σ_{p∉P} φ_p⁻ + ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryDistanceParams {
    /// Must be contracting; defaults to all contracting places.
    pub places: Option<Vec<ExtendedPrime>>,
    pub n_grid: Vec<usize>,
    pub epsilon: f64,
    pub min_frequency: f64,
    /// Representatives are taken no earlier than this multiple of the largest n.
    pub stabilization_factor: usize,
    pub digits: usize,
    pub margin: usize,
    pub real_tolerance: f64,
    pub max_probe_miss_rate: f64,
}

impl Default for BoundaryDistanceParams {
    fn default() -> Self {
        BoundaryDistanceParams {
            places: None,
            n_grid: default_grid(),
            epsilon: DEFAULT_EPSILON,
            min_frequency: 0.9,
            stabilization_factor: 4,
            digits: 64,
            margin: 32,
            real_tolerance: 1e-9,
            max_probe_miss_rate: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyParams {
    pub n_max: usize,
    pub cell_budget: usize,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            n_max: 12,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeParams {
    pub k: f64,
    pub cap: f64,
}

impl Default for GaugeParams {
    fn default() -> Self {
        GaugeParams {
            k: std::f64::consts::LN_2,
            cap: crate::affine::DEFAULT_GAUGE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkParams {
    pub n: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams { n: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryParams {
    /// Defaults to all contracting places.
    pub places: Option<Vec<ExtendedPrime>>,
    pub digits: usize,
    pub margin: usize,
    pub real_tolerance: f64,
    /// When set, ball masses at this radius exponent are summarised per finite place.
    pub radius_exponent: Option<i64>,
    pub max_probe_miss_rate: f64,
}

impl Default for BoundaryParams {
    fn default() -> Self {
        BoundaryParams {
            places: None,
            digits: 32,
            margin: 32,
            real_tolerance: 1e-9,
            radius_exponent: None,
            max_probe_miss_rate: 0.01,
        }
    }
}

fn check_grid(section: &str, grid: &[usize]) -> Result<()> {
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::Config(format!("{section}.n_grid must be non-empty with positive entries")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Range checks on every section.
    pub fn check(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        check_grid("lln41", &self.lln41.n_grid)?;
        check_grid("lln43", &self.lln43.n_grid)?;
        check_grid("prop44", &self.prop44.n_grid)?;
        check_positive("lln41.epsilon", self.lln41.epsilon)?;
        check_positive("lln43.epsilon", self.lln43.epsilon)?;
        check_positive("prop44.epsilon", self.prop44.epsilon)?;
        check_positive("prop44.real_tolerance", self.prop44.real_tolerance)?;
        check_positive("boundary.real_tolerance", self.boundary.real_tolerance)?;
        if self.prop44.digits == 0 || self.boundary.digits == 0 {
            return Err(Error::Config("digits must be at least 1".into()));
        }
        if self.prop44.stabilization_factor == 0 {
            return Err(Error::Config("prop44.stabilization_factor must be at least 1".into()));
        }
        Ok(())
    }

    pub fn measure(&self) -> Result<StepDistribution> {
        self.measure
            .as_ref()
            .ok_or_else(|| Error::Config("missing [measure] block".into()))?
            .build()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 9
            [measure]
            atoms = [{ a = "2", b = "0", w = "1/4" }, { a = "1/2", b = 1, w = "3/4" }]
            [lln43]
            places = [2, "inf"]
            epsilon = 0.2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.replicas, 100);
        assert_eq!(cfg.lln43.places.as_ref().unwrap().len(), 2);
        assert_eq!(cfg.lln41.n_grid, DEFAULT_GRID.to_vec());
        assert_eq!(cfg.measure().unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml("sede = 1").is_err());
        assert!(ExperimentConfig::from_toml("[lln43]\nepsilon = 0").is_err());
        assert!(ExperimentConfig::from_toml("[lln41]\nn_grid = []").is_err());
        assert!(ExperimentConfig::default().measure().is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }
}
