//! Finitely supported step laws: validation, drifts, reflection and exact
//! convolution powers.

mod convolution;
mod distribution;
mod drift;

pub use convolution::{ConvolutionTable, DEFAULT_CELL_BUDGET};
pub use distribution::{AtomFractions, AtomSpec, Degeneracy, MeasureSpec, StepDistribution, ValidationReport};
pub use drift::{first_moment, DriftProfile, DriftRow};
