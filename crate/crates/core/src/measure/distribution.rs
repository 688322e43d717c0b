use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affine::AffineMap;
use crate::arith::Rational;
use crate::error::{Error, Result};

/// A finitely supported probability measure on the affine group with exact weights.
///
/// Atoms are kept sorted by map and merged on construction, so two
/// distributions describing the same measure compare equal.
/// `((a_num, a_den), (b_num, b_den), (w_num, w_den))`.
pub type AtomFractions = ((i64, i64), (i64, i64), (i64, i64));

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepDistribution {
    atoms: Vec<(AffineMap, Rational)>,
}

impl StepDistribution {
    pub fn new(atoms: impl IntoIterator<Item = (AffineMap, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<AffineMap, Rational> = BTreeMap::new();
        for (g, w) in atoms {
            if w.is_negative() || w.is_zero() {
                return Err(Error::InvalidMeasure(format!("non-positive weight {w} on {g}")));
            }
            let slot = merged.entry(g).or_insert_with(Rational::zero);
            *slot = &*slot + &w;
        }
        if merged.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let total: Rational = merged.values().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(StepDistribution {
            atoms: merged.into_iter().collect(),
        })
    }

    /// Builds from `((a_num, a_den), (b_num, b_den), (w_num, w_den))` triples.
    pub fn from_fractions(atoms: &[AtomFractions]) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for &(a, b, w) in atoms {
            let g = AffineMap::new(Rational::new(a.0, a.1)?, Rational::new(b.0, b.1)?)?;
            out.push((g, Rational::new(w.0, w.1)?));
        }
        Self::new(out)
    }

    pub fn atoms(&self) -> &[(AffineMap, Rational)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The image of the measure under group inversion.
    pub fn reflect(&self) -> StepDistribution {
        StepDistribution::new(self.atoms.iter().map(|(g, w)| (g.inverse(), w.clone())))
            .expect("inversion preserves weights")
    }

    /// Non-degeneracy check: not supported on translations only, and no
    /// rational point fixed by every atom.
    pub fn validate(&self) -> ValidationReport {
        let contracting_atom = self.atoms.iter().find(|(g, _)| !g.a().is_one());
        let degeneracy = match contracting_atom {
            None => Some(Degeneracy::TranslationsOnly),
            Some((g, _)) => {
                let z = g.fixed_point().expect("a ≠ 1");
                self.atoms
                    .iter()
                    .all(|(h, _)| h.act(&z) == z)
                    .then_some(Degeneracy::CommonFixedPoint(z))
            }
        };
        ValidationReport {
            atoms: self.atoms.len(),
            degeneracy,
        }
    }

    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            atoms: self
                .atoms
                .iter()
                .map(|(g, w)| AtomSpec {
                    a: g.a().clone(),
                    b: g.b().clone(),
                    w: w.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (g, w)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {}): {}", g.a(), g.b(), w)?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    /// Every atom has `a = 1`: the walk is a sum of independent translations.
    TranslationsOnly,
    /// Every atom fixes this rational point.
    CommonFixedPoint(Rational),
}

impl fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degeneracy::TranslationsOnly => f.write_str("all atoms have a = 1"),
            Degeneracy::CommonFixedPoint(z) => write!(f, "every atom fixes {z}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub atoms: usize,
    pub degeneracy: Option<Degeneracy>,
}

impl ValidationReport {
    pub fn is_degenerate(&self) -> bool {
        self.degeneracy.is_some()
    }
}

/// Text form of one atom: `{ a = "num/den", b = "num/den", w = "num/den" }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub a: Rational,
    pub b: Rational,
    pub w: Rational,
}

/// The measure block of an experiment config.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub atoms: Vec<AtomSpec>,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<StepDistribution> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            atoms.push((AffineMap::new(atom.a.clone(), atom.b.clone())?, atom.w.clone()));
        }
        StepDistribution::new(atoms)
    }
}

impl TryFrom<&MeasureSpec> for StepDistribution {
    type Error = Error;

    fn try_from(spec: &MeasureSpec) -> Result<Self> {
        spec.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        let half = ((1, 2), (0, 1), (1, 2));
        assert!(matches!(
            StepDistribution::from_fractions(&[half]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            StepDistribution::from_fractions(&[((2, 1), (0, 1), (3, 2)), ((1, 2), (1, 1), (-1, 2))]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(matches!(
            StepDistribution::from_fractions(&[((2, 1), (0, 1), (1, 1)), ((1, 2), (1, 1), (0, 1))]),
            Err(Error::InvalidMeasure(_))
        ));
        assert!(StepDistribution::new(vec![]).is_err());
    }

    #[test]
    fn merges_duplicate_atoms() {
        let mu = StepDistribution::from_fractions(&[
            ((2, 1), (0, 1), (1, 4)),
            ((4, 2), (0, 3), (1, 4)),
            ((1, 2), (1, 1), (1, 2)),
        ])
        .unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.atoms()[1].1, Rational::frac(1, 2));
    }

    #[test]
    fn degeneracy_examples() {
        let translations =
            StepDistribution::from_fractions(&[((1, 1), (1, 1), (1, 2)), ((1, 1), (2, 1), (1, 2))]).unwrap();
        assert_eq!(translations.validate().degeneracy, Some(Degeneracy::TranslationsOnly));

        let dilation = StepDistribution::from_fractions(&[((2, 1), (0, 1), (1, 1))]).unwrap();
        assert_eq!(
            dilation.validate().degeneracy,
            Some(Degeneracy::CommonFixedPoint(Rational::zero()))
        );

        let sym = StepDistribution::from_fractions(&[((2, 1), (0, 1), (1, 2)), ((1, 2), (1, 1), (1, 2))]).unwrap();
        assert!(!sym.validate().is_degenerate());
    }

    #[test]
    fn shared_fixed_point_with_translation_atom() {
        // x ↦ 3x − 2 and x ↦ x/2 + 1/2 both fix 1; the identity fixes everything
        let mu = StepDistribution::from_fractions(&[
            ((3, 1), (-2, 1), (1, 3)),
            ((1, 2), (1, 2), (1, 3)),
            ((1, 1), (0, 1), (1, 3)),
        ])
        .unwrap();
        assert_eq!(mu.validate().degeneracy, Some(Degeneracy::CommonFixedPoint(Rational::one())));
        // a pure translation breaks the common fixed point
        let mu = StepDistribution::from_fractions(&[((3, 1), (-2, 1), (1, 2)), ((1, 1), (1, 1), (1, 2))]).unwrap();
        assert!(!mu.validate().is_degenerate());
    }

    #[test]
    fn reflect_inverts_atoms() {
        let bias = StepDistribution::from_fractions(&[((2, 1), (0, 1), (1, 4)), ((1, 2), (1, 1), (3, 4))]).unwrap();
        let expected =
            StepDistribution::from_fractions(&[((1, 2), (0, 1), (1, 4)), ((2, 1), (-2, 1), (3, 4))]).unwrap();
        assert_eq!(bias.reflect(), expected);
        assert_eq!(bias.reflect().reflect(), bias);
    }

    #[test]
    fn measure_block_from_toml() {
        let text = r#"
            atoms = [
                { a = "2", b = "0", w = "1/4" },
                { a = "1/2", b = 1, w = "3/4" },
            ]
        "#;
        let spec: MeasureSpec = toml::from_str(text).unwrap();
        let mu = spec.build().unwrap();
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.to_spec().build().unwrap(), mu);

        let bad: MeasureSpec = toml::from_str(r#"atoms = [{ a = "2", b = "0", w = "1/3" }]"#).unwrap();
        assert!(bad.build().is_err());
    }
}
