use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::StepDistribution;
use crate::affine::AffineMap;
use crate::arith::Rational;
use crate::error::{Error, Result};

/// Default cap on the number of products formed by one convolution.
pub const DEFAULT_CELL_BUDGET: usize = 10_000_000;

const PARALLEL_THRESHOLD: usize = 256;

/// The exact law of `x_n = g_1 ⋯ g_n`, keyed by canonical group element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvolutionTable {
    n: usize,
    probs: BTreeMap<AffineMap, Rational>,
}

impl ConvolutionTable {
    /// The point mass at the identity (`n = 0`).
    pub fn identity() -> Self {
        ConvolutionTable {
            n: 0,
            probs: BTreeMap::from([(AffineMap::identity(), Rational::one())]),
        }
    }

    pub fn from_measure(mu: &StepDistribution) -> Self {
        ConvolutionTable {
            n: 1,
            probs: mu.atoms().iter().cloned().collect(),
        }
    }

    pub fn generation(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, g: &AffineMap) -> Option<&Rational> {
        self.probs.get(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AffineMap, &Rational)> {
        self.probs.iter()
    }

    pub fn total_mass(&self) -> Rational {
        self.probs.values().cloned().sum()
    }

    /// Law of `x · y` for independent `x ~ self`, `y ~ other`.
    pub fn convolve(&self, other: &ConvolutionTable, budget: usize) -> Result<ConvolutionTable> {
        let n = self.n + other.n;
        let cells = self.len().saturating_mul(other.len());
        if cells > budget {
            return Err(Error::BudgetExceeded {
                n,
                reached: self.len(),
                cells,
                budget,
            });
        }
        let left: Vec<(&AffineMap, &Rational)> = self.probs.iter().collect();
        let partial = |chunk: &[(&AffineMap, &Rational)]| {
            let mut acc: HashMap<AffineMap, Rational> = HashMap::new();
            for (g, pg) in chunk {
                for (h, ph) in &other.probs {
                    let w = *pg * ph;
                    match acc.entry(g.compose(h)) {
                        std::collections::hash_map::Entry::Occupied(mut e) => {
                            let v = e.get_mut();
                            *v = &*v + &w;
                        }
                        std::collections::hash_map::Entry::Vacant(e) => {
                            e.insert(w);
                        }
                    }
                }
            }
            acc
        };
        let pieces: Vec<HashMap<AffineMap, Rational>> = if cells < PARALLEL_THRESHOLD {
            vec![partial(&left)]
        } else {
            let chunk = left.len().div_ceil(rayon::current_num_threads() * 4).max(1);
            left.par_chunks(chunk).map(partial).collect()
        };
        // exact sums: the merge order does not affect the result
        let mut probs: BTreeMap<AffineMap, Rational> = BTreeMap::new();
        for piece in pieces {
            for (g, w) in piece {
                match probs.entry(g) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let v = e.get_mut();
                        *v = &*v + &w;
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(w);
                    }
                }
            }
        }
        Ok(ConvolutionTable { n, probs })
    }

    /// `μ^{*n}` by repeated right multiplication.
    pub fn power(mu: &StepDistribution, n: usize, budget: usize) -> Result<ConvolutionTable> {
        let step = ConvolutionTable::from_measure(mu);
        let mut table = ConvolutionTable::identity();
        for _ in 0..n {
            table = table.convolve(&step, budget)?;
        }
        Ok(table)
    }

    /// All powers `μ^{*0}, …, μ^{*n}`; stops early with the error if the budget is hit.
    pub fn powers(
        mu: &StepDistribution,
        n: usize,
        budget: usize,
    ) -> (Vec<ConvolutionTable>, Option<Error>) {
        let step = ConvolutionTable::from_measure(mu);
        let mut out = vec![ConvolutionTable::identity()];
        for _ in 0..n {
            match out.last().expect("non-empty").convolve(&step, budget) {
                Ok(t) => out.push(t),
                Err(e) => return (out, Some(e)),
            }
        }
        (out, None)
    }

    /// Image under `g ↦ g⁻¹`.
    pub fn reflect(&self) -> ConvolutionTable {
        ConvolutionTable {
            n: self.n,
            probs: self.probs.iter().map(|(g, w)| (g.inverse(), w.clone())).collect(),
        }
    }

    /// Shannon entropy `−Σ p ln p`, summed in canonical order.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .values()
            .map(|p| {
                let x = p.to_f64();
                if x > 0.0 {
                    x * x.ln()
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    }
}
