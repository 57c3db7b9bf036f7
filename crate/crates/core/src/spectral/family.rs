//! Nested truncations of one operator, indexed by a level (box bound or
//! matrix size).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hankel::{build_circle_hankel, build_hankel};
use crate::ordered_group::{OrderSpec, TruncationBox};
use crate::symbols::{CoefficientList, CoefficientSource, Symbol};
use crate::C64;

pub trait TruncationFamily: Sync {
    /// Dense truncation at `level`. Truncations at increasing levels are
    /// compressions of one another.
    fn matrix(&self, level: u32) -> Result<DMatrix<C64>>;

    /// Bound on `|s_k(T_{level'}) − s_k(T_level)|` for every `level' > level`;
    /// infinite when no bound is known.
    fn truncation_gap(&self, level: u32) -> f64;

    /// Bound on `s_k` of the untruncated operator; infinite when unknown.
    fn envelope(&self, k: usize) -> f64;
}

/// `H_φ` over the group, truncated to boxes `[−M, M]ⁿ`.
pub struct GroupTruncations {
    pub symbol: Symbol,
    pub spec: OrderSpec,
    source: Option<Box<dyn CoefficientSource>>,
    off_cyclic: bool,
}

impl GroupTruncations {
    pub fn new(symbol: Symbol, spec: OrderSpec) -> Result<Self> {
        spec.validate()?;
        let (source, off_cyclic) = match (&symbol, spec.least_positive()) {
            (Symbol::Fourier(f), _) => {
                let minus = f.project_minus(&spec)?;
                if minus.is_empty() {
                    let zero: Box<dyn CoefficientSource> = Box::new(CoefficientList::finite(Vec::new()));
                    (Some(zero), false)
                } else if spec.least_positive().is_none() {
                    (None, true)
                } else {
                    (symbol.coefficient_source(&spec)?, minus.off_cyclic_mass(&spec)? > 0.0)
                }
            }
            (_, None) => return Err(Error::NoLeastPositive),
            _ => (symbol.coefficient_source(&spec)?, false),
        };
        Ok(GroupTruncations { symbol, spec, source, off_cyclic })
    }
}

impl TruncationFamily for GroupTruncations {
    fn matrix(&self, level: u32) -> Result<DMatrix<C64>> {
        // rows reach −M·χ₁ and columns M·χ₁, so indices up to 2M are visible
        let (s, _) = self.symbol.antianalytic(&self.spec, 2 * level as usize + 1)?;
        Ok(build_hankel(&s, &self.spec, TruncationBox::new(level))?.entries)
    }

    fn truncation_gap(&self, level: u32) -> f64 {
        match (&self.source, self.off_cyclic) {
            (Some(src), false) => src.tail_bound(level as usize),
            _ => f64::INFINITY,
        }
    }

    fn envelope(&self, k: usize) -> f64 {
        match (&self.source, self.off_cyclic) {
            (Some(src), false) => src.tail_bound(k),
            _ => f64::INFINITY,
        }
    }
}

/// Classical `N × N` Hankel matrices `c_{j+k+1}`.
pub struct CircleTruncations {
    pub source: Box<dyn CoefficientSource>,
}

impl CircleTruncations {
    pub fn new(source: Box<dyn CoefficientSource>) -> Self {
        CircleTruncations { source }
    }
}

impl TruncationFamily for CircleTruncations {
    fn matrix(&self, level: u32) -> Result<DMatrix<C64>> {
        let n = level as usize;
        let c = self.source.coefficients((2 * n).saturating_sub(1));
        Ok(build_circle_hankel(&c, n).entries)
    }

    fn truncation_gap(&self, level: u32) -> f64 {
        // entries outside the N × N corner have index ≥ N + 1
        self.source.tail_bound(level as usize)
    }

    fn envelope(&self, k: usize) -> f64 {
        // the Hankel matrix of c_1..c_k has rank ≤ k, the rest has norm ≤ Σ_{n>k}|c_n|
        self.source.tail_bound(k)
    }
}
