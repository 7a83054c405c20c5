//! Computable functions on Euclidean space, their moduli of continuity and inverse moduli,
//! sampled certificate checks, and left-inverse synthesis.

mod checks;
mod library;
mod modulus;
mod selector;
mod synthesis;

use std::fmt;
use std::sync::Arc;

use crate::codec::RationalPoint;
use crate::error::{Error, Result};
use crate::oracle::PointOracle;

pub use checks::{evaluator_consistency, inverse_modulus_check, modulus_check, CheckOutcome, SamplePlan, Witness};
pub use library::{affine, hilbert2d, hilbert_cell, identity, library_function, projection, scale, sum, FunctionSpec};
pub use modulus::ModulusSpec;
pub use selector::{interleave, project, SSelector};
pub use synthesis::{left_inverse_synthesize, SearchBox};

/// Maps an oracle for `x` (as a query function) and a precision `r` to a point within `2^{-r}`
/// of `f(x)`.
pub type Evaluator = Arc<dyn Fn(&dyn Fn(u32) -> RationalPoint, u32) -> Result<RationalPoint> + Send + Sync>;

/// A computable `f: ℝⁿ → ℝᵏ` with its declared certificates.
#[derive(Clone)]
pub struct ComputableFunction {
    name: String,
    n: usize,
    k: usize,
    evaluator: Evaluator,
    modulus: Option<ModulusSpec>,
    inverse_moduli: Vec<(SSelector, ModulusSpec)>,
}

impl fmt::Debug for ComputableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComputableFunction")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .field("inverse_moduli", &self.inverse_moduli)
            .finish()
    }
}

impl ComputableFunction {
    pub fn new<F>(name: impl Into<String>, n: usize, k: usize, evaluator: F) -> Self
    where
        F: Fn(&dyn Fn(u32) -> RationalPoint, u32) -> Result<RationalPoint> + Send + Sync + 'static,
    {
        ComputableFunction {
            name: name.into(),
            n,
            k,
            evaluator: Arc::new(evaluator),
            modulus: None,
            inverse_moduli: Vec::new(),
        }
    }

    pub fn with_modulus(mut self, m: ModulusSpec) -> Self {
        self.modulus = Some(m);
        self
    }

    pub fn with_inverse_modulus(mut self, sel: SSelector, m: ModulusSpec) -> Self {
        self.inverse_moduli.push((sel, m));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn modulus(&self) -> Option<&ModulusSpec> {
        self.modulus.as_ref()
    }

    pub fn inverse_moduli(&self) -> &[(SSelector, ModulusSpec)] {
        &self.inverse_moduli
    }

    pub fn inverse_modulus_for(&self, sel: &SSelector) -> Option<&ModulusSpec> {
        self.inverse_moduli.iter().find(|(s, _)| s == sel).map(|(_, m)| m)
    }

    /// Evaluates through a raw query function.
    pub fn eval_with(&self, query: &dyn Fn(u32) -> RationalPoint, r: u32) -> Result<RationalPoint> {
        let out = (self.evaluator)(query, r)?;
        if out.dimension() != self.k {
            return Err(Error::Internal(format!("{} returned {} coordinates, expected {}", self.name, out.dimension(), self.k)));
        }
        Ok(out)
    }

    pub fn eval(&self, x: &PointOracle, r: u32) -> Result<RationalPoint> {
        if x.dimension() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: x.dimension() });
        }
        self.eval_with(&|s| x.query(s), r)
    }

    pub fn eval_point(&self, q: &RationalPoint, r: u32) -> Result<RationalPoint> {
        if q.dimension() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: q.dimension() });
        }
        self.eval_with(&|_| q.clone(), r)
    }

    /// The oracle `r ↦ M_f^{g_x}(r)` for `f(x)`.
    ///
    /// Queries of the returned oracle panic if the evaluator fails; use [`Self::eval`] for
    /// partial functions such as synthesized left inverses.
    pub fn apply(&self, x: &PointOracle) -> Result<PointOracle> {
        if x.dimension() != self.n {
            return Err(Error::ArityMismatch { expected: self.n, got: x.dimension() });
        }
        let f = self.clone();
        let x = x.clone();
        let name = format!("{}({})", self.name, x.provenance());
        Ok(PointOracle::from_fn(self.k, name, move |r| {
            f.eval(&x, r).unwrap_or_else(|e| panic!("evaluating {} failed: {e}", f.name))
        }))
    }
}
