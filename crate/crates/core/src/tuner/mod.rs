//! Evolutionary tuning of controller parameter vectors.
//!
//! [`ga_optimize`] minimizes a scalar fitness; [`nsga2_optimize`] approximates
//! a Pareto front of several objectives. Both work on box-bounded real
//! vectors, draw all random numbers sequentially from a seeded generator and
//! may evaluate a generation in parallel without changing their results.

mod ga;
mod nsga2;
mod operators;
mod problem;

pub use ga::{ga_optimize, ga_optimize_restarts, GaConfig, GaResult};
pub use nsga2::{
    crowding_distance, dominates, nondominated_sort, nsga2_optimize, Nsga2Config, ParetoArchive, ParetoMember,
};
pub use operators::Variation;
pub use problem::{ObjectivePair, TuningProblem};

use serde::{Deserialize, Serialize};

use crate::controllers::{ParamKind, Structure};
use crate::error::{Error, Result};

/// Upper end of the range the initial population of a gain parameter is
/// drawn from. Gains may still evolve up to their full bound.
pub const INITIAL_GAIN_RANGE: f64 = 10.0;

/// Named box constraints, with a possibly narrower box for sampling the
/// initial population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub init_lower: Vec<f64>,
    pub init_upper: Vec<f64>,
}

impl SearchSpace {
    pub fn new(names: Vec<String>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if names.len() != lower.len() || names.len() != upper.len() || names.is_empty() {
            return Err(Error::InvalidTuner("names and bounds must be non-empty and of equal length".into()));
        }
        for (n, (l, u)) in names.iter().zip(lower.iter().zip(&upper)) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::InvalidTuner(format!("bad bounds for {n}: [{l}, {u}]")));
            }
        }
        Ok(Self { names, init_lower: lower.clone(), init_upper: upper.clone(), lower, upper })
    }

    /// Same bounds `[lo, hi]` on `dim` anonymous coordinates.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new((0..dim).map(|i| format!("x{i}")).collect(), vec![lo; dim], vec![hi; dim])
    }

    /// Parameters and bounds of a controller structure. Gains start in
    /// `[0, INITIAL_GAIN_RANGE]`.
    pub fn for_structure(structure: Structure) -> Self {
        let params = structure.params();
        let upper: Vec<f64> = params.iter().map(|(_, k)| k.bounds().1).collect();
        let init_upper = params
            .iter()
            .zip(&upper)
            .map(|((_, k), &u)| if *k == ParamKind::Gain { u.min(INITIAL_GAIN_RANGE) } else { u })
            .collect();
        let lower: Vec<f64> = params.iter().map(|(_, k)| k.bounds().0).collect();
        Self { names: params.iter().map(|(n, _)| n.to_string()).collect(), init_lower: lower.clone(), lower, upper, init_upper }
    }

    /// Narrows the initial-population box; it must lie inside the bounds.
    pub fn with_initial_range(mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let ok = lower.len() == self.dim()
            && upper.len() == self.dim()
            && (0..self.dim()).all(|i| self.lower[i] <= lower[i] && lower[i] <= upper[i] && upper[i] <= self.upper[i]);
        if !ok {
            return Err(Error::InvalidTuner("initial range must lie inside the bounds".into()));
        }
        self.init_lower = lower;
        self.init_upper = upper;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| v >= l && v <= u)
    }

    pub(crate) fn clip(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}
