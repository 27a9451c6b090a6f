//! Fixed-point solvers for the dual-expectations system.

pub mod convex;
pub(crate) mod engine;
pub mod general;
pub mod sshaped;

pub use convex::{certify_uniqueness, solve_cheap_talk, solve_dual_expectations, Certificate};
pub use engine::{Iteration, SegmentKind};
pub use general::{
    check_bipooling_feasibility, find_bitangents, solve_general, solve_structure, Bitangent, Candidate,
    GeneralSolution, PairFeasibility,
};
pub use sshaped::{
    classify_curvature, compute_upper_censorship, detect_inflection, solve_sshaped, Censorship, CurvatureShape,
    SShapeProfile,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Seeding {
    /// All interior cutoffs start at 0, the bottom of the lattice.
    NearZero,
    /// All interior cutoffs start at 1.
    NearOne,
    /// Interior cutoffs `s_1 … s_{N−1}`.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub n: usize,
    pub max_iter: usize,
    /// Residual tolerance.
    pub tol: f64,
    /// Sup-norm step tolerance.
    pub step_tol: f64,
    pub seeding: Seeding,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { n: 1, max_iter: 10_000, tol: 1e-8, step_tol: 1e-10, seeding: Seeding::NearZero }
    }
}

impl SolverOptions {
    pub fn with_n(n: usize) -> Self {
        SolverOptions { n, ..Default::default() }
    }

    pub fn seeded(&self, seeding: Seeding) -> Self {
        SolverOptions { seeding, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidOptions("N must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.step_tol > 0.0) {
            return Err(Error::InvalidOptions("tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidOptions("max_iter must be positive".into()));
        }
        if let Seeding::Custom(s) = &self.seeding {
            if s.len() + 1 != self.n {
                return Err(Error::InvalidOptions(format!("custom seed needs {} cutoffs", self.n - 1)));
            }
            if s.windows(2).any(|w| w[0] > w[1]) || s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidOptions("custom seed must be sorted within [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Interior cutoffs for a budget of `k` segments.
    pub(crate) fn seed_cutoffs(&self, k: usize) -> Vec<f64> {
        match &self.seeding {
            Seeding::NearZero => vec![0.0; k.saturating_sub(1)],
            Seeding::NearOne => vec![1.0; k.saturating_sub(1)],
            Seeding::Custom(s) if s.len() + 1 == k => s.clone(),
            Seeding::Custom(_) => (1..k).map(|i| i as f64 / k as f64).collect(),
        }
    }
}
