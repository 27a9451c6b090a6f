//! Solutions, integral distributions, and payoff evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::value::ValueFunction;

/// Grid resolution for mean-preserving-contraction checks.
pub const MPC_GRID: usize = 2048;
const MPC_TOL: f64 = 1e-9;

/// Per-equation fixed-point residuals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|x_k − φ(s_{k−1}, s_k)|`, one per single-signal segment.
    pub signal: Vec<f64>,
    /// Cutoff-equation residual, one per interior cutoff.
    pub cutoff: Vec<f64>,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.signal.iter().chain(&self.cutoff).fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Interval-partitional solution in unit coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSolution {
    /// `s_0 = 0 < s_1 < … < s_N = 1`.
    pub cutoffs: Vec<f64>,
    pub signals: Vec<f64>,
    pub masses: Vec<f64>,
    pub payoff: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

impl IntervalSolution {
    /// Fills signals, masses and payoff from a cutoff vector; residuals are
    /// left empty for the caller.
    pub fn from_cutoffs(f: &FunctionModel, u: &ValueFunction, cutoffs: Vec<f64>) -> Result<Self> {
        let n = cutoffs.len() - 1;
        let mut signals = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n);
        for k in 0..n {
            signals.push(f.phi(cutoffs[k], cutoffs[k + 1])?);
            masses.push(f.m0(cutoffs[k], cutoffs[k + 1]));
        }
        let payoff = masses.iter().zip(&signals).map(|(m, x)| m * u.value(*x)).sum();
        Ok(IntervalSolution { cutoffs, signals, masses, payoff, residuals: Residuals::default(), iterations: 0 })
    }

    pub fn n(&self) -> usize {
        self.signals.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.cutoffs.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.signals.iter().copied().zip(self.masses.iter().copied()).collect()
    }

    pub fn interior_cutoffs(&self) -> &[f64] {
        &self.cutoffs[1..self.cutoffs.len() - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Single { x: f64, mass: f64 },
    Pair { x1: f64, x2: f64, mass1: f64, mass2: f64 },
}

impl Segment {
    pub fn is_pair(&self) -> bool {
        matches!(self, Segment::Pair { .. })
    }

    /// Atom nearest the left cutoff.
    pub fn left(&self) -> f64 {
        match self {
            Segment::Single { x, .. } => *x,
            Segment::Pair { x1, .. } => *x1,
        }
    }

    pub fn right(&self) -> f64 {
        match self {
            Segment::Single { x, .. } => *x,
            Segment::Pair { x2, .. } => *x2,
        }
    }

    pub fn mass(&self) -> f64 {
        match self {
            Segment::Single { mass, .. } => *mass,
            Segment::Pair { mass1, mass2, .. } => mass1 + mass2,
        }
    }

    pub fn signal_count(&self) -> usize {
        if self.is_pair() {
            2
        } else {
            1
        }
    }
}

/// Interval segments mixed with two-atom segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiPoolingSolution {
    pub cutoffs: Vec<f64>,
    pub segments: Vec<Segment>,
    pub payoff: f64,
    pub residuals: Residuals,
    /// Largest bi-tangency residual over pair segments.
    pub bitangency_residual: f64,
}

impl BiPoolingSolution {
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for s in &self.segments {
            match s {
                Segment::Single { x, mass } => out.push((*x, *mass)),
                Segment::Pair { x1, x2, mass1, mass2 } => {
                    out.push((*x1, *mass1));
                    out.push((*x2, *mass2));
                }
            }
        }
        out
    }

    pub fn signal_count(&self) -> usize {
        self.segments.iter().map(Segment::signal_count).sum()
    }

    pub fn pair_count(&self) -> usize {
        self.segments.iter().filter(|s| s.is_pair()).count()
    }

    pub fn from_interval(sol: &IntervalSolution) -> Self {
        BiPoolingSolution {
            cutoffs: sol.cutoffs.clone(),
            segments: sol.atoms().into_iter().map(|(x, mass)| Segment::Single { x, mass }).collect(),
            payoff: sol.payoff,
            residuals: sol.residuals.clone(),
            bitangency_residual: 0.0,
        }
    }

    /// The interval solution, if there are no pair segments.
    pub fn to_interval(&self) -> Option<IntervalSolution> {
        if self.pair_count() > 0 {
            return None;
        }
        let atoms = self.atoms();
        Some(IntervalSolution {
            cutoffs: self.cutoffs.clone(),
            signals: atoms.iter().map(|a| a.0).collect(),
            masses: atoms.iter().map(|a| a.1).collect(),
            payoff: self.payoff,
            residuals: self.residuals.clone(),
            iterations: 0,
        })
    }
}

/// `I_F(x) = ∫_0^x F = x F(x) − ∫_0^x t f(t) dt`.
pub fn integral_cdf(f: &FunctionModel, x: f64) -> f64 {
    x * f.cdf(x) - f.first_moment(x)
}

/// `I_G` of a discrete distribution: `Σ_j m_j (x − a_j)⁺`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralDistribution {
    /// Kink locations with the mass each one carries.
    pub kinks: Vec<(f64, f64)>,
}

impl IntegralDistribution {
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Self {
        let mut kinks: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
        IntegralDistribution { kinks }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.kinks.iter().map(|(a, m)| m * (x - a).max(0.0)).sum()
    }

    /// Right slope, i.e. `G(x)`.
    pub fn slope(&self, x: f64) -> f64 {
        self.kinks.iter().filter(|(a, _)| *a <= x).map(|k| k.1).sum()
    }

    /// Slopes on each linear piece, left to right, starting from 0.
    pub fn slopes(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for (_, m) in &self.kinks {
            acc += m;
            out.push(acc);
        }
        out
    }

    /// Largest `I_G − I_F` on the check grid (plus the kinks).
    pub fn mpc_excess(&self, f: &FunctionModel) -> (f64, f64) {
        let mean = f.first_moment(1.0) / f.total();
        let mut worst = (0.0, f64::NEG_INFINITY);
        let pts = (0..=MPC_GRID).map(|i| i as f64 / MPC_GRID as f64).chain(self.kinks.iter().map(|k| k.0));
        for x in pts {
            let ig = self.value(x);
            let upper = ig - integral_cdf(f, x);
            let lower = (x - mean).max(0.0) - ig;
            let e = upper.max(lower);
            if e > worst.1 {
                worst = (x, e);
            }
        }
        worst
    }

    /// `a ≤ b` pointwise on the grid: `a` is Blackwell less informative.
    pub fn less_informative_than(&self, other: &IntegralDistribution, tol: f64) -> bool {
        (0..=MPC_GRID).all(|i| {
            let x = i as f64 / MPC_GRID as f64;
            self.value(x) <= other.value(x) + tol
        })
    }
}

/// Builds `I_G` for a solution and verifies it against `I_F` and `I_{F0}`.
pub fn build_integral_distribution(atoms: &[(f64, f64)], f: &FunctionModel) -> Result<IntegralDistribution> {
    let ig = IntegralDistribution::from_atoms(atoms);
    let (x, excess) = ig.mpc_excess(f);
    if excess > MPC_TOL {
        return Err(Error::MpcViolation { x, excess });
    }
    Ok(ig)
}

/// `Σ mass · u(atom)`.
pub fn payoff_direct(atoms: &[(f64, f64)], u: &ValueFunction) -> f64 {
    atoms.iter().map(|(x, m)| m * u.value(*x)).sum()
}

/// `u(1) − u′(1) I_F(1) + ∫ u″ I_G`.
pub fn payoff_auxiliary(ig: &IntegralDistribution, f: &FunctionModel, u: &ValueFunction) -> f64 {
    let u2 = u.curvature();
    let curvature_term: f64 = ig
        .kinks
        .iter()
        .map(|(a, m)| {
            let (_, m1) = u2.moments(*a, 1.0);
            m * m1
        })
        .sum();
    u.value(1.0) - u.slope(1.0) * integral_cdf(f, 1.0) + curvature_term
}
