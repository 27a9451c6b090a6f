//! Gauss–Seidel sweep shared by every solver.
//!
//! The state is a cutoff vector `0 = s_0 ≤ … ≤ s_K = 1` plus one or two
//! atoms per segment. A sweep visits segments left to right: a free segment
//! resets its atom to the conditional prior mean, then the cutoff to its
//! right is recomputed from the neighbouring atoms by the cutoff rule.

use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::structures::Residuals;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentKind {
    /// Atom at the conditional mean of the segment.
    Free,
    /// Atom pinned at a given point.
    Fixed(f64),
    /// Two pinned atoms.
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum CutoffRule<'a> {
    /// Barycenter of the neighbouring atoms under `u″`.
    Barycenter(&'a FunctionModel),
    /// `(y_k + y_{k+1}) / (2κ)`.
    CheapTalk(f64),
}

impl CutoffRule<'_> {
    fn eval(&self, left: f64, right: f64) -> Option<f64> {
        match self {
            CutoffRule::Barycenter(u2) => u2.mean_raw(left, right),
            CutoffRule::CheapTalk(kappa) => Some((left + right) / (2.0 * kappa)),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Setup<'a> {
    pub f: &'a FunctionModel,
    pub rule: CutoffRule<'a>,
    pub segments: Vec<SegmentKind>,
    /// Clamp each cutoff between its neighbouring atoms.
    pub clamp: bool,
    /// Upper bound on the last interior cutoff.
    pub ceiling: Option<f64>,
    /// Under-relaxation weight on each cutoff update; 1 is a plain sweep.
    pub relax: f64,
}

/// Iterate state, exposed for step-by-step inspection.
#[derive(Debug, Clone)]
pub struct Iteration<'a> {
    setup: Setup<'a>,
    cutoffs: Vec<f64>,
    atoms: Vec<f64>,
    iterations: usize,
}

impl<'a> Iteration<'a> {
    pub(crate) fn new(setup: Setup<'a>, interior: &[f64]) -> Self {
        let k = setup.segments.len();
        debug_assert_eq!(interior.len() + 1, k);
        let mut cutoffs = Vec::with_capacity(k + 1);
        cutoffs.push(0.0);
        cutoffs.extend_from_slice(interior);
        cutoffs.push(1.0);
        let atoms = (0..k)
            .map(|i| match setup.segments[i] {
                SegmentKind::Free => setup.f.mean_raw(cutoffs[i], cutoffs[i + 1]).unwrap_or(cutoffs[i]),
                SegmentKind::Fixed(x) | SegmentKind::Pair(x, _) => x,
            })
            .collect();
        Iteration { setup, cutoffs, atoms, iterations: 0 }
    }

    pub fn cutoffs(&self) -> &[f64] {
        &self.cutoffs
    }

    /// Left atom of each segment.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn right_atom(&self, i: usize) -> f64 {
        match self.setup.segments[i] {
            SegmentKind::Pair(_, x2) => x2,
            _ => self.atoms[i],
        }
    }

    fn free_mean(&self, i: usize) -> f64 {
        let (a, b) = (self.cutoffs[i], self.cutoffs[i + 1]);
        self.setup.f.mean_raw(a, b).unwrap_or(0.5 * (a + b))
    }

    fn next_cutoff(&self, i: usize) -> f64 {
        let (yl, yr) = (self.right_atom(i), self.atoms[i + 1]);
        let old = self.cutoffs[i + 1];
        let mut s = self.setup.rule.eval(yl, yr).unwrap_or(old);
        s = old + self.setup.relax * (s - old);
        if self.setup.clamp && yl <= yr {
            s = s.clamp(yl, yr);
        }
        let k = self.setup.segments.len();
        if i + 2 == k {
            if let Some(c) = self.setup.ceiling {
                s = s.min(c).max(self.cutoffs[i]);
            }
        }
        s.clamp(0.0, 1.0)
    }

    /// One sweep; returns the sup-norm change of the state.
    pub fn step(&mut self) -> f64 {
        let k = self.setup.segments.len();
        let mut change = 0.0f64;
        for i in 0..k {
            if self.setup.segments[i] == SegmentKind::Free {
                let x = self.free_mean(i);
                change = change.max((x - self.atoms[i]).abs());
                self.atoms[i] = x;
            }
            if i + 1 < k {
                let s = self.next_cutoff(i);
                change = change.max((s - self.cutoffs[i + 1]).abs());
                self.cutoffs[i + 1] = s;
            }
        }
        self.iterations += 1;
        change
    }

    pub fn residuals(&self) -> Residuals {
        let k = self.setup.segments.len();
        let mut r = Residuals::default();
        for i in 0..k {
            if self.setup.segments[i] == SegmentKind::Free {
                let (a, b) = (self.cutoffs[i], self.cutoffs[i + 1]);
                let m = self.setup.f.mean_raw(a, b);
                r.signal.push(m.map_or(f64::INFINITY, |m| (self.atoms[i] - m).abs()));
            }
            if i + 1 < k {
                let raw = self.setup.rule.eval(self.right_atom(i), self.atoms[i + 1]);
                r.cutoff.push(raw.map_or(f64::INFINITY, |s| (self.cutoffs[i + 1] - s).abs()));
            }
        }
        r
    }

    /// Iterates until both the step and the residuals are below tolerance.
    pub(crate) fn run(&mut self, max_iter: usize, step_tol: f64, tol: f64) -> Result<Residuals> {
        if self.setup.segments.len() == 1 {
            self.step();
            return Ok(self.residuals());
        }
        let mut last = f64::INFINITY;
        while self.iterations < max_iter {
            let change = self.step();
            if change < step_tol {
                let r = self.residuals();
                last = r.max();
                if last < tol {
                    return Ok(r);
                }
            }
        }
        if !last.is_finite() {
            last = self.residuals().max();
        }
        Err(Error::NoConvergence { iterations: self.iterations, residual: last })
    }

    /// Error if two cutoffs coincide.
    pub(crate) fn check_collapse(&self) -> Result<()> {
        for (i, w) in self.cutoffs.windows(2).enumerate() {
            if w[1] - w[0] < 1e-12 {
                return Err(Error::CollapsedInterval { k: i + 1, next: i + 2 });
            }
        }
        Ok(())
    }
}
