//! Scrutiny diagnostics and comparative statics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::solver::{certify_uniqueness, SolverOptions};
use crate::structures::IntervalSolution;
use crate::value::ValueFunction;

const DIP_SLACK: f64 = 1e-9;
const RATIO_GRID: usize = 512;
const RATIO_SLACK: f64 = 1e-10;
const MODE_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrutinyReport {
    /// `w_k = s_k − s_{k−1}`.
    pub widths: Vec<f64>,
    /// `d_k = x_{k+1} − x_k`.
    pub gaps: Vec<f64>,
    /// `w_1, d_1, w_2, …, d_{N−1}, w_N`.
    pub interleaved: Vec<f64>,
    pub single_dipped: bool,
    /// 1-based index of the narrowest interval, smallest on ties.
    pub center: usize,
    pub density_mode: Option<f64>,
    pub curvature_mode: Option<f64>,
}

impl ScrutinyReport {
    /// Adds the modes of `f` and `u″` where they are single-peaked.
    pub fn with_modes(mut self, f: &FunctionModel, u2: &FunctionModel) -> Self {
        self.density_mode = unimodal_mode(f);
        self.curvature_mode = unimodal_mode(u2);
        self
    }

    /// 1-based index of the interval containing `x`.
    pub fn interval_of(cutoffs: &[f64], x: f64) -> usize {
        cutoffs[1..].iter().position(|s| x <= *s).map_or(cutoffs.len() - 1, |i| i + 1)
    }
}

/// Decreasing then increasing, or monotone, up to `slack`.
pub fn is_single_dipped(seq: &[f64], slack: f64) -> bool {
    let mut rising = false;
    for w in seq.windows(2) {
        if w[1] > w[0] + slack {
            rising = true;
        } else if rising && w[1] < w[0] - slack {
            return false;
        }
    }
    true
}

/// Location of the peak of a single-peaked, non-constant function.
pub fn unimodal_mode(g: &FunctionModel) -> Option<f64> {
    let vals: Vec<f64> = (0..=MODE_GRID).map(|i| g.value(i as f64 / MODE_GRID as f64)).collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return None;
    }
    let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
    if !is_single_dipped(&neg, 1e-12 * hi.abs().max(1.0)) {
        return None;
    }
    let i = vals.iter().enumerate().fold(0, |b, (i, v)| if *v > vals[b] { i } else { b });
    Some(i as f64 / MODE_GRID as f64)
}

pub fn scrutiny_report(sol: &IntervalSolution) -> ScrutinyReport {
    let widths = sol.widths();
    let gaps: Vec<f64> = sol.signals.windows(2).map(|w| w[1] - w[0]).collect();
    let mut interleaved = Vec::with_capacity(2 * widths.len());
    for (k, w) in widths.iter().enumerate() {
        interleaved.push(*w);
        if let Some(d) = gaps.get(k) {
            interleaved.push(*d);
        }
    }
    let min = widths.iter().copied().fold(f64::INFINITY, f64::min);
    let center = widths.iter().position(|w| *w <= min + DIP_SLACK).map_or(1, |i| i + 1);
    ScrutinyReport {
        single_dipped: is_single_dipped(&interleaved, DIP_SLACK),
        widths,
        gaps,
        interleaved,
        center,
        density_mode: None,
        curvature_mode: None,
    }
}

/// A prior and a value function.
#[derive(Debug, Clone)]
pub struct Problem {
    pub f: FunctionModel,
    pub u: ValueFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparisonKind {
    LikelihoodRatio,
    UniformVariability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub kind: ComparisonKind,
    pub base: IntervalSolution,
    pub shifted: IntervalSolution,
    /// `ŝ_k − s_k`, interior cutoffs only.
    pub cutoff_shifts: Vec<f64>,
    /// `x̂_k − x_k`.
    pub signal_shifts: Vec<f64>,
    /// `x̂_1 − x_1, ŝ_1 − s_1, …, x̂_N − x_N`.
    pub interleaved_shifts: Vec<f64>,
    pub sign_changes: usize,
    /// Sign of the first and last nonzero shift, e.g. `"+-"`; empty when all
    /// shifts vanish.
    pub orientation: String,
    /// Whether the ratio precondition was verified on the grid.
    pub precondition: bool,
    /// The claimed pattern; `None` when the precondition fails.
    pub holds: Option<bool>,
}

fn ratios(base: &Problem, shifted: &Problem) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut fr = Vec::with_capacity(RATIO_GRID);
    let mut ur = Vec::with_capacity(RATIO_GRID);
    for i in 0..RATIO_GRID {
        let t = (i as f64 + 0.5) / RATIO_GRID as f64;
        let (f0, u0) = (base.f.value(t), base.u.second(t));
        if !(f0 > 0.0 && u0 > 0.0) {
            return Err(Error::Precondition(format!("base prior and curvature must be positive at {t}")));
        }
        fr.push(shifted.f.value(t) / f0);
        ur.push(shifted.u.second(t) / u0);
    }
    Ok((fr, ur))
}

fn nondecreasing(r: &[f64]) -> bool {
    r.windows(2).all(|w| w[1] >= w[0] - RATIO_SLACK * w[0].abs().max(1.0))
}

fn single_peaked(r: &[f64]) -> bool {
    let neg: Vec<f64> = r.iter().map(|v| -v).collect();
    let scale = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    is_single_dipped(&neg, RATIO_SLACK * scale)
}

fn solve_certified(p: &Problem, opts: &SolverOptions) -> Result<IntervalSolution> {
    let c = certify_uniqueness(&p.f, &p.u, opts)?;
    if !c.unique {
        return Err(Error::Precondition("fixed point is not certified unique".into()));
    }
    Ok(c.smallest)
}

fn sign_pattern(d: &[f64], tol: f64) -> (usize, String) {
    let signs: Vec<bool> = d.iter().filter(|v| v.abs() > tol).map(|v| *v > 0.0).collect();
    let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
    let sym = |b: bool| if b { '+' } else { '-' };
    let orientation = match (signs.first(), signs.last()) {
        (Some(a), Some(b)) => [sym(*a), sym(*b)].iter().collect(),
        _ => String::new(),
    };
    (changes, orientation)
}

fn compare(kind: ComparisonKind, base: &Problem, shifted: &Problem, opts: &SolverOptions) -> Result<ComparisonReport> {
    let (fr, ur) = ratios(base, shifted)?;
    let precondition = match kind {
        ComparisonKind::LikelihoodRatio => nondecreasing(&fr) && nondecreasing(&ur),
        ComparisonKind::UniformVariability => single_peaked(&fr) && single_peaked(&ur),
    };
    let b = solve_certified(base, opts)?;
    let s = solve_certified(shifted, opts)?;
    let n = b.n();
    let cutoff_shifts: Vec<f64> = (1..n).map(|k| s.cutoffs[k] - b.cutoffs[k]).collect();
    let signal_shifts: Vec<f64> = (0..n).map(|k| s.signals[k] - b.signals[k]).collect();
    let mut interleaved_shifts = Vec::with_capacity(2 * n);
    for (k, d) in signal_shifts.iter().enumerate() {
        interleaved_shifts.push(*d);
        if let Some(c) = cutoff_shifts.get(k) {
            interleaved_shifts.push(*c);
        }
    }
    let tol = opts.tol.max(DIP_SLACK);
    let (sign_changes, orientation) = sign_pattern(&interleaved_shifts, tol);
    let claim = match kind {
        ComparisonKind::LikelihoodRatio => interleaved_shifts.iter().all(|d| *d >= -tol),
        ComparisonKind::UniformVariability => sign_changes <= 1,
    };
    Ok(ComparisonReport {
        kind,
        base: b,
        shifted: s,
        cutoff_shifts,
        signal_shifts,
        interleaved_shifts,
        sign_changes,
        orientation,
        precondition,
        holds: precondition.then_some(claim),
    })
}

/// Shift with increasing `f̂/f` or `û″/u″`: every coordinate should rise.
pub fn compare_likelihood_ratio(base: &Problem, shifted: &Problem, opts: &SolverOptions) -> Result<ComparisonReport> {
    compare(ComparisonKind::LikelihoodRatio, base, shifted, opts)
}

/// Shift with single-peaked `f̂/f` or `û″/u″`: the shifted sequence crosses
/// the original at most once.
pub fn compare_uniform_variability(
    base: &Problem,
    shifted: &Problem,
    opts: &SolverOptions,
) -> Result<ComparisonReport> {
    compare(ComparisonKind::UniformVariability, base, shifted, opts)
}
