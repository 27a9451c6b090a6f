//! Value functions that are convex, then concave.

use super::convex::null_information;
use super::engine::{CutoffRule, Iteration, SegmentKind, Setup};
use super::{Seeding, SolverOptions};
use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::quadrature;
use crate::structures::IntervalSolution;
use crate::value::ValueFunction;

const SIGN_GRID: usize = 2048;
const CENSOR_SEEDS: usize = 16;
const GOLDEN_TOL: f64 = 1e-10;

/// Sign pattern of a curvature on the check grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureShape {
    Convex,
    Concave,
    /// Positive, then negative past the inflection.
    SShaped(f64),
    /// Negative, then positive past the inflection.
    ReverseS(f64),
    /// More than one sign change.
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SShapeProfile {
    pub inflection: f64,
    pub sign_verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Censorship {
    pub s_star: f64,
    pub payoff: f64,
}

/// Sign changes of `u″` on the grid, each refined by bisection to 1e−12.
pub fn sign_changes(u2: &FunctionModel) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for i in 1..SIGN_GRID {
        let t = i as f64 / SIGN_GRID as f64;
        let v = u2.value(t);
        if v == 0.0 || !v.is_finite() {
            continue;
        }
        if let Some((tp, vp)) = last {
            if (vp > 0.0) != (v > 0.0) {
                let (mut lo, mut hi) = (tp, t);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    let vm = u2.value(mid);
                    if vm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (vm > 0.0) == (vp > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                out.push((0.5 * (lo + hi), vp > 0.0));
            }
        }
        last = Some((t, v));
    }
    out
}

pub fn classify_curvature(u2: &FunctionModel) -> CurvatureShape {
    let changes = sign_changes(u2);
    match changes.as_slice() {
        [] => {
            let positive = u2.sample(SIGN_GRID).iter().any(|v| *v > 0.0);
            if positive {
                CurvatureShape::Convex
            } else {
                CurvatureShape::Concave
            }
        }
        [(x, true)] => CurvatureShape::SShaped(*x),
        [(x, false)] => CurvatureShape::ReverseS(*x),
        _ => CurvatureShape::Irregular,
    }
}

/// Inflection point of an S-shaped curvature.
pub fn detect_inflection(u2: &FunctionModel) -> Result<SShapeProfile> {
    match classify_curvature(u2) {
        CurvatureShape::SShaped(x) => Ok(SShapeProfile { inflection: x, sign_verified: true }),
        CurvatureShape::Convex => Err(Error::NotSShaped("convex")),
        CurvatureShape::Concave => Err(Error::NotSShaped("concave")),
        CurvatureShape::ReverseS(_) => Err(Error::NotSShaped("concave then convex")),
        CurvatureShape::Irregular => Err(Error::NotSShaped("inflected more than once")),
    }
}

/// `V(s) = ∫_0^s u f + (1 − F(s)) u(φ(s, 1))`, full revelation below `s`.
struct CensorValue<'a> {
    f: &'a FunctionModel,
    u: &'a ValueFunction,
    cum: Vec<f64>,
}

impl<'a> CensorValue<'a> {
    fn new(f: &'a FunctionModel, u: &'a ValueFunction) -> Self {
        let cum = quadrature::cumulative(f.edges(), |t| u.value(t) * f.value(t));
        CensorValue { f, u, cum }
    }

    fn eval(&self, s: f64) -> f64 {
        let revealed =
            quadrature::integrate_with(self.f.edges(), &self.cum, |t| self.u.value(t) * self.f.value(t), 0.0, s);
        let (m0, m1) = self.f.moments(s, 1.0);
        if m0 <= 0.0 {
            return revealed;
        }
        revealed + m0 * self.u.value(s + m1 / m0)
    }
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > GOLDEN_TOL {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Best upper-censorship cutoff on `[0, x̂]`.
pub fn compute_upper_censorship(f: &FunctionModel, u: &ValueFunction) -> Result<Censorship> {
    let profile = detect_inflection(u.curvature())?;
    Ok(upper_censorship_below(f, u, profile.inflection))
}

fn upper_censorship_below(f: &FunctionModel, u: &ValueFunction, xhat: f64) -> Censorship {
    let v = CensorValue::new(f, u);
    let g = |s: f64| v.eval(s);
    let mut best = (0.0, g(0.0));
    let end = (xhat, g(xhat));
    if end.1 > best.1 {
        best = end;
    }
    let w = xhat / CENSOR_SEEDS as f64;
    for i in 0..CENSOR_SEEDS {
        let (s, val) = golden_max(g, i as f64 * w, (i + 1) as f64 * w);
        if val > best.1 {
            best = (s, val);
        }
    }
    // one parabolic step through the neighbourhood of the best point
    let h = 1e-5f64.min(0.5 * xhat);
    let (s, fs) = best;
    if s - h > 0.0 && s + h < xhat {
        let (fl, fr) = (g(s - h), g(s + h));
        let denom = fl - 2.0 * fs + fr;
        if denom < 0.0 {
            let cand = (s - 0.5 * h * (fr - fl) / denom).clamp(0.0, xhat);
            let fc = g(cand);
            if fc > fs {
                best = (cand, fc);
            }
        }
    }
    Censorship { s_star: best.0, payoff: best.1 }
}

/// Interval solution for S-shaped `u` with the last interior cutoff kept
/// below the inflection point. A concave-then-convex `u` is solved in the
/// reflected state `1 − t` and mapped back.
pub fn solve_sshaped(f: &FunctionModel, u: &ValueFunction, opts: &SolverOptions) -> Result<IntervalSolution> {
    opts.validate()?;
    if let CurvatureShape::ReverseS(_) = classify_curvature(u.curvature()) {
        let opts = match &opts.seeding {
            Seeding::Custom(s) => opts.seeded(Seeding::Custom(s.iter().rev().map(|c| 1.0 - c).collect())),
            _ => opts.clone(),
        };
        let sol = solve_upright(&f.reflected(), &u.reflected(), &opts)?;
        return Ok(reflect_solution(sol));
    }
    solve_upright(f, u, opts)
}

fn reflect_solution(sol: IntervalSolution) -> IntervalSolution {
    let mut residuals = sol.residuals;
    residuals.signal.reverse();
    residuals.cutoff.reverse();
    IntervalSolution {
        cutoffs: sol.cutoffs.iter().rev().map(|c| 1.0 - c).collect(),
        signals: sol.signals.iter().rev().map(|x| 1.0 - x).collect(),
        masses: sol.masses.into_iter().rev().collect(),
        payoff: sol.payoff,
        residuals,
        iterations: sol.iterations,
    }
}

fn solve_upright(f: &FunctionModel, u: &ValueFunction, opts: &SolverOptions) -> Result<IntervalSolution> {
    let profile = detect_inflection(u.curvature())?;
    if opts.n == 1 {
        return null_information(f, u);
    }
    let xhat = profile.inflection;
    let cens = upper_censorship_below(f, u, xhat);
    let n = opts.n;
    let mut seeds = vec![opts.seed_cutoffs(n)];
    if opts.seeding != Seeding::NearZero {
        seeds.push(vec![0.0; n - 1]);
    }
    seeds.push((1..n).map(|k| k as f64 * cens.s_star / (n - 1) as f64).collect());

    let mut best: Option<IntervalSolution> = None;
    let mut last_err = None;
    for seed in seeds {
        let setup = Setup {
            f,
            rule: CutoffRule::Barycenter(u.curvature()),
            segments: vec![SegmentKind::Free; n],
            clamp: true,
            ceiling: Some(xhat),
            relax: 1.0,
        };
        let mut it = Iteration::new(setup, &seed);
        let outcome = it.run(opts.max_iter, opts.step_tol, opts.tol).and_then(|r| {
            it.check_collapse()?;
            let mut sol = IntervalSolution::from_cutoffs(f, u, it.cutoffs().to_vec())?;
            sol.signals = it.atoms().to_vec();
            sol.residuals = r;
            sol.iterations = it.iterations();
            Ok(sol)
        });
        match outcome {
            Ok(sol) => {
                if best.as_ref().is_none_or(|b| sol.payoff > b.payoff) {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::NoConvergence { iterations: 0, residual: f64::INFINITY }))
}
