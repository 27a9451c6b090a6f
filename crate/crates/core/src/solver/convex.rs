//! Strictly convex value functions and the cheap-talk variant.

use super::engine::{CutoffRule, Iteration, SegmentKind, Setup};
use super::{Seeding, SolverOptions};
use crate::error::{Error, Result};
use crate::funcmodel::FunctionModel;
use crate::structures::IntervalSolution;
use crate::value::ValueFunction;

const SIGN_GRID: usize = 2048;

/// Largest and smallest fixed points of the monotone iteration.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub unique: bool,
    pub largest: IntervalSolution,
    pub smallest: IntervalSolution,
}

impl Certificate {
    /// The higher-payoff extreme fixed point.
    pub fn selected(&self) -> &IntervalSolution {
        if self.largest.payoff > self.smallest.payoff {
            &self.largest
        } else {
            &self.smallest
        }
    }
}

pub(crate) fn check_convex(u2: &FunctionModel) -> Result<()> {
    let vals = u2.sample(SIGN_GRID);
    let interior = &vals[1..SIGN_GRID];
    if interior.iter().any(|v| *v < 0.0) || interior.iter().all(|v| *v == 0.0) {
        return Err(Error::Precondition("curvature must be positive on (0, 1)".into()));
    }
    Ok(())
}

fn finish(
    f: &FunctionModel,
    u: &ValueFunction,
    it: &Iteration<'_>,
    residuals: crate::structures::Residuals,
) -> Result<IntervalSolution> {
    it.check_collapse()?;
    let mut sol = IntervalSolution::from_cutoffs(f, u, it.cutoffs().to_vec())?;
    sol.signals = it.atoms().to_vec();
    sol.residuals = residuals;
    sol.iterations = it.iterations();
    Ok(sol)
}

pub(crate) fn null_information(f: &FunctionModel, u: &ValueFunction) -> Result<IntervalSolution> {
    IntervalSolution::from_cutoffs(f, u, vec![0.0, 1.0])
}

/// Solves `x_k = φ(s_{k−1}, s_k)`, `s_k = μ(x_k, x_{k+1})` for convex `u`.
pub fn solve_dual_expectations(f: &FunctionModel, u: &ValueFunction, opts: &SolverOptions) -> Result<IntervalSolution> {
    opts.validate()?;
    check_convex(u.curvature())?;
    if opts.n == 1 {
        return null_information(f, u);
    }
    let setup = Setup {
        f,
        rule: CutoffRule::Barycenter(u.curvature()),
        segments: vec![SegmentKind::Free; opts.n],
        clamp: false,
        ceiling: None,
        relax: 1.0,
    };
    let mut it = Iteration::new(setup, &opts.seed_cutoffs(opts.n));
    let r = it.run(opts.max_iter, opts.step_tol, opts.tol)?;
    finish(f, u, &it, r)
}

/// Runs the iteration from the bottom and the top of the lattice.
pub fn certify_uniqueness(f: &FunctionModel, u: &ValueFunction, opts: &SolverOptions) -> Result<Certificate> {
    let smallest = solve_dual_expectations(f, u, &opts.seeded(Seeding::NearZero))?;
    let largest = solve_dual_expectations(f, u, &opts.seeded(Seeding::NearOne))?;
    let gap = smallest
        .cutoffs
        .iter()
        .zip(&largest.cutoffs)
        .chain(smallest.signals.iter().zip(&largest.signals))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Certificate { unique: gap <= 10.0 * opts.tol, largest, smallest })
}

/// Partition equilibrium with cutoff rule `s_k = (x_k + x_{k+1}) / (2κ₁)`.
///
/// The reported payoff is `Σ p_k x_k²`.
pub fn solve_cheap_talk(f: &FunctionModel, kappa1: f64, opts: &SolverOptions) -> Result<IntervalSolution> {
    opts.validate()?;
    if !(kappa1 >= 1.0 && kappa1.is_finite()) {
        return Err(Error::InvalidOptions("κ₁ must be at least 1".into()));
    }
    let u = ValueFunction::new(FunctionModel::constant(2.0));
    if opts.n == 1 {
        return null_information(f, &u);
    }
    let setup = Setup {
        f,
        rule: CutoffRule::CheapTalk(kappa1),
        segments: vec![SegmentKind::Free; opts.n],
        clamp: false,
        ceiling: None,
        relax: 1.0,
    };
    let mut it = Iteration::new(setup, &opts.seed_cutoffs(opts.n));
    let r = it.run(opts.max_iter, opts.step_tol, opts.tol)?;
    if it.cutoffs().windows(2).any(|w| w[1] - w[0] < 1e-9) {
        return Err(Error::Unsupportable { n: opts.n });
    }
    finish(f, &u, &it, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcmodel::Kind;
    use crate::oracle::oracle_interval;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn equal_split() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(4)).unwrap();
        for k in 0..=4 {
            close(sol.cutoffs[k], k as f64 / 4.0, 1e-9);
        }
        for k in 1..=4 {
            close(sol.signals[k - 1], (2 * k - 1) as f64 / 8.0, 1e-9);
        }
        assert!(sol.residuals.max() < 1e-8);
    }

    #[test]
    fn single_signal_is_null_information() {
        let f = FunctionModel::density(Kind::Beta { alpha: 2.0, beta: 5.0 }, (0.0, 1.0)).unwrap();
        let u = ValueFunction::new(FunctionModel::curvature_expr("exp(x)").unwrap());
        let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(1)).unwrap();
        close(sol.signals[0], 2.0 / 7.0, 1e-12);
        close(sol.payoff, u.value(2.0 / 7.0), 1e-12);
    }

    #[test]
    fn linear_density_matches_grid_oracle() {
        let f = FunctionModel::density_expr("2*x").unwrap();
        let u = ValueFunction::quadratic();
        let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(2)).unwrap();
        let s = sol.cutoffs[1];
        close(s, 0.5 * (f.phi(0.0, s).unwrap() + f.phi(s, 1.0).unwrap()), 1e-9);
        let o = oracle_interval(&f, &u, 2, 400);
        close(s, o.cutoffs[1], 2.0 / 400.0);
        assert!(sol.payoff >= o.payoff - 1e-12);
    }

    #[test]
    fn certification() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let c = certify_uniqueness(&f, &u, &SolverOptions::with_n(3)).unwrap();
        assert!(c.unique);
        close(c.largest.cutoffs[1], 1.0 / 3.0, 1e-9);
        let f = FunctionModel::density(Kind::Beta { alpha: 2.0, beta: 2.0 }, (0.0, 1.0)).unwrap();
        let u = ValueFunction::new(
            FunctionModel::curvature(Kind::TruncatedNormal { mean: 0.3, sd: 0.2 }, (0.0, 1.0)).unwrap(),
        );
        assert!(certify_uniqueness(&f, &u, &SolverOptions::with_n(5)).unwrap().unique);
    }

    #[test]
    fn bimodal_prior_reports_a_verdict() {
        let f = FunctionModel::density_expr("2048*(x-0.5)^2").unwrap();
        let u = ValueFunction::quadratic();
        let c = certify_uniqueness(&f, &u, &SolverOptions::with_n(4)).unwrap();
        assert!(c.smallest.residuals.max() < 1e-8 && c.largest.residuals.max() < 1e-8);
        let sel = c.selected();
        assert!(sel.payoff >= c.largest.payoff.min(c.smallest.payoff));
    }

    #[test]
    fn concave_curvature_is_rejected() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::new(FunctionModel::curvature_expr("1-2*x").unwrap());
        assert!(matches!(solve_dual_expectations(&f, &u, &SolverOptions::with_n(3)), Err(Error::Precondition(_))));
    }

    #[test]
    fn curvature_touching_zero_is_allowed() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::new(FunctionModel::curvature_expr("(x-0.5)^8").unwrap());
        let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(4)).unwrap();
        assert!(sol.residuals.max() < 1e-8);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let f = FunctionModel::uniform();
        let u = ValueFunction::quadratic();
        let opts = SolverOptions { n: 6, max_iter: 3, ..Default::default() };
        assert!(matches!(solve_dual_expectations(&f, &u, &opts), Err(Error::NoConvergence { iterations: 3, .. })));
    }

    #[test]
    fn monotone_iterates() {
        let f = FunctionModel::density(Kind::TruncatedNormal { mean: 0.4, sd: 0.25 }, (0.0, 1.0)).unwrap();
        let u2 = FunctionModel::curvature_expr("exp(x)").unwrap();
        for (seed, dir) in [(0.0, 1.0), (1.0, -1.0)] {
            let setup = Setup {
                f: &f,
                rule: CutoffRule::Barycenter(&u2),
                segments: vec![SegmentKind::Free; 5],
                clamp: false,
                ceiling: None,
                relax: 1.0,
            };
            let mut it = Iteration::new(setup, &[seed; 4]);
            let mut prev = it.cutoffs().to_vec();
            for _ in 0..200 {
                it.step();
                for (a, b) in it.cutoffs().iter().zip(&prev) {
                    assert!(dir * (a - b) >= -1e-14);
                }
                prev = it.cutoffs().to_vec();
            }
        }
    }

    #[test]
    fn cheap_talk() {
        let f = FunctionModel::uniform();
        let sol = solve_cheap_talk(&f, 1.0, &SolverOptions::with_n(4)).unwrap();
        for k in 0..=4 {
            close(sol.cutoffs[k], k as f64 / 4.0, 1e-8);
        }
        let sol = solve_cheap_talk(&f, 1.25, &SolverOptions::with_n(2)).unwrap();
        close(sol.cutoffs[1], 1.0 / 3.0, 1e-8);
        assert!(sol.residuals.max() < 1e-8);
        assert!(solve_cheap_talk(&f, 0.5, &SolverOptions::with_n(2)).is_err());
        // a steep bias shrinks the ladder geometrically toward 0
        let sol = solve_cheap_talk(&f, 6.0, &SolverOptions::with_n(4)).unwrap();
        assert!(sol.cutoffs[1] < 1e-3);
        assert!(matches!(
            solve_cheap_talk(&f, 40.0, &SolverOptions::with_n(8)),
            Err(Error::Unsupportable { .. } | Error::CollapsedInterval { .. })
        ));
    }

    #[test]
    fn payoff_increases_with_budget() {
        let f = FunctionModel::density(Kind::Beta { alpha: 3.0, beta: 1.5 }, (0.0, 1.0)).unwrap();
        let u = ValueFunction::new(FunctionModel::curvature_expr("exp(-x)").unwrap());
        let mut last = f64::NEG_INFINITY;
        for n in 1..=6 {
            let sol = solve_dual_expectations(&f, &u, &SolverOptions::with_n(n)).unwrap();
            assert!(sol.payoff >= last - 1e-12);
            assert!(sol.widths().iter().all(|w| *w > 0.0));
            last = sol.payoff;
        }
    }
}
