//! Routing a spec to the right solver and collecting the results.

use coarse_core::analysis::{
    compare_likelihood_ratio, compare_uniform_variability, scrutiny_report, ComparisonKind, ComparisonReport, Problem,
    ScrutinyReport,
};
use coarse_core::oracle::{default_grid, oracle_bipooling, oracle_interval};
use coarse_core::pricing::{solve_menu, MenuSolution};
use coarse_core::solver::{
    certify_uniqueness, classify_curvature, solve_cheap_talk, solve_dual_expectations, solve_general, solve_sshaped,
    CurvatureShape, Seeding,
};
use coarse_core::structures::Residuals;
use coarse_core::{BiPoolingSolution, FunctionModel, IntervalSolution, Segment, SolverOptions, ValueFunction};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::spec::{ModeSpec, Overrides, ProblemSpec, SeedFrom};

/// Oracle payoffs may beat the solver by at most this much.
pub const ORACLE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Convex,
    /// Concave value: a single pooled signal is optimal.
    Pooling,
    Sshaped,
    General,
    CheapTalk,
    Pricing,
}

/// One signal of a solution, in external coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    pub x: f64,
    pub mass: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub spec: ProblemSpec,
    pub route: Route,
    pub n: usize,
    pub payoff: f64,
    pub max_residual: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// `unique`, `oracle-confirmed`, or absent when not attempted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<String>,
    /// `S` for an interval, `P` for a two-atom pair, left to right.
    pub structure: String,
    /// Segment boundaries in external coordinates.
    pub cutoffs: Vec<f64>,
    pub rows: Vec<LadderRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scrutiny: Option<ScrutinyReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<MenuSolution>,
}

/// A built problem ready to solve.
pub struct Instance {
    pub spec: ProblemSpec,
    pub f: FunctionModel,
    pub u: ValueFunction,
    pub opts: SolverOptions,
    pub seed_from: SeedFrom,
    pub route: Route,
}

impl Instance {
    pub fn build(spec: &ProblemSpec, ov: &Overrides) -> Result<Self> {
        let f = spec.density_model()?;
        let u = spec.value_function()?;
        let (opts, seed_from) = spec.options(ov)?;
        let route = match &spec.mode {
            ModeSpec::Auto => match classify_curvature(u.curvature()) {
                CurvatureShape::Convex => Route::Convex,
                CurvatureShape::Concave => Route::Pooling,
                CurvatureShape::SShaped(_) | CurvatureShape::ReverseS(_) => Route::Sshaped,
                CurvatureShape::Irregular => Route::General,
            },
            ModeSpec::Convex => Route::Convex,
            ModeSpec::Sshaped => Route::Sshaped,
            ModeSpec::General => Route::General,
            ModeSpec::CheapTalk { .. } => Route::CheapTalk,
            ModeSpec::Pricing { .. } => Route::Pricing,
        };
        Ok(Instance { spec: spec.clone(), f, u, opts, seed_from, route })
    }

    fn seeds(&self) -> Vec<SolverOptions> {
        let seeds: &[Seeding] = match self.seed_from {
            SeedFrom::Zero => &[Seeding::NearZero],
            SeedFrom::One => &[Seeding::NearOne],
            SeedFrom::Both => &[Seeding::NearZero, Seeding::NearOne],
        };
        seeds.iter().map(|s| self.opts.seeded(s.clone())).collect()
    }

    /// Runs `solve` from every seed and keeps the best payoff, earliest on ties.
    fn best_of<T>(
        &self,
        solve: impl Fn(&SolverOptions) -> coarse_core::Result<T>,
        payoff: impl Fn(&T) -> f64,
    ) -> Result<T> {
        let mut best: Option<T> = None;
        let mut first_err = None;
        for o in self.seeds() {
            match solve(&o) {
                Ok(s) => {
                    if best.as_ref().is_none_or(|b| payoff(&s) > payoff(b)) {
                        best = Some(s);
                    }
                }
                Err(e) => {
                    first_err.get_or_insert(e);
                }
            }
        }
        best.ok_or_else(|| CliError::Solver(first_err.expect("at least one seed")))
    }

    fn ext(&self, t: f64) -> f64 {
        let (lo, hi) = self.spec.domain();
        lo + (hi - lo) * t
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.spec.domain();
        hi - lo
    }

    pub fn interval_doc(&self, sol: &IntervalSolution, certification: Option<String>) -> SolutionDoc {
        let rows = (0..sol.n())
            .map(|k| LadderRow {
                k: k + 1,
                lower: self.ext(sol.cutoffs[k]),
                upper: self.ext(sol.cutoffs[k + 1]),
                x: self.ext(sol.signals[k]),
                mass: sol.masses[k],
                width: (sol.cutoffs[k + 1] - sol.cutoffs[k]) * self.scale(),
            })
            .collect();
        SolutionDoc {
            spec: self.spec.clone(),
            route: self.route,
            n: sol.n(),
            payoff: sol.payoff,
            max_residual: sol.residuals.max(),
            residuals: sol.residuals.clone(),
            iterations: sol.iterations,
            certification,
            structure: "S".repeat(sol.n()),
            cutoffs: sol.cutoffs.iter().map(|c| self.ext(*c)).collect(),
            rows,
            scrutiny: Some(scrutiny_report(sol).with_modes(&self.f, self.u.curvature())),
            menu: None,
        }
    }

    pub fn bipooling_doc(&self, sol: &BiPoolingSolution) -> SolutionDoc {
        let mut rows = Vec::new();
        let mut structure = String::new();
        for (i, seg) in sol.segments.iter().enumerate() {
            let (a, b) = (sol.cutoffs[i], sol.cutoffs[i + 1]);
            let atoms = match seg {
                Segment::Single { x, mass } => {
                    structure.push('S');
                    vec![(*x, *mass)]
                }
                Segment::Pair { x1, x2, mass1, mass2 } => {
                    structure.push('P');
                    vec![(*x1, *mass1), (*x2, *mass2)]
                }
            };
            for (x, mass) in atoms {
                rows.push(LadderRow {
                    k: rows.len() + 1,
                    lower: self.ext(a),
                    upper: self.ext(b),
                    x: self.ext(x),
                    mass,
                    width: (b - a) * self.scale(),
                });
            }
        }
        SolutionDoc {
            spec: self.spec.clone(),
            route: self.route,
            n: rows.len(),
            payoff: sol.payoff,
            max_residual: sol.residuals.max().max(sol.bitangency_residual),
            residuals: sol.residuals.clone(),
            iterations: 0,
            certification: None,
            structure,
            cutoffs: sol.cutoffs.iter().map(|c| self.ext(*c)).collect(),
            rows,
            scrutiny: None,
            menu: None,
        }
    }

    fn menu_doc(&self, menu: MenuSolution) -> SolutionDoc {
        let rows = menu
            .items
            .iter()
            .map(|i| LadderRow {
                k: i.k,
                lower: i.lower,
                upper: i.upper,
                x: i.x,
                mass: i.mass,
                width: i.upper - i.lower,
            })
            .collect();
        SolutionDoc {
            spec: self.spec.clone(),
            route: self.route,
            n: menu.items.len(),
            payoff: menu.profit,
            max_residual: menu.residuals.max(),
            residuals: menu.residuals.clone(),
            iterations: menu.iterations,
            certification: None,
            structure: "S".repeat(menu.items.len()),
            cutoffs: menu.cutoffs.clone(),
            rows,
            scrutiny: None,
            menu: Some(menu),
        }
    }

    /// Convex solve; with both seeds the fixed point must be unique or
    /// confirmed by the brute-force oracle.
    fn solve_convex(&self) -> Result<SolutionDoc> {
        if self.seed_from != SeedFrom::Both {
            let sol = solve_dual_expectations(&self.f, &self.u, &self.seeds()[0])?;
            return Ok(self.interval_doc(&sol, None));
        }
        let cert = certify_uniqueness(&self.f, &self.u, &self.opts)?;
        if cert.unique {
            return Ok(self.interval_doc(cert.selected(), Some("unique".into())));
        }
        let sel = cert.selected();
        let oracle = oracle_interval(&self.f, &self.u, self.opts.n, default_grid(self.opts.n));
        if oracle.payoff <= sel.payoff + ORACLE_TOL {
            return Ok(self.interval_doc(sel, Some("oracle-confirmed".into())));
        }
        Err(CliError::Certification(format!(
            "extreme fixed points differ and the oracle beats the solver by {:.3e}",
            oracle.payoff - sel.payoff
        )))
    }

    pub fn solve(&self) -> Result<SolutionDoc> {
        match self.route {
            Route::Convex => self.solve_convex(),
            Route::Pooling => {
                let sol = IntervalSolution::from_cutoffs(&self.f, &self.u, vec![0.0, 1.0])?;
                Ok(self.interval_doc(&sol, None))
            }
            Route::Sshaped => {
                let sol = self.best_of(|o| solve_sshaped(&self.f, &self.u, o), |s| s.payoff)?;
                Ok(self.interval_doc(&sol, None))
            }
            Route::General => {
                let sol = self.best_of(|o| solve_general(&self.f, &self.u, o).map(|g| g.best), |s| s.payoff)?;
                Ok(self.bipooling_doc(&sol))
            }
            Route::CheapTalk => {
                let ModeSpec::CheapTalk { kappa1 } = self.spec.mode else { unreachable!("route follows mode") };
                let sol = self.best_of(|o| solve_cheap_talk(&self.f, kappa1, o), |s| s.payoff)?;
                Ok(self.interval_doc(&sol, None))
            }
            Route::Pricing => {
                let inst = self.spec.pricing_instance()?.expect("pricing mode");
                Ok(self.menu_doc(solve_menu(&inst, &self.opts)?))
            }
        }
    }
}

pub fn solve_spec(spec: &ProblemSpec, ov: &Overrides) -> Result<SolutionDoc> {
    Instance::build(spec, ov)?.solve()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub route: Route,
    pub payoff: f64,
    pub max_residual: f64,
    /// Last interior cutoff `s_{N−1}`, absent for `N = 1`.
    pub last_cutoff: Option<f64>,
}

/// One solution per `N`; for convex problems the payoff must not fall.
pub fn sweep(spec: &ProblemSpec, ov: &Overrides, from: usize, to: usize) -> Result<Vec<SweepRow>> {
    if from == 0 || from > to {
        return Err(CliError::validation("n-range", format!("need 1 ≤ from ≤ to, got {from}..{to}")));
    }
    let mut rows: Vec<SweepRow> = Vec::new();
    for n in from..=to {
        let spec = ProblemSpec { n, ..spec.clone() };
        let doc = solve_spec(&spec, ov)?;
        let c = &doc.cutoffs;
        rows.push(SweepRow {
            n,
            route: doc.route,
            payoff: doc.payoff,
            max_residual: doc.max_residual,
            last_cutoff: (c.len() > 2).then(|| c[c.len() - 2]),
        });
    }
    Ok(rows)
}

/// First `N` at which a convex sweep loses payoff.
pub fn sweep_violation(rows: &[SweepRow]) -> Option<usize> {
    rows.windows(2)
        .find(|w| w[1].route == Route::Convex && w[1].payoff < w[0].payoff - 1e-10 * (1.0 + w[0].payoff.abs()))
        .map(|w| w[1].n)
}

fn problem(spec: &ProblemSpec, ov: &Overrides, which: &str) -> Result<(Problem, SolverOptions)> {
    let inst = Instance::build(spec, ov)?;
    if inst.route != Route::Convex {
        return Err(CliError::validation(which, "comparisons need a convex value"));
    }
    Ok((Problem { f: inst.f, u: inst.u }, inst.opts))
}

pub fn compare(
    base: &ProblemSpec,
    shifted: &ProblemSpec,
    kind: ComparisonKind,
    ov: &Overrides,
) -> Result<ComparisonReport> {
    if base.n != shifted.n {
        return Err(CliError::validation("n", format!("base has N = {}, shifted has N = {}", base.n, shifted.n)));
    }
    if base.domain != shifted.domain {
        return Err(CliError::validation("domain", "specs must share a domain"));
    }
    let (b, opts) = problem(base, ov, "base")?;
    let (s, _) = problem(shifted, ov, "shifted")?;
    Ok(match kind {
        ComparisonKind::LikelihoodRatio => compare_likelihood_ratio(&b, &s, &opts)?,
        ComparisonKind::UniformVariability => compare_uniform_variability(&b, &s, &opts)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDoc {
    pub grid: usize,
    pub solver: SolutionDoc,
    pub oracle: SolutionDoc,
    /// Oracle payoff minus solver payoff.
    pub gap: f64,
    /// Largest cutoff difference when the structures match, external scale.
    pub cutoff_gap: Option<f64>,
}

pub fn oracle(spec: &ProblemSpec, ov: &Overrides, grid: Option<usize>) -> Result<OracleDoc> {
    let inst = Instance::build(spec, ov)?;
    let grid = grid.unwrap_or_else(|| default_grid(spec.n));
    if grid < 2 {
        return Err(CliError::validation("grid", "needs at least 2 points"));
    }
    let solver = inst.solve()?;
    let oracle = match inst.route {
        Route::Convex | Route::Pooling | Route::Sshaped => {
            inst.interval_doc(&oracle_interval(&inst.f, &inst.u, spec.n, grid), None)
        }
        Route::General => inst.bipooling_doc(&oracle_bipooling(&inst.f, &inst.u, spec.n, grid)),
        Route::CheapTalk | Route::Pricing => {
            return Err(CliError::validation("mode", "the oracle covers persuasion problems only"))
        }
    };
    let cutoff_gap = (solver.structure == oracle.structure)
        .then(|| solver.cutoffs.iter().zip(&oracle.cutoffs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
    Ok(OracleDoc { grid, gap: oracle.payoff - solver.payoff, solver, oracle, cutoff_gap })
}
