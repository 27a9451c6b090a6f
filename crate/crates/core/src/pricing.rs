//! Finite-menu nonlinear pricing recast over virtual valuations.
//!
//! Types `θ ∈ [0, 1]` with density `f` become virtual types
//! `φ(θ) = θ − (1 − F(θ)) / f(θ)`. Negative virtual types are excluded up
//! front; the rest are distributed by `H` on `[0, 1]`. The pointwise maximal
//! virtual surplus `π(φ) = max_q φ v(q) − c(q)` plays the role of the value
//! function, and the menu is a dual-expectations solution with the first
//! segment pinned to the exclusion option `x₁ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::funcmodel::{FunctionModel, Kind};
use crate::solver::engine::{CutoffRule, Iteration, SegmentKind, Setup};
use crate::solver::SolverOptions;
use crate::structures::Residuals;
use crate::value::ValueFunction;

const TYPE_GRID: usize = 4096;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum Valuation {
    /// `v(q) = q^β`, `0 < β < 1`.
    Power {
        beta: f64,
    },
    Expression(Expr),
}

#[derive(Debug, Clone)]
pub enum Cost {
    /// `c(q) = γ q`.
    Linear {
        gamma: f64,
    },
    Expression(Expr),
}

impl Valuation {
    pub fn value(&self, q: f64) -> f64 {
        match self {
            Valuation::Power { beta } => q.powf(*beta),
            Valuation::Expression(e) => e.eval(q).unwrap_or(f64::NAN),
        }
    }
}

impl Cost {
    pub fn value(&self, q: f64) -> f64 {
        match self {
            Cost::Linear { gamma } => gamma * q,
            Cost::Expression(e) => e.eval(q).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PricingInstance {
    /// Type density on `[0, 1]`.
    pub types: FunctionModel,
    pub valuation: Valuation,
    pub cost: Cost,
    /// Number of options offered, exclusion not counted.
    pub n: usize,
}

fn central<F: Fn(f64) -> f64>(g: F, x: f64, h: f64) -> f64 {
    let lo = (x - h).max(0.0);
    (g(x + h) - g(lo)) / (x + h - lo)
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > rel * (1.0 + b.abs()) {
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
    0.5 * (a + b)
}

impl PricingInstance {
    pub fn power_linear(types: FunctionModel, beta: f64, gamma: f64, n: usize) -> Self {
        PricingInstance { types, valuation: Valuation::Power { beta }, cost: Cost::Linear { gamma }, n }
    }

    fn closed_form(&self) -> Option<(f64, f64)> {
        match (&self.valuation, &self.cost) {
            (Valuation::Power { beta }, Cost::Linear { gamma }) => Some((*beta, *gamma)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidOptions("the menu needs at least one option".into()));
        }
        if self.types.domain() != (0.0, 1.0) || self.types.is_reflected() {
            return Err(Error::InvalidModel("types must live on [0, 1]".into()));
        }
        if let Some((beta, gamma)) = self.closed_form() {
            if !(beta > 0.0 && beta < 1.0 && gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::InvalidModel("need 0 < β < 1 and γ > 0".into()));
            }
        }
        Ok(())
    }

    /// Allocation maximizing `φ v(q) − c(q)`.
    pub fn q_star(&self, phi: f64) -> f64 {
        if phi <= 0.0 {
            return 0.0;
        }
        if let Some((beta, gamma)) = self.closed_form() {
            return (beta * phi / gamma).powf(1.0 / (1.0 - beta));
        }
        let obj = |q: f64| phi * self.valuation.value(q) - self.cost.value(q);
        let mut hi = 1.0;
        for _ in 0..200 {
            if !(obj(2.0 * hi) > obj(hi)) {
                break;
            }
            hi *= 2.0;
        }
        let q0 = golden_max(obj, 0.0, 2.0 * hi, 1e-12);
        // polish on the first-order condition
        let foc = |q: f64| {
            phi * central(|s| self.valuation.value(s), q, FD_STEP * (1.0 + q))
                - central(|s| self.cost.value(s), q, FD_STEP * (1.0 + q))
        };
        let (mut lo, mut up) = ((q0 * 0.999).max(0.0), q0 * 1.001 + 1e-12);
        if foc(lo) > 0.0 && foc(up) < 0.0 {
            for _ in 0..80 {
                let mid = 0.5 * (lo + up);
                if foc(mid) > 0.0 {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            return 0.5 * (lo + up);
        }
        q0
    }

    /// `π(φ) = max_q φ v(q) − c(q)`.
    pub fn pi(&self, phi: f64) -> f64 {
        if let Some((beta, gamma)) = self.closed_form() {
            if phi <= 0.0 {
                return 0.0;
            }
            let r = 1.0 / (1.0 - beta);
            return (1.0 - beta) * (gamma / beta) * (beta * phi / gamma).powf(r);
        }
        let q = self.q_star(phi);
        phi * self.valuation.value(q) - self.cost.value(q)
    }

    /// `π″(φ)`; from the envelope theorem `π′ = v(q*)`.
    pub fn pi_second(&self, phi: f64) -> f64 {
        if let Some((beta, gamma)) = self.closed_form() {
            let r = 1.0 / (1.0 - beta);
            return r * gamma * (beta / gamma).powf(r) * phi.max(1e-300).powf(r - 2.0);
        }
        let phi = phi.max(1e-9);
        let h = 1e-3 * phi;
        let dv = |p: f64| self.valuation.value(self.q_star(p));
        (dv(phi + h) - dv(phi - h)) / (2.0 * h)
    }

    fn virtual_value(&self, theta: f64) -> f64 {
        let f = &self.types;
        let tail = f.total() - f.cdf(theta);
        if tail <= 0.0 {
            return theta;
        }
        theta - tail / f.value(theta)
    }
}

/// The instance in dual-expectations form.
#[derive(Debug, Clone)]
pub struct Virtualized {
    /// Density of non-negative virtual types, normalized.
    pub h: FunctionModel,
    /// `π` reconstructed from `π″` with `π(0) = π′(0) = 0`.
    pub pi: ValueFunction,
    /// Type with zero virtual value.
    pub theta0: f64,
    /// `1 − F(θ₀)`, the mass with non-negative virtual value.
    pub served_mass: f64,
    theta_grid: Vec<f64>,
    phi_grid: Vec<f64>,
}

impl Virtualized {
    /// Type whose virtual value is `y`.
    pub fn type_of(&self, y: f64, inst: &PricingInstance) -> f64 {
        invert(&self.theta_grid, &self.phi_grid, y, |t| inst.virtual_value(t))
    }
}

fn invert(thetas: &[f64], phis: &[f64], y: f64, phi: impl Fn(f64) -> f64) -> f64 {
    if y <= phis[0] {
        return thetas[0];
    }
    if y >= *phis.last().unwrap() {
        return *thetas.last().unwrap();
    }
    let i = phis.partition_point(|p| *p <= y).saturating_sub(1);
    let (mut lo, mut hi) = (thetas[i], thetas[i + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Builds `H` and `π` for an instance.
pub fn virtualize(inst: &PricingInstance) -> Result<Virtualized> {
    inst.validate()?;
    let phi = |t: f64| inst.virtual_value(t);
    if !(phi(1.0 - 1e-9) > 0.0) {
        return Err(Error::NonMonotoneVirtualValue { theta: 1.0 });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if phi(0.0) >= 0.0 {
        hi = 0.0;
    } else {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let theta0 = hi;
    let thetas: Vec<f64> = (0..=TYPE_GRID).map(|i| theta0 + (1.0 - theta0) * i as f64 / TYPE_GRID as f64).collect();
    let phis: Vec<f64> = thetas.iter().map(|t| phi(*t)).collect();
    for (w, t) in phis.windows(2).zip(&thetas[1..]) {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::NonMonotoneVirtualValue { theta: *t });
        }
    }
    let served_mass = inst.types.total() - inst.types.cdf(theta0);

    let f = inst.types.clone();
    let (tg, pg) = (thetas.clone(), phis.clone());
    let inst_c = inst.clone();
    let density = move |y: f64| {
        let t = invert(&tg, &pg, y, |s| inst_c.virtual_value(s));
        let h = FD_STEP;
        let (a, b) = ((t - h).max(theta0), (t + h).min(1.0));
        let slope = (inst_c.virtual_value(b) - inst_c.virtual_value(a)) / (b - a);
        f.value(t) / slope
    };
    let h = FunctionModel::density(Kind::custom("virtual types", density), (0.0, 1.0))?;

    let inst_c = inst.clone();
    let u2 = FunctionModel::curvature(Kind::custom("virtual surplus", move |y| inst_c.pi_second(y)), (0.0, 1.0))?;
    if !u2.total().is_finite() {
        return Err(Error::Precondition("π″ is not integrable at 0".into()));
    }
    Ok(Virtualized { h, pi: ValueFunction::new(u2), theta0, served_mass, theta_grid: thetas, phi_grid: phis })
}

/// One menu option. Option 1 is exclusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuItem {
    pub k: usize,
    /// Virtual-type cutoffs of the segment served by this option.
    pub lower: f64,
    pub upper: f64,
    /// Mean virtual type of the segment; zero for exclusion.
    pub x: f64,
    pub quality: f64,
    pub price: f64,
    /// Share of all types choosing this option.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MenuSolution {
    /// `0 = s_0 < s_1 < … < s_{N+1} = 1` in virtual types.
    pub cutoffs: Vec<f64>,
    /// Types at the interior cutoffs.
    pub cutoff_types: Vec<f64>,
    pub items: Vec<MenuItem>,
    pub profit: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Type below which every buyer is excluded.
    pub exclusion_type: f64,
}

impl MenuSolution {
    pub fn qualities(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.quality).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.price).collect()
    }

    pub fn signals(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.x).collect()
    }
}

/// Optimal menu with `inst.n` options plus exclusion.
pub fn solve_menu(inst: &PricingInstance, opts: &SolverOptions) -> Result<MenuSolution> {
    let virt = virtualize(inst)?;
    solve_virtualized(inst, &virt, opts)
}

fn solve_virtualized(inst: &PricingInstance, virt: &Virtualized, opts: &SolverOptions) -> Result<MenuSolution> {
    let n = inst.n;
    let opts = SolverOptions { n: n + 1, ..opts.clone() };
    opts.validate()?;
    let mut segments = vec![SegmentKind::Fixed(0.0)];
    segments.extend(std::iter::repeat_n(SegmentKind::Free, n));
    let setup = Setup {
        f: &virt.h,
        rule: CutoffRule::Barycenter(virt.pi.curvature()),
        segments,
        clamp: false,
        ceiling: None,
        relax: 1.0,
    };
    let mut it = Iteration::new(setup, &opts.seed_cutoffs(n + 1));
    let residuals = it.run(opts.max_iter, opts.step_tol, opts.tol)?;
    it.check_collapse()?;
    let cutoffs = it.cutoffs().to_vec();

    let mut items = Vec::with_capacity(n + 1);
    let mut price = 0.0;
    let mut prev_v = 0.0;
    let mut profit = 0.0;
    let mut cutoff_types = Vec::with_capacity(n);
    for k in 0..=n {
        let (a, b) = (cutoffs[k], cutoffs[k + 1]);
        let mass = virt.h.integrate(a, b)? * virt.served_mass;
        let (x, quality) = if k == 0 {
            (0.0, 0.0)
        } else {
            let x = virt.h.phi(a, b)?;
            (x, inst.q_star(x))
        };
        let v = inst.valuation.value(quality);
        if k > 0 {
            // the type at the lower cutoff is indifferent with the option below
            let theta = virt.type_of(a, inst);
            price += theta * (v - prev_v);
        }
        if k < n {
            cutoff_types.push(virt.type_of(b, inst));
        }
        let lower_mass = if k == 0 { inst.types.cdf(virt.theta0) } else { 0.0 };
        profit += mass * inst.pi(x);
        items.push(MenuItem { k: k + 1, lower: a, upper: b, x, quality, price, mass: mass + lower_mass });
        prev_v = v;
    }
    Ok(MenuSolution {
        cutoffs,
        cutoff_types,
        items,
        profit,
        residuals,
        iterations: it.iterations(),
        exclusion_type: virt.type_of(it.cutoffs()[1], inst),
    })
}

/// Effect of raising `β` on the menu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub beta_low: f64,
    pub beta_high: f64,
    pub low: MenuSolution,
    pub high: MenuSolution,
    /// `ŝ_k − s_k` for every interior cutoff.
    pub shifts: Vec<f64>,
    /// `ŝ₁ ≥ s₁ − tol`.
    pub exclusion_grows: bool,
}

pub fn exclusion_comparative_static(
    inst: &PricingInstance,
    beta_low: f64,
    beta_high: f64,
    opts: &SolverOptions,
) -> Result<ExclusionReport> {
    let Cost::Linear { gamma } = inst.cost else {
        return Err(Error::Precondition("exclusion comparison needs linear cost".into()));
    };
    let make = |beta| PricingInstance::power_linear(inst.types.clone(), beta, gamma, inst.n);
    let low = solve_menu(&make(beta_low), opts)?;
    let high = solve_menu(&make(beta_high), opts)?;
    let n = inst.n;
    let shifts: Vec<f64> = (1..=n).map(|k| high.cutoffs[k] - low.cutoffs[k]).collect();
    let exclusion_grows = shifts[0] >= -opts.tol.max(1e-9);
    Ok(ExclusionReport { beta_low, beta_high, low, high, shifts, exclusion_grows })
}
