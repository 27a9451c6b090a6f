//! Scalar functions on the unit interval: prior densities and curvatures.
//!
//! Every model is defined on an external domain `[lo, hi]` and evaluated on
//! the unit interval through the affine map `t ↦ lo + (hi − lo) t` (or its
//! reflection). A density is rescaled to integrate to one; a curvature is
//! multiplied by `(hi − lo)²` so it is the second derivative in unit
//! coordinates.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{parse_expression, Expr};
use crate::quadrature::{self, gl8, DEFAULT_PANELS};

/// Barycenters with signed weight below this are rejected.
pub const DENOMINATOR_TOL: f64 = 1e-12;

const LOGCONCAVE_GRID: usize = 1024;

pub type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kind {
    Uniform,
    Constant(f64),
    Beta {
        alpha: f64,
        beta: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
    /// `values.len() == breakpoints.len() + 1`; breakpoints are interior.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Expression(Expr),
    /// Piecewise-linear interpolation through `(xs, ys)`.
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    Custom {
        label: String,
        func: Closure,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Uniform => write!(f, "Uniform"),
            Kind::Constant(c) => write!(f, "Constant({c})"),
            Kind::Beta { alpha, beta } => write!(f, "Beta({alpha}, {beta})"),
            Kind::TruncatedNormal { mean, sd } => write!(f, "TruncatedNormal({mean}, {sd})"),
            Kind::PiecewiseConstant { breakpoints, values } => {
                write!(f, "PiecewiseConstant({breakpoints:?}, {values:?})")
            }
            Kind::Expression(e) => write!(f, "Expression({e})"),
            Kind::Tabulated { xs, .. } => write!(f, "Tabulated({} points)", xs.len()),
            Kind::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl Kind {
    pub fn expression(src: &str) -> Result<Kind> {
        Ok(Kind::Expression(parse_expression(src)?))
    }

    pub fn custom(label: &str, func: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Kind {
        Kind::Custom { label: label.to_string(), func: Arc::new(func), breakpoints: Vec::new() }
    }

    fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidModel(m.to_string()));
        match self {
            Kind::Beta { alpha, beta } if !(*alpha >= 1.0 && *beta >= 1.0) => bad("beta parameters must be at least 1"),
            Kind::TruncatedNormal { sd, mean } if !(*sd > 0.0 && mean.is_finite()) => {
                bad("truncated normal needs a positive standard deviation")
            }
            Kind::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad("piecewise constant needs one more value than breakpoints");
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| *b <= lo || *b >= hi) {
                    return bad("breakpoints must be increasing and interior");
                }
                Ok(())
            }
            Kind::Tabulated { xs, ys } => {
                if xs.len() < 2 || xs.len() != ys.len() || xs.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("table needs increasing abscissae and matching ordinates");
                }
                if xs[0] > lo || *xs.last().unwrap() < hi {
                    return bad("table must cover the domain");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Unnormalized value at a point of the external domain.
    fn raw(&self, x: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Kind::Uniform => 1.0,
            Kind::Constant(c) => *c,
            Kind::Beta { alpha, beta } => {
                let z = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
                z.powf(alpha - 1.0) * (1.0 - z).powf(beta - 1.0)
            }
            Kind::TruncatedNormal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp()
            }
            Kind::PiecewiseConstant { breakpoints, values } => {
                let i = breakpoints.partition_point(|b| *b <= x);
                values[i]
            }
            Kind::Expression(e) => e.eval(x).unwrap_or(f64::NAN),
            Kind::Tabulated { xs, ys } => {
                let i = xs.partition_point(|v| *v <= x).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                let w = (x - x0) / (x1 - x0);
                ys[i - 1] + w * (ys[i] - ys[i - 1])
            }
            Kind::Custom { func, .. } => func(x),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Kind::PiecewiseConstant { breakpoints, .. } => breakpoints.clone(),
            Kind::Tabulated { xs, .. } => xs.clone(),
            Kind::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Density,
    Curvature,
}

/// Verdict of the numerical logconcavity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogConcavity {
    pub logconcave: bool,
    /// Largest positive second difference of the log on the grid.
    pub worst_violation: f64,
    pub nonpositive: bool,
}

#[derive(Clone)]
pub struct FunctionModel {
    kind: Kind,
    role: Role,
    lo: f64,
    hi: f64,
    reflect: bool,
    scale: f64,
    edges: Vec<f64>,
    cum0: Vec<f64>,
    cum1: Vec<f64>,
}

impl fmt::Debug for FunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionModel")
            .field("kind", &self.kind)
            .field("role", &self.role)
            .field("domain", &(self.lo, self.hi))
            .field("reflect", &self.reflect)
            .finish()
    }
}

impl FunctionModel {
    pub fn density(kind: Kind, domain: (f64, f64)) -> Result<Self> {
        Self::build(kind, Role::Density, domain, false)
    }

    pub fn curvature(kind: Kind, domain: (f64, f64)) -> Result<Self> {
        Self::build(kind, Role::Curvature, domain, false)
    }

    pub fn uniform() -> Self {
        Self::density(Kind::Uniform, (0.0, 1.0)).expect("uniform density")
    }

    pub fn constant(c: f64) -> Self {
        Self::curvature(Kind::Constant(c), (0.0, 1.0)).expect("constant curvature")
    }

    /// Density on `[0, 1]` given by an expression in `x`.
    pub fn density_expr(src: &str) -> Result<Self> {
        Self::density(Kind::expression(src)?, (0.0, 1.0))
    }

    /// Curvature on `[0, 1]` given by an expression in `x`.
    pub fn curvature_expr(src: &str) -> Result<Self> {
        Self::curvature(Kind::expression(src)?, (0.0, 1.0))
    }

    fn build(kind: Kind, role: Role, (lo, hi): (f64, f64), reflect: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidModel(format!("domain [{lo}, {hi}] is not a proper interval")));
        }
        kind.validate(lo, hi)?;
        let width = hi - lo;
        let to_unit = |x: f64| if reflect { (hi - x) / width } else { (x - lo) / width };
        let breaks: Vec<f64> = kind.breakpoints().into_iter().map(to_unit).collect();
        let edges = quadrature::panel_edges(DEFAULT_PANELS, &breaks);
        let mut fm =
            FunctionModel { kind, role, lo, hi, reflect, scale: 1.0, edges, cum0: Vec::new(), cum1: Vec::new() };
        fm.check_finite()?;
        let raw0 = quadrature::cumulative(&fm.edges, |t| fm.raw_at(t));
        let total = *raw0.last().unwrap();
        fm.scale = match role {
            Role::Density => {
                if !(total > 0.0 && total.is_finite()) {
                    return Err(Error::InvalidModel("density has no positive mass".into()));
                }
                1.0 / total
            }
            Role::Curvature => width * width,
        };
        fm.cum0 = quadrature::cumulative(&fm.edges, |t| fm.value(t));
        fm.cum1 = quadrature::cumulative(&fm.edges, |t| t * fm.value(t));
        Ok(fm)
    }

    fn check_finite(&self) -> Result<()> {
        let n = 2048;
        let grid = (0..=n).map(|i| i as f64 / n as f64);
        let nodes = self.edges.windows(2).flat_map(|w| {
            let (a, b) = (w[0], w[1]);
            (1..8).map(move |j| a + (b - a) * j as f64 / 8.0)
        });
        for t in grid.chain(nodes) {
            let v = self.raw_at(t);
            let interior = t > 0.0 && t < 1.0;
            if !v.is_finite() && (interior || !matches!(self.kind, Kind::Custom { .. })) {
                return Err(Error::InvalidModel(format!(
                    "{:?} is not finite at x = {}",
                    self.kind,
                    self.to_external(t)
                )));
            }
            if self.role == Role::Density && v < 0.0 {
                return Err(Error::InvalidModel(format!("density is negative at x = {}", self.to_external(t))));
            }
        }
        Ok(())
    }

    #[inline]
    fn raw_at(&self, t: f64) -> f64 {
        self.kind.raw(self.to_external(t), self.lo, self.hi)
    }

    /// Same function with the state reflected, `t ↦ 1 − t`.
    pub fn reflected(&self) -> Self {
        let mut fm = Self::build(self.kind.clone(), self.role, (self.lo, self.hi), !self.reflect)
            .expect("reflection of a valid model is valid");
        if self.role == Role::Density {
            fm.scale = self.scale;
        }
        fm
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn is_reflected(&self) -> bool {
        self.reflect
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn to_external(&self, t: f64) -> f64 {
        if self.reflect {
            self.hi - (self.hi - self.lo) * t
        } else {
            self.lo + (self.hi - self.lo) * t
        }
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        if self.reflect {
            (self.hi - x) / (self.hi - self.lo)
        } else {
            (x - self.lo) / (self.hi - self.lo)
        }
    }

    /// Value at unit coordinate `t`.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.raw_at(t) * self.scale
    }

    fn check_interval(a: f64, b: f64) -> Result<()> {
        if !(a >= -1e-14 && b <= 1.0 + 1e-14 && a <= b) {
            return Err(Error::Domain { a, b });
        }
        Ok(())
    }

    /// `∫_a^b` of the model over a unit-coordinate interval.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        Self::check_interval(a, b)?;
        Ok(self.m0(a, b))
    }

    #[inline]
    pub(crate) fn m0(&self, a: f64, b: f64) -> f64 {
        quadrature::integrate_with(&self.edges, &self.cum0, |t| self.value(t), a, b)
    }

    /// `∫_0^t g`, the CDF for a density.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return *self.cum0.last().unwrap();
        }
        let i = quadrature::locate(&self.edges, t);
        self.cum0[i] + gl8(|s| self.value(s), self.edges[i], t)
    }

    /// `∫_0^t s g(s) ds`.
    pub fn first_moment(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return *self.cum1.last().unwrap();
        }
        let i = quadrature::locate(&self.edges, t);
        self.cum1[i] + gl8(|s| s * self.value(s), self.edges[i], t)
    }

    pub fn total(&self) -> f64 {
        *self.cum0.last().unwrap()
    }

    /// `(∫_a^b g, ∫_a^b (t − a) g)`.
    pub fn moments(&self, a: f64, b: f64) -> (f64, f64) {
        if b <= a {
            return (0.0, 0.0);
        }
        let e = &self.edges;
        let ia = quadrature::locate(e, a);
        let ib = quadrature::locate(e, b);
        let g = |t: f64| self.value(t);
        let gc = |t: f64| (t - a) * self.value(t);
        if ia == ib {
            return (gl8(g, a, b), gl8(gc, a, b));
        }
        let mut m0 = gl8(g, a, e[ia + 1]) + (self.cum0[ib] - self.cum0[ia + 1]);
        let mut m1 =
            gl8(gc, a, e[ia + 1]) + (self.cum1[ib] - self.cum1[ia + 1]) - a * (self.cum0[ib] - self.cum0[ia + 1]);
        if b > e[ib] {
            m0 += gl8(g, e[ib], b);
            m1 += gl8(gc, e[ib], b);
        }
        (m0, m1)
    }

    /// Weighted mean of `t` on `(a, b)` without domain checks; `a` when the
    /// interval is degenerate.
    #[inline]
    pub(crate) fn mean_raw(&self, a: f64, b: f64) -> Option<f64> {
        if b <= a {
            return Some(a);
        }
        let (m0, m1) = self.moments(a, b);
        let ok = match self.role {
            Role::Density => m0 > 0.0,
            Role::Curvature => m0.abs() >= DENOMINATOR_TOL,
        };
        ok.then(|| a + m1 / m0)
    }

    /// Conditional mean `E[t | t ∈ (a, b)]` under this density.
    pub fn phi(&self, a: f64, b: f64) -> Result<f64> {
        Self::check_interval(a, b)?;
        if a == b {
            return Ok(a);
        }
        self.mean_raw(a, b).ok_or(Error::ZeroMass { a, b })
    }

    /// Barycenter of `(a, b)` under the (possibly signed) weight `u″`.
    pub fn mu(&self, a: f64, b: f64) -> Result<f64> {
        Self::check_interval(a, b)?;
        if a == b {
            return Ok(a);
        }
        self.mean_raw(a, b).ok_or_else(|| Error::DegenerateBarycenter { a, b, weight: self.m0(a, b) })
    }

    /// Numerical logconcavity via second differences of `log g`.
    pub fn is_logconcave(&self) -> LogConcavity {
        let n = LOGCONCAVE_GRID;
        let vals: Vec<f64> = (0..n).map(|i| self.value((i as f64 + 0.5) / n as f64)).collect();
        if vals.iter().any(|v| !(*v > 0.0)) {
            return LogConcavity { logconcave: false, worst_violation: f64::INFINITY, nonpositive: true };
        }
        let logs: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let worst = logs.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        LogConcavity { logconcave: worst <= 1e-10, worst_violation: worst, nonpositive: false }
    }

    /// Values on `n + 1` equispaced unit points.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|i| self.value(i as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn uniform_mass_is_width() {
        let f = FunctionModel::uniform();
        close(f.integrate(0.2, 0.7).unwrap(), 0.5, 1e-14);
        assert_eq!(f.integrate(0.4, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn linear_and_quadratic_densities_normalize() {
        let f = FunctionModel::density_expr("2*x").unwrap();
        close(f.integrate(0.0, 1.0).unwrap(), 1.0, 1e-12);
        let g = FunctionModel::density_expr("12*(x-0.5)^2").unwrap();
        close(g.integrate(0.0, 1.0).unwrap(), 1.0, 1e-12);
        // the unnormalized form rescales to the same density
        let h = FunctionModel::density_expr("2048*(x-0.5)^2").unwrap();
        for t in [0.0, 0.1, 0.5, 0.9] {
            close(g.value(t), h.value(t), 1e-12);
        }
    }

    #[test]
    fn domain_violations() {
        let f = FunctionModel::uniform();
        assert!(matches!(f.integrate(0.5, 0.2), Err(Error::Domain { .. })));
        assert!(matches!(f.integrate(-0.1, 0.2), Err(Error::Domain { .. })));
        assert!(matches!(f.phi(0.2, 1.3), Err(Error::Domain { .. })));
    }

    #[test]
    fn conditional_means() {
        close(FunctionModel::uniform().phi(0.2, 0.6).unwrap(), 0.4, 1e-14);
        close(FunctionModel::density_expr("2*x").unwrap().phi(0.0, 1.0).unwrap(), 2.0 / 3.0, 1e-13);
        let b = FunctionModel::density(Kind::Beta { alpha: 2.0, beta: 2.0 }, (0.0, 1.0)).unwrap();
        close(b.phi(0.0, 1.0).unwrap(), 0.5, 1e-13);
    }

    #[test]
    fn barycenters() {
        close(FunctionModel::constant(3.0).mu(0.1, 0.5).unwrap(), 0.3, 1e-14);
        close(FunctionModel::curvature_expr("6*x").unwrap().mu(0.0, 1.0).unwrap(), 2.0 / 3.0, 1e-13);
        // signed weight: barycenter leaves the interval
        let s = FunctionModel::curvature_expr("1-2*x").unwrap();
        let m = s.mu(0.2, 0.9).unwrap();
        // ∫(1-2t) = -0.07, ∫t(1-2t) = 0.385 - 2(0.729 - 0.008)/3
        close(m, (0.385 - 2.0 * 0.721 / 3.0) / -0.07, 1e-12);
        assert!(m > 0.9);
        assert!(matches!(s.mu(0.0, 1.0), Err(Error::DegenerateBarycenter { .. })));
    }

    #[test]
    fn purchase_curvature_barycenter_is_midpoint() {
        // u″(x) = h(x − p) with h uniform on a support containing the domain
        let u2 = FunctionModel::curvature(
            Kind::custom("purchase", |x| if (-1.0..=1.0).contains(&(x - 0.3)) { 0.5 } else { 0.0 }),
            (0.0, 1.0),
        )
        .unwrap();
        for (a, b) in [(0.0, 1.0), (0.12, 0.47), (0.6, 0.61)] {
            close(u2.mu(a, b).unwrap(), 0.5 * (a + b), 1e-13);
        }
    }

    #[test]
    fn zero_mass_is_an_error() {
        let f = FunctionModel::density(
            Kind::PiecewiseConstant { breakpoints: vec![0.5], values: vec![0.0, 1.0] },
            (0.0, 1.0),
        )
        .unwrap();
        assert!(matches!(f.phi(0.1, 0.4), Err(Error::ZeroMass { .. })));
        close(f.phi(0.25, 0.75).unwrap(), 0.625, 1e-14);
    }

    #[test]
    fn affine_domain_mapping() {
        let f = FunctionModel::density(Kind::Uniform, (2.0, 6.0)).unwrap();
        close(f.integrate(0.0, 1.0).unwrap(), 1.0, 1e-14);
        close(f.to_external(0.25), 3.0, 1e-15);
        close(f.to_unit(5.0), 0.75, 1e-15);
        // u(x) = x² on [2, 6] has u″ = 2 and unit curvature 2 · 16
        let u2 = FunctionModel::curvature(Kind::Constant(2.0), (2.0, 6.0)).unwrap();
        close(u2.value(0.3), 32.0, 1e-12);
        let tn = FunctionModel::density(Kind::TruncatedNormal { mean: 4.0, sd: 1.0 }, (2.0, 6.0)).unwrap();
        close(tn.phi(0.0, 1.0).unwrap(), 0.5, 1e-13);
    }

    #[test]
    fn reflection() {
        let f = FunctionModel::density_expr("2*x").unwrap();
        let r = f.reflected();
        for t in [0.1, 0.4, 0.9] {
            close(r.value(t), f.value(1.0 - t), 1e-13);
        }
        close(r.phi(0.0, 1.0).unwrap(), 1.0 / 3.0, 1e-13);
        assert!(r.reflected().value(0.2) - f.value(0.2) == 0.0);
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(FunctionModel::density_expr("x-0.5").is_err());
        assert!(FunctionModel::density_expr("0").is_err());
        assert!(FunctionModel::density_expr("log(x - 0.5)").is_err());
        assert!(FunctionModel::density(Kind::Beta { alpha: 0.5, beta: 1.0 }, (0.0, 1.0)).is_err());
        assert!(FunctionModel::density(Kind::Uniform, (1.0, 1.0)).is_err());
        let pc = Kind::PiecewiseConstant { breakpoints: vec![0.6, 0.4], values: vec![1.0, 1.0, 1.0] };
        assert!(FunctionModel::density(pc, (0.0, 1.0)).is_err());
    }

    #[test]
    fn piecewise_constant_is_integrated_exactly() {
        let f = FunctionModel::curvature(
            Kind::PiecewiseConstant { breakpoints: vec![0.35, 0.5], values: vec![-1.0, 10.0, -6.0] },
            (0.0, 1.0),
        )
        .unwrap();
        close(f.integrate(0.3, 0.6).unwrap(), -0.05 + 1.5 - 0.6, 1e-14);
    }

    #[test]
    fn logconcavity_verdicts() {
        assert!(FunctionModel::uniform().is_logconcave().logconcave);
        let tn = FunctionModel::density(Kind::TruncatedNormal { mean: 0.5, sd: 0.2 }, (0.0, 1.0)).unwrap();
        assert!(tn.is_logconcave().logconcave);
        let bi = FunctionModel::density_expr("12*(x-0.5)^2").unwrap();
        assert!(!bi.is_logconcave().logconcave);
        let convex = FunctionModel::density_expr("exp(5*x^2)").unwrap();
        let v = convex.is_logconcave();
        assert!(!v.logconcave && !v.nonpositive && v.worst_violation > 0.0);
    }

    #[test]
    fn additivity() {
        let f = FunctionModel::density(Kind::Beta { alpha: 2.5, beta: 3.5 }, (0.0, 1.0)).unwrap();
        let (a, b, c) = (0.07, 0.4003, 0.93);
        let lhs = f.integrate(a, c).unwrap();
        let rhs = f.integrate(a, b).unwrap() + f.integrate(b, c).unwrap();
        close(lhs, rhs, 2e-10);
        close(f.cdf(b) - f.cdf(a), f.integrate(a, b).unwrap(), 1e-13);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn logconcave_density() -> impl Strategy<Value = FunctionModel> {
            prop_oneof![
                (1.0f64..5.0, 1.0f64..5.0).prop_map(|(a, b)| FunctionModel::density(
                    Kind::Beta { alpha: a, beta: b },
                    (0.0, 1.0)
                )
                .unwrap()),
                (0.0f64..1.0, 0.05f64..0.5).prop_map(|(m, s)| FunctionModel::density(
                    Kind::TruncatedNormal { mean: m, sd: s },
                    (0.0, 1.0)
                )
                .unwrap()),
                (-3.0f64..3.0).prop_map(|c| FunctionModel::density_expr(&format!("exp({c}*x)")).unwrap()),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn phi_is_interior_and_monotone(
                f in logconcave_density(),
                a in 0.0f64..0.9,
                w in 0.01f64..0.5,
                d in 0.001f64..0.05,
            ) {
                let b = (a + w).min(1.0);
                let m = f.phi(a, b).unwrap();
                prop_assert!(a < m && m < b);
                if a + d < b {
                    prop_assert!(f.phi(a + d, b).unwrap() > m);
                }
                if b + d <= 1.0 {
                    prop_assert!(f.phi(a, b + d).unwrap() > m);
                }
            }

            #[test]
            fn shifted_interval_mean_moves_at_most_the_shift(
                f in logconcave_density(),
                a in 0.0f64..0.9,
                w in 0.001f64..0.9,
                e in 0.0f64..0.5,
            ) {
                let b = (a + w).min(1.0);
                prop_assume!(b + e <= 1.0 && a < b);
                prop_assert!(f.phi(a + e, b + e).unwrap() <= f.phi(a, b).unwrap() + e + 1e-9);
            }

            #[test]
            fn additivity_holds(f in logconcave_density(), a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
                let mut v = [a, b, c];
                v.sort_by(f64::total_cmp);
                let whole = f.integrate(v[0], v[2]).unwrap();
                let parts = f.integrate(v[0], v[1]).unwrap() + f.integrate(v[1], v[2]).unwrap();
                prop_assert!((whole - parts).abs() < 2e-10);
            }

            #[test]
            fn cdf_is_nondecreasing(f in logconcave_density(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(f.cdf(a) <= f.cdf(b) + 1e-15);
            }
        }
    }
}
