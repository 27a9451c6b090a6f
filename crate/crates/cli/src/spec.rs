//! JSON problem specifications.

use std::path::Path;

use coarse_core::expr::parse_expression;
use coarse_core::pricing::{Cost, PricingInstance, Valuation};
use coarse_core::solver::Seeding;
use coarse_core::value::{EnergyAgent, EnergyParams};
use coarse_core::{FunctionModel, Kind, SolverOptions, ValueFunction};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub version: u32,
    #[serde(default = "unit_domain")]
    pub domain: [f64; 2],
    #[serde(default)]
    pub density: FunctionSpec,
    #[serde(default)]
    pub curvature: CurvatureSpec,
    pub n: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub mode: ModeSpec,
}

fn unit_domain() -> [f64; 2] {
    [0.0, 1.0]
}

/// A density or curvature given by kind and parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    #[default]
    Uniform,
    Constant {
        value: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    Expression {
        expr: String,
    },
}

/// The receiver-side value, either as a curvature `u″` or a built-in model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurvatureSpec {
    /// `u(x) = x²`.
    #[default]
    Quadratic,
    /// Expected surplus with a cost shock of density `h` on `support`:
    /// `u″(x) = h(x − price)`.
    Purchase {
        h: FunctionSpec,
        support: [f64; 2],
        price: f64,
    },
    /// Fuel-efficiency rating; the domain must be `[theta_low, 1]`.
    Energy {
        theta_low: f64,
        price: f64,
        lambda1: f64,
        lambda2: f64,
        #[serde(default)]
        agent: Agent,
    },
    Constant {
        value: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Tabulated {
        xs: Vec<f64>,
        ys: Vec<f64>,
    },
    Expression {
        expr: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agent {
    #[default]
    Government,
    Household,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeedFrom {
    Zero,
    One,
    Both,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_from: Option<SeedFrom>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModeSpec {
    #[default]
    Auto,
    Convex,
    Sshaped,
    General,
    CheapTalk {
        kappa1: f64,
    },
    Pricing {
        valuation: ValuationSpec,
        cost: CostSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValuationSpec {
    Power { beta: f64 },
    Expression { expr: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostSpec {
    Linear { gamma: f64 },
    Expression { expr: String },
}

/// Command-line settings that take precedence over the spec.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed_from: Option<SeedFrom>,
}

impl FunctionSpec {
    pub fn to_kind(&self) -> coarse_core::Result<Kind> {
        Ok(match self {
            FunctionSpec::Uniform => Kind::Uniform,
            FunctionSpec::Constant { value } => Kind::Constant(*value),
            FunctionSpec::Beta { alpha, beta } => Kind::Beta { alpha: *alpha, beta: *beta },
            FunctionSpec::TruncatedNormal { mean, sd } => Kind::TruncatedNormal { mean: *mean, sd: *sd },
            FunctionSpec::PiecewiseConstant { breakpoints, values } => {
                Kind::PiecewiseConstant { breakpoints: breakpoints.clone(), values: values.clone() }
            }
            FunctionSpec::Tabulated { xs, ys } => Kind::Tabulated { xs: xs.clone(), ys: ys.clone() },
            FunctionSpec::Expression { expr } => Kind::expression(expr)?,
        })
    }
}

impl CurvatureSpec {
    /// The plain function form, for the kinds that are not built-in models.
    fn as_function(&self) -> Option<FunctionSpec> {
        Some(match self.clone() {
            CurvatureSpec::Constant { value } => FunctionSpec::Constant { value },
            CurvatureSpec::Beta { alpha, beta } => FunctionSpec::Beta { alpha, beta },
            CurvatureSpec::TruncatedNormal { mean, sd } => FunctionSpec::TruncatedNormal { mean, sd },
            CurvatureSpec::PiecewiseConstant { breakpoints, values } => {
                FunctionSpec::PiecewiseConstant { breakpoints, values }
            }
            CurvatureSpec::Tabulated { xs, ys } => FunctionSpec::Tabulated { xs, ys },
            CurvatureSpec::Expression { expr } => FunctionSpec::Expression { expr },
            _ => return None,
        })
    }
}

fn invalid(path: &str) -> impl Fn(coarse_core::Error) -> CliError + '_ {
    move |e| CliError::validation(path, e)
}

/// Reads a spec, or the spec embedded in a previously written solution.
pub fn load_spec(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    parse_spec(&text)
}

pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::validation("spec", format!("not valid JSON: {e}")))?;
    if let Some(inner) = value.get_mut("spec") {
        value = inner.take();
    }
    let spec: ProblemSpec = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::validation(if path == "." { "spec".to_string() } else { path }, e.into_inner())
    })?;
    spec.validate()?;
    Ok(spec)
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.version != SPEC_VERSION {
            return Err(CliError::validation("version", format!("unsupported version {}", self.version)));
        }
        let [lo, hi] = self.domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::validation("domain", "needs finite lo < hi"));
        }
        if self.n == 0 {
            return Err(CliError::validation("n", "must be at least 1"));
        }
        if let Some(t) = self.solver.tol {
            if !(t > 0.0) {
                return Err(CliError::validation("solver.tol", "must be positive"));
            }
        }
        if let Some(t) = self.solver.step_tol {
            if !(t > 0.0) {
                return Err(CliError::validation("solver.step_tol", "must be positive"));
            }
        }
        if self.solver.max_iter == Some(0) {
            return Err(CliError::validation("solver.max_iter", "must be positive"));
        }
        match &self.curvature {
            CurvatureSpec::Energy { theta_low, price, .. } => {
                if !(*theta_low > 0.0 && *theta_low < 1.0) {
                    return Err(CliError::validation("curvature.theta_low", "must lie in (0, 1)"));
                }
                if !(*price > 0.0) {
                    return Err(CliError::validation("curvature.price", "must be positive"));
                }
                if self.domain != [*theta_low, 1.0] {
                    return Err(CliError::validation("domain", "energy model needs domain [theta_low, 1]"));
                }
            }
            CurvatureSpec::Purchase { support: [a, b], .. } if !(a.is_finite() && b.is_finite() && a < b) => {
                return Err(CliError::validation("curvature.support", "needs finite lo < hi"));
            }
            _ => {}
        }
        match &self.mode {
            ModeSpec::CheapTalk { kappa1 } if !(*kappa1 >= 1.0 && kappa1.is_finite()) => {
                Err(CliError::validation("mode.kappa1", "must be at least 1"))
            }
            ModeSpec::Pricing { .. } if self.domain != [0.0, 1.0] => {
                Err(CliError::validation("domain", "pricing types live on [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.domain[0], self.domain[1])
    }

    pub fn density_model(&self) -> Result<FunctionModel> {
        let kind = self.density.to_kind().map_err(invalid("density"))?;
        FunctionModel::density(kind, self.domain()).map_err(invalid("density"))
    }

    pub fn value_function(&self) -> Result<ValueFunction> {
        let domain = self.domain();
        match &self.curvature {
            CurvatureSpec::Quadratic => {
                let u2 = FunctionModel::curvature(Kind::Constant(2.0), domain).map_err(invalid("curvature"))?;
                let (lo, hi) = domain;
                Ok(ValueFunction::with_anchors_at_zero(u2, lo * lo, 2.0 * lo * (hi - lo)))
            }
            CurvatureSpec::Purchase { h, support, price } => purchase_value(h, *support, *price, domain),
            CurvatureSpec::Energy { theta_low, price, lambda1, lambda2, agent } => {
                let params =
                    EnergyParams { theta_low: *theta_low, price: *price, lambda1: *lambda1, lambda2: *lambda2 };
                let agent = match agent {
                    Agent::Government => EnergyAgent::Government,
                    Agent::Household => EnergyAgent::Household,
                };
                params.value_function(agent).map_err(invalid("curvature"))
            }
            other => {
                let f = other.as_function().expect("function kinds");
                let kind = f.to_kind().map_err(invalid("curvature"))?;
                let u2 = FunctionModel::curvature(kind, domain).map_err(invalid("curvature"))?;
                Ok(ValueFunction::new(u2))
            }
        }
    }

    pub fn options(&self, ov: &Overrides) -> Result<(SolverOptions, SeedFrom)> {
        let mut opts = SolverOptions::with_n(self.n);
        if let Some(m) = ov.max_iter.or(self.solver.max_iter) {
            opts.max_iter = m;
        }
        if let Some(t) = ov.tol.or(self.solver.tol) {
            opts.tol = t;
        }
        if let Some(t) = self.solver.step_tol {
            opts.step_tol = t;
        }
        opts.validate().map_err(invalid("solver"))?;
        let seed = ov.seed_from.or(self.solver.seed_from).unwrap_or(SeedFrom::Both);
        if seed == SeedFrom::One {
            opts.seeding = Seeding::NearOne;
        }
        Ok((opts, seed))
    }

    pub fn pricing_instance(&self) -> Result<Option<PricingInstance>> {
        let ModeSpec::Pricing { valuation, cost } = &self.mode else {
            return Ok(None);
        };
        let valuation = match valuation {
            ValuationSpec::Power { beta } => {
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(CliError::validation("mode.valuation.beta", "must lie in (0, 1)"));
                }
                Valuation::Power { beta: *beta }
            }
            ValuationSpec::Expression { expr } => {
                Valuation::Expression(parse_expression(expr).map_err(invalid("mode.valuation.expr"))?)
            }
        };
        let cost = match cost {
            CostSpec::Linear { gamma } => {
                if !(*gamma > 0.0) {
                    return Err(CliError::validation("mode.cost.gamma", "must be positive"));
                }
                Cost::Linear { gamma: *gamma }
            }
            CostSpec::Expression { expr } => {
                Cost::Expression(parse_expression(expr).map_err(invalid("mode.cost.expr"))?)
            }
        };
        let inst = PricingInstance { types: self.density_model()?, valuation, cost, n: self.n };
        inst.validate().map_err(invalid("mode"))?;
        Ok(Some(inst))
    }
}

/// `u(x) = ∫ (x − p − η)⁺ h(η) dη`, so `u″(x) = h(x − p)`.
fn purchase_value(h: &FunctionSpec, support: [f64; 2], price: f64, domain: (f64, f64)) -> Result<ValueFunction> {
    let kind = h.to_kind().map_err(invalid("curvature.h"))?;
    let hm = FunctionModel::density(kind, (support[0], support[1])).map_err(invalid("curvature.h"))?;
    let (lo, hi) = domain;
    let (a, b) = (support[0] + price, support[1] + price);
    let breakpoints = [a, b].into_iter().filter(|x| *x > lo && *x < hi).collect();
    let w = support[1] - support[0];
    let shock = hm.clone();
    let func = move |x: f64| {
        let t = shock.to_unit(x - price);
        if (0.0..=1.0).contains(&t) {
            shock.value(t) / w
        } else {
            0.0
        }
    };
    let kind = Kind::Custom { label: "purchase".into(), func: std::sync::Arc::new(func), breakpoints };
    let u2 = FunctionModel::curvature(kind, domain).map_err(invalid("curvature"))?;
    // Anchors at the left end: u′(lo) = H(lo − p), u(lo) = (lo − p) H − ∫ η h.
    let t = hm.to_unit(lo - price).clamp(0.0, 1.0);
    let mass = hm.cdf(t);
    let mean_part = support[0] * mass + w * hm.first_moment(t);
    let u0 = (lo - price) * mass - mean_part;
    Ok(ValueFunction::with_anchors_at_zero(u2, u0, mass * (hi - lo)))
}
