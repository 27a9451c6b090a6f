//! Value functions reconstructed from their curvature and two anchors.

use crate::error::Result;
use crate::funcmodel::{FunctionModel, Kind};

/// `u(t) = u0 + du0·t + ∫_0^t (t − s) u″(s) ds` in unit coordinates.
#[derive(Debug, Clone)]
pub struct ValueFunction {
    u2: FunctionModel,
    u0: f64,
    du0: f64,
}

impl ValueFunction {
    /// Anchored so that `u(0) = u′(0) = 0`.
    pub fn new(u2: FunctionModel) -> Self {
        ValueFunction { u2, u0: 0.0, du0: 0.0 }
    }

    pub fn with_anchors_at_zero(u2: FunctionModel, u0: f64, du0: f64) -> Self {
        ValueFunction { u2, u0, du0 }
    }

    /// Anchored by `u(1)` and `u′(1)`.
    pub fn with_anchors_at_one(u2: FunctionModel, u1: f64, du1: f64) -> Self {
        let c0 = u2.total();
        let c1 = u2.first_moment(1.0);
        let du0 = du1 - c0;
        let u0 = u1 - du0 - (c0 - c1);
        ValueFunction { u2, u0, du0 }
    }

    /// `u(x) = x²` on `[0, 1]`.
    pub fn quadratic() -> Self {
        Self::new(FunctionModel::constant(2.0))
    }

    pub fn curvature(&self) -> &FunctionModel {
        &self.u2
    }

    pub fn value(&self, t: f64) -> f64 {
        self.u0 + self.du0 * t + t * self.u2.cdf(t) - self.u2.first_moment(t)
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.du0 + self.u2.cdf(t)
    }

    pub fn second(&self, t: f64) -> f64 {
        self.u2.value(t)
    }

    pub fn anchors_at_one(&self) -> (f64, f64) {
        (self.value(1.0), self.slope(1.0))
    }

    /// `t ↦ u(1 − t)`.
    pub fn reflected(&self) -> Self {
        let (u1, du1) = self.anchors_at_one();
        ValueFunction { u2: self.u2.reflected(), u0: u1, du0: -du1 }
    }
}

/// Parameters of the fuel-efficiency rating application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub theta_low: f64,
    pub price: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyAgent {
    Household,
    Government,
}

impl EnergyParams {
    /// Optimal usage `a(x) = −log(p x)`.
    pub fn usage(&self, x: f64) -> f64 {
        -(self.price * x).ln()
    }

    /// Indirect utility on the external scale.
    pub fn utility(&self, agent: EnergyAgent, x: f64) -> f64 {
        let p = self.price;
        let a = self.usage(x);
        let u = 1.0 - (-a).exp() - p * a * x;
        match agent {
            EnergyAgent::Household => u,
            EnergyAgent::Government => u - self.lambda1 * a * x - self.lambda2 * a,
        }
    }

    pub fn marginal(&self, agent: EnergyAgent, x: f64) -> f64 {
        let p = self.price;
        let l = (p * x).ln();
        match agent {
            EnergyAgent::Household => p * l,
            EnergyAgent::Government => p * l + self.lambda1 * (l + 1.0) + self.lambda2 / x,
        }
    }

    pub fn curvature(&self, agent: EnergyAgent, x: f64) -> f64 {
        let p = self.price;
        match agent {
            EnergyAgent::Household => p / x,
            EnergyAgent::Government => ((p + self.lambda1) * x - self.lambda2) / (x * x),
        }
    }

    /// Value function on `[θ̲, 1]` mapped to unit coordinates.
    pub fn value_function(&self, agent: EnergyAgent) -> Result<ValueFunction> {
        let e = *self;
        let lo = self.theta_low;
        let u2 = FunctionModel::curvature(Kind::custom("energy", move |x| e.curvature(agent, x)), (lo, 1.0))?;
        let width = 1.0 - lo;
        Ok(ValueFunction::with_anchors_at_zero(u2, self.utility(agent, lo), self.marginal(agent, lo) * width))
    }
}
