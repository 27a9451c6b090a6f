use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("expression is not finite at x = {x}")]
    NonFinite { x: f64 },

    #[error("interval [{a}, {b}] is outside the domain or reversed")]
    Domain { a: f64, b: f64 },

    #[error("interval ({a}, {b}) carries no probability mass")]
    ZeroMass { a: f64, b: f64 },

    #[error("barycenter of ({a}, {b}) is undefined: signed weight {weight:e}")]
    DegenerateBarycenter { a: f64, b: f64, weight: f64 },

    #[error("mean-preserving contraction violated at x = {x} by {excess:e}")]
    MpcViolation { x: f64, excess: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid options: {0}")]
    InvalidOptions(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("intervals {k} and {next} collapsed")]
    CollapsedInterval { k: usize, next: usize },

    #[error("cutoffs leave the unit interval; {n} intervals are not supportable")]
    Unsupportable { n: usize },

    #[error("curvature is {0}, not S-shaped")]
    NotSShaped(&'static str),

    #[error("no feasible candidate structure ({0} tried)")]
    NoFeasibleCandidate(usize),

    #[error("virtual valuation is not increasing near type {theta}")]
    NonMonotoneVirtualValue { theta: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),
}
