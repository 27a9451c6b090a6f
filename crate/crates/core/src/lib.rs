//! Optimal coarse information structures.
//!
//! A sender commits to an experiment with at most `N` signals about a state
//! on `[0, 1]`; a receiver acts on the posterior mean. The optimal structure
//! is characterized by a pair of conditional-expectation equations: each
//! signal is the prior mean of its interval, and each cutoff is the
//! curvature-weighted mean of its two neighbouring signals. This crate solves
//! that system for convex, S-shaped and general value functions, handles the
//! finite-menu pricing analogue, and ships a brute-force oracle plus the
//! comparative-statics diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod expr;
pub mod funcmodel;
pub mod oracle;
pub mod pricing;
pub mod quadrature;
pub mod solver;
pub mod structures;
pub mod value;

pub use error::{Error, Result};
pub use funcmodel::{FunctionModel, Kind};
pub use solver::SolverOptions;
pub use structures::{BiPoolingSolution, IntegralDistribution, IntervalSolution, Segment};
pub use value::ValueFunction;
