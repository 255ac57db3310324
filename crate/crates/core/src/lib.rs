//! Revealed-preference tests for Bayesian persuasion on stochastic choice data.
//!
//! Given menus, priors and state-contingent choice frequencies of a receiver, the crate
//! decides whether some sender utility makes the observed information structures optimal,
//! and returns an exact certificate either way.

pub mod dataset;
pub mod error;
pub mod examples;
pub mod feasibility;
pub mod forward;
pub mod geometry;
pub mod lp;
pub mod mean;
pub mod numeric;
pub mod persuasion;
pub mod random;
pub mod report;

pub use error::{Error, Result};
pub use numeric::Rational;
