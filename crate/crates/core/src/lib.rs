//! Equilibrium asset pricing on a lognormal endowment ("Lucas tree")
//! economy with recursive utility that separates risk aversion from
//! intertemporal substitution.
//!
//! The crate computes the equilibrium price-dividend ratio, risk-free rate
//! and equity premium in closed form ([`pricing`]), the comparative statics
//! of risk aversion ([`statics`]), price paths under deterministic
//! time-varying risk aversion ([`dynamics`]), and verifies every closed form
//! against Monte Carlo Euler-equation residuals ([`sim`]). Scenario files
//! and the command-line front end live in [`scenario`] and [`cli`].

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod pricing;
pub mod scenario;
pub mod sim;
pub mod statics;
pub mod types;

pub use error::{Error, Result};
pub use types::{GrowthProcess, Preferences};
