//! Numerical equilibrium laboratory for a game between a potential
//! offender, the witnesses of his offenses, and a judge.
//!
//! A judge may convict on the probability that *some* offense occurred
//! (aggregate rule) or on the probability of a *specific* offense (distinct
//! rule). The crate solves the equilibria of both regimes, checks them
//! against exact enumeration and Monte Carlo simulation, and sweeps
//! comparative statics.

pub mod cli;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod game_model;
pub mod sweeps;
pub mod verification;

pub use error::{LabError, Result};
