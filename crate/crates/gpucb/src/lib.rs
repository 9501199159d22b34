//! Bayesian optimization with Gaussian-process upper confidence bounds.
//!
//! The library provides exact GP regression on finite candidate sets,
//! deterministic and randomized confidence-parameter schedules (GP-UCB,
//! Gamma-randomized UCB, and the two-parameter-exponential randomization),
//! EI and Thompson-sampling baselines, an experiment harness with regret
//! accounting, and a Monte Carlo suite that verifies the distributional and
//! information-theoretic ingredients the regret guarantees rest on.

pub mod acquisition;
pub mod confidence;
pub mod error;
pub mod gp;
pub mod kernel;
pub mod objective;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
