//! Randomized local search and the (1+1) EA on linear pseudo-Boolean
//! functions under a uniform cardinality constraint `x_1 + ... + x_n >= B`.
//!
//! Besides the two heuristics the crate carries the machinery used to reason
//! about their runtime:
//!
//! - [`instances`]: problem instances, penalty fitness and named families.
//! - [`heuristics`]: RLS, the (1+1) EA and single-trial execution.
//! - [`potential`]: the capped adaptive potential function and drift estimators.
//! - [`bounds`]: variable and multiplicative drift evaluators.
//! - [`oracle`]: exact expected optimisation times via absorbing Markov chains.
//! - [`harness`]: deterministic parallel sweeps, summaries and scaling fits.
//! - [`check`]: randomized invariant suite.
//!
//! Real-valued code is generic over [`Real`] (implemented for `f32` and
//! `f64`); the aliases at the crate root fix the scalar to `f64`.

pub mod bounds;
pub mod check;
pub mod harness;
pub mod heuristics;
pub mod instances;
pub mod num;
pub mod oracle;
pub mod potential;
pub mod rng;

pub use heuristics::{run_trial, Algorithm, TrialResult};
pub use instances::{BitString, FitnessValue, Instance, InstanceError};
pub use num::Real;
pub use potential::Variant;

/// Potential profile over `f64`.
pub type Profile = potential::PotentialProfile<f64>;
/// Drift estimate over `f64`.
pub type DriftEstimate = potential::DriftEstimate<f64>;
/// Drift function specification over `f64`.
pub type DriftFunction = bounds::DriftFunction<f64>;
/// Hitting-time report over `f64`.
pub type HittingTimeReport = oracle::HittingTimeReport<f64>;
/// Scaling-law fit over `f64`.
pub type ScalingFit = harness::ScalingFit<f64>;
