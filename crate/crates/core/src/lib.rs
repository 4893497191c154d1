//! Pure-ε differentially private, robust, high-dimensional mean estimation.
//!
//! The estimator runs in two phases. A coarse phase privately localizes
//! the mean from a prior ball of radius `R` down to `O(√d)`, either
//! coordinate-by-coordinate with a lazily materialized exponential
//! mechanism over a grid, or directly in `R^d` by sampling from a
//! log-concave density whose exponent is the value of a degree-4 moment
//! relaxation. A fine phase then runs bucketed median-of-means gradient
//! descent: each round privately tests whether to halt, privately binary
//! searches the distance to the mean, and privately selects a descent
//! direction by sampling with an SDP-valued score.
//!
//! Modules:
//!
//! * [`sdp`] — the three pseudoexpectation programs and the dense
//!   interior-point solver behind them;
//! * [`mech`] — Laplace/exponential mechanisms, private binary search,
//!   and the log-concave sampler over a convex body;
//! * [`coarse`], [`fine`] — the two estimation phases;
//! * [`harness`] — synthetic data, corruption adversaries, brute-force
//!   oracles, empirical privacy audits, and the experiment runner;
//! * [`verify`] — the property suites behind `dpsos verify`.

pub mod budget;
pub mod coarse;
pub mod data;
pub mod error;
pub mod fine;
pub mod harness;
pub mod mech;
pub mod report;
pub mod rng;
pub mod sdp;
pub mod verify;

pub use budget::{LedgerEntry, PrivacyBudget};
pub use data::Dataset;
pub use error::{Error, Result};
pub use report::EstimationReport;
pub use rng::RngSeed;
