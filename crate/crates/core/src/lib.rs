//! Multi-task low-rank linear bandit simulation.
//!
//! `T` concurrent linear bandit tasks in dimension `d` share an unknown
//! `r`-dimensional subspace: the reward matrix factors as Θ* = B*W*.
//! The algorithm explores uniformly for N₁ rounds, estimates the shared
//! basis B̂ by truncated spectral initialization of a moment matrix, and
//! then runs optimistic (UCB) selection per task with confidence radii
//! built around the projected r-dimensional ridge estimator. The harness
//! benchmarks it against independently run per-task OFUL and a uniform
//! random policy, and emits regret curves as CSV/JSON/SVG.
//!
//! Module map:
//! - [`mat`]: dense linear-algebra kernel (Cholesky, Jacobi eigen,
//!   Sherman-Morrison, subspace distance).
//! - [`rng`]: counter-based deterministic random streams.
//! - [`env`]: ground-truth instances, action sets, rewards, oracle stats.
//! - [`spectral`]: truncated spectral initialization of B̂.
//! - [`agents`]: confidence radii, optimistic selection, online state.
//! - [`harness`]: configuration, seeded trials, aggregation, reports.
//! - [`validate`]: self-contained invariant suite for the CLI.

pub mod agents;
pub mod env;
pub mod error;
pub mod fixture;
pub mod harness;
pub mod mat;
pub mod rng;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
