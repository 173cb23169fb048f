//! Probability polytopes of local-realism and macrorealism tests.
//!
//! A scenario `(n, m, delta)` has `n` parties (or measurement times), `m`
//! settings per measurement and `delta` outcomes per performed measurement.
//! Each measurement may also be skipped, which is encoded as setting `0` with
//! the single outcome `0`. The crate builds the exact linear constraint
//! families over the resulting `(m * delta + 1)^n` probability coordinates,
//! computes polytope dimensions by exact rank, enumerates deterministic
//! vertices, and realizes every arrow-of-time point with a sequence of
//! generalized quantum measurements.
//!
//! Module map:
//! - [`scenario`]: scenarios, setting/outcome tuples, flat indexing.
//! - [`constraints`]: normalization, NS, AoT and NSIT equality systems.
//! - [`linalg`]: exact fraction-free rank and rowspace comparison.
//! - [`geometry`]: dimension reports, deterministic vertices, coverage.
//! - [`quantum`]: Kraus construction, sequential simulation, qubit models.
//! - [`inequalities`]: CHSH and Leggett-Garg witnesses, NSIT scans.

pub mod constraints;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod linalg;
pub mod quantum;
pub mod rational;
pub mod scenario;

pub use error::{Error, Result};
pub use scenario::{OutcomeVector, ProbVector, Scenario, SettingVector};
