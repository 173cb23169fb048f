//! Quantum realizations of temporal and spatial correlation scenarios.
//!
//! [`kraus`] builds, from any arrow-of-time consistent distribution, a
//! sequence of generalized measurements on a `(m delta + 1)^n` dimensional
//! system that reproduces it. [`qubit`] holds projective qubit models used
//! as physical test points, and [`projective`] searches small projective
//! models for a distribution that only generalized measurements reach.

pub mod conditionals;
pub mod kraus;
pub mod projective;
pub mod qubit;
pub mod sampling;

pub use conditionals::{conditionals_from_joint, conditionals_from_joint_with_tol, ConditionalTable};
pub use kraus::{build_kraus, simulate_all, simulate_sequential, KrausSet};
pub use projective::{counterexample_target, projective_counterexample_check, CounterexampleReport, ProjectiveSearchConfig};
pub use qubit::{qm_compliance_check, ComplianceReport, InitialState, QubitModel, SpatialQubitPair};
pub use sampling::random_aot_point;

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;

/// Identities that hold by construction (completeness, skip operators).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Target reproduced by simulate(build_kraus(conditionals(p))).
pub const ROUND_TRIP_TOL: f64 = 1e-9;
/// Physical equalities (AoT, NS) of simulated models; also the total
/// probability of a simulated setting vector.
pub const PHYSICS_TOL: f64 = 1e-10;
