//! Projective qubit models.
//!
//! [`QubitModel`] is a precessing spin-1/2: it is prepared at `t = 0` and
//! measured at `t_k = k tau` for `k = 1..n`, rotating by `omega tau` about
//! the x axis before every slot whether or not the slot is measured.
//! Measurements are projective along a direction in the x-z plane and
//! update the state with the Lüders rule. Outcome 1 is the `+1` eigenvalue,
//! outcome 2 the `-1` eigenvalue.
//!
//! [`SpatialQubitPair`] measures two qubits of a shared pure state, one per
//! party.

use nalgebra::{Matrix2, Matrix4, Vector4};

use super::{C64, PHYSICS_TOL};
use crate::constraints::{build_aot, build_ns, build_nsit};
use crate::scenario::{ProbVector, Scenario};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// `+1` eigenstate of the default (z) observable.
    Eigenstate,
    MaximallyMixed,
}

impl InitialState {
    pub fn name(&self) -> &'static str {
        match self {
            InitialState::Eigenstate => "eigenstate",
            InitialState::MaximallyMixed => "mixed",
        }
    }

    pub fn density(&self) -> Matrix2<C64> {
        match self {
            InitialState::Eigenstate => Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.0)),
            InitialState::MaximallyMixed => Matrix2::identity() * c(0.5),
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

fn pauli_z() -> Matrix2<C64> {
    Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

/// Projector onto outcome `q` of `cos(phi) Z + sin(phi) X`.
pub fn projector(phi: f64, q: usize) -> Matrix2<C64> {
    let sign = if q == 1 { 1.0 } else { -1.0 };
    (Matrix2::identity() + (pauli_z() * c(phi.cos()) + pauli_x() * c(phi.sin())) * c(sign)) * c(0.5)
}

/// `exp(-i theta X / 2)`
fn rotation(theta: f64) -> Matrix2<C64> {
    let (s, co) = (theta / 2.0).sin_cos();
    Matrix2::identity() * c(co) - pauli_x() * C64::new(0.0, s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitModel {
    initial: Matrix2<C64>,
    omega_tau: f64,
    /// Measurement direction per setting, as an angle from z towards x.
    angles: Vec<f64>,
}

impl QubitModel {
    pub fn new(initial: Matrix2<C64>, omega_tau: f64, angles: Vec<f64>) -> Result<Self> {
        let herm = (initial - initial.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tr = initial.trace();
        let det = initial.determinant();
        // a Hermitian 2x2 matrix with unit trace is PSD iff det >= 0
        if herm > 1e-12 || (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 || det.re < -1e-12 {
            return Err(Error::Config("initial state is not a density matrix".into()));
        }
        if angles.is_empty() {
            return Err(Error::Config("qubit model needs at least one measurement direction".into()));
        }
        if !omega_tau.is_finite() {
            return Err(Error::Config("omega_tau must be finite".into()));
        }
        Ok(QubitModel { initial, omega_tau, angles })
    }

    /// Single z measurement, given preparation.
    pub fn with_state(state: InitialState, omega_tau: f64) -> Self {
        Self::new(state.density(), omega_tau, vec![0.0]).expect("valid preset")
    }

    pub fn omega_tau(&self) -> f64 {
        self.omega_tau
    }

    /// Probability vector for a scenario with `delta = 2` and `m` equal to the
    /// number of measurement directions. Skipped slots only evolve.
    pub fn distribution(&self, scenario: Scenario) -> Result<ProbVector<f64>> {
        if scenario.delta() != 2 || scenario.m() != self.angles.len() {
            return Err(Error::ScenarioMismatch {
                expected: format!("(n, m={}, delta=2)", self.angles.len()),
                actual: scenario.to_string(),
            });
        }
        let u = rotation(self.omega_tau);
        let mut values = vec![0.0; scenario.coordinate_count()];
        for s in scenario.enumerate_settings() {
            // branches: (outcome prefix, unnormalized state)
            let mut branches = vec![(Vec::<usize>::new(), self.initial)];
            for &si in &s.0 {
                branches = branches
                    .into_iter()
                    .flat_map(|(prefix, rho)| {
                        let rho = u * rho * u.adjoint();
                        let outs: Vec<usize> = if si == 0 { vec![0] } else { vec![1, 2] };
                        outs.into_iter().map(move |q| {
                            let mut next = prefix.clone();
                            next.push(q);
                            if q == 0 {
                                (next, rho)
                            } else {
                                let p = projector(self.angles[si - 1], q);
                                (next, p * rho * p)
                            }
                        })
                    })
                    .collect();
            }
            for (q, rho) in branches {
                let idx = scenario.flat_index(&s, &crate::scenario::OutcomeVector(q))?;
                values[idx] = rho.trace().re;
            }
        }
        ProbVector::new(scenario, values)
    }
}

/// Two qubits in a shared pure state, party 1 on the first tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialQubitPair {
    state: Vector4<C64>,
    angles: [Vec<f64>; 2],
}

impl SpatialQubitPair {
    pub fn new(state: Vector4<C64>, alice: Vec<f64>, bob: Vec<f64>) -> Result<Self> {
        if (state.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("two-qubit state must be normalized".into()));
        }
        if alice.len() != bob.len() || alice.is_empty() {
            return Err(Error::Config("both parties need the same nonzero number of settings".into()));
        }
        Ok(SpatialQubitPair { state, angles: [alice, bob] })
    }

    /// `(|01> - |10>) / sqrt 2`
    pub fn singlet(alice: Vec<f64>, bob: Vec<f64>) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::new(Vector4::new(c(0.0), c(h), c(-h), c(0.0)), alice, bob)
    }

    /// Probability vector for `(n=2, m, delta=2)`; a skipped party applies
    /// the identity.
    pub fn distribution(&self, scenario: Scenario) -> Result<ProbVector<f64>> {
        if scenario.n() != 2 || scenario.delta() != 2 || scenario.m() != self.angles[0].len() {
            return Err(Error::ScenarioMismatch {
                expected: format!("(n=2, m={}, delta=2)", self.angles[0].len()),
                actual: scenario.to_string(),
            });
        }
        let local = |party: usize, s: usize, q: usize| {
            if s == 0 {
                Matrix2::identity()
            } else {
                projector(self.angles[party][s - 1], q)
            }
        };
        let mut values = vec![0.0; scenario.coordinate_count()];
        for (idx, value) in values.iter_mut().enumerate() {
            let (s, q) = scenario.unflatten(idx);
            let op: Matrix4<C64> = local(0, s.0[0], q.0[0]).kronecker(&local(1, s.0[1], q.0[1]));
            *value = (self.state.adjoint() * op * self.state)[(0, 0)].re;
        }
        ProbVector::new(scenario, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceReport {
    pub aot_max_residual: f64,
    pub nsit_labels: Vec<String>,
    pub nsit_residuals: Vec<f64>,
    pub nsit_max: f64,
    /// Max over NSIT rows comparing exactly two performed measurements.
    pub pairwise_nsit_max: f64,
    /// Max over NSIT rows with three or more performed measurements.
    pub deeper_nsit_max: Option<f64>,
    /// Pairwise NSIT rows all vanish; only deeper rows can witness the
    /// disturbance (needs `n >= 3`).
    pub pairwise_blind: bool,
}

/// Simulates `model` on `scenario`; fails if any arrow-of-time row is off by
/// more than [`PHYSICS_TOL`]. NSIT residuals are reported, not enforced.
pub fn qm_compliance_check(model: &QubitModel, scenario: Scenario) -> Result<ComplianceReport> {
    let p = model.distribution(scenario)?;
    let aot = build_aot(scenario);
    let aot_max_residual = aot.max_residual(&p);
    if aot_max_residual > PHYSICS_TOL {
        return Err(Error::Construction(format!("qubit model violates AoT by {aot_max_residual:e}")));
    }
    let nsit = build_nsit(scenario);
    let nsit_residuals = nsit.residuals(&p);
    let mut pairwise = 0.0f64;
    let mut deeper: Option<f64> = None;
    for (row, &res) in nsit.rows.iter().zip(&nsit_residuals) {
        let performed = row.provenance.as_ref().map_or(0, |m| m.settings.performed());
        if performed == 2 {
            pairwise = pairwise.max(res);
        } else {
            deeper = Some(deeper.unwrap_or(0.0).max(res));
        }
    }
    Ok(ComplianceReport {
        aot_max_residual,
        nsit_labels: nsit.rows.iter().map(|r| r.label.clone()).collect(),
        nsit_max: nsit_residuals.iter().copied().fold(0.0, f64::max),
        nsit_residuals,
        pairwise_nsit_max: pairwise,
        deeper_nsit_max: deeper,
        pairwise_blind: pairwise < PHYSICS_TOL,
    })
}

/// Max NS residual of a spatial model, for the no-signaling half of the
/// compliance checks.
pub fn ns_residual(p: &ProbVector<f64>) -> f64 {
    build_ns(p.scenario()).max_residual(p)
}
