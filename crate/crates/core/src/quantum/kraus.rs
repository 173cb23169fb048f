//! Kraus operators that steer a `(m delta + 1)^n` level system through the
//! basis state `|q_1..q_i; s_1..s_i>` matching the measurement record.
//!
//! Operator `K(i, s, q)` has two parts:
//! - a transfer part mapping each history state (positions `i..n` skipped)
//!   to the history extended by `(s, q)` at position `i`, with amplitude
//!   `sqrt(r)`;
//! - a diagonal part on the states with some measurement recorded at
//!   position `i` or later, which only completes the operator set.
//!
//! The diagonal weight is `1/sqrt(delta)` except on the states the transfer
//! part of the same setting writes into: there the weight is 0 for the
//! outcome that writes the state and `1/sqrt(delta - 1)` for the others.
//! Without that exception `sum_q K^dagger K` picks up cross terms between
//! the two parts and is not the identity. On reachable states only the
//! transfer part acts, so the generated statistics are unaffected. A
//! skipped measurement (`s = 0`) is the identity.

use nalgebra::{DMatrix, DVector};

use super::{ConditionalTable, C64, PHYSICS_TOL};
use crate::scenario::{OutcomeVector, ProbVector, Scenario, SettingVector};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct KrausSet {
    scenario: Scenario,
    /// `ops[i][s]` holds one operator for `s = 0` and `delta` otherwise.
    ops: Vec<Vec<Vec<DMatrix<C64>>>>,
}

impl KrausSet {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn dimension(&self) -> usize {
        self.scenario.coordinate_count()
    }

    /// Operator for position `i` (zero-based), setting `s`, outcome `q`
    /// (`q = 0` when `s = 0`).
    pub fn operator(&self, i: usize, s: usize, q: usize) -> &DMatrix<C64> {
        if s == 0 {
            &self.ops[i][0][0]
        } else {
            &self.ops[i][s][q - 1]
        }
    }

    pub fn operators(&self, i: usize, s: usize) -> &[DMatrix<C64>] {
        &self.ops[i][s]
    }

    /// `max |sum_q K^dagger K - 1|` over every position and setting.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dimension();
        let id = DMatrix::<C64>::identity(d, d);
        let mut worst: f64 = 0.0;
        for per_time in &self.ops {
            for set in per_time {
                let mut acc = DMatrix::<C64>::zeros(d, d);
                for k in set {
                    acc += k.adjoint() * k;
                }
                worst = worst.max((acc - &id).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }
}

pub fn build_kraus(r: &ConditionalTable) -> KrausSet {
    let sc = r.scenario();
    let dim = sc.coordinate_count();
    let delta = sc.delta();
    let codes: Vec<Vec<usize>> = (0..dim).map(|x| sc.codes_of(x)).collect();
    let uniform = 1.0 / (delta as f64).sqrt();
    let others = 1.0 / ((delta - 1) as f64).sqrt();

    let mut ops = Vec::with_capacity(sc.n());
    for i in 0..sc.n() {
        let weight = sc.combo_count().pow((sc.n() - 1 - i) as u32);
        let mut per_time = vec![vec![DMatrix::<C64>::identity(dim, dim)]];
        for s in 1..=sc.m() {
            let mut set = Vec::with_capacity(delta);
            for q in 1..=delta {
                let code = sc.code(s, q);
                let mut k = DMatrix::<C64>::zeros(dim, dim);
                for (x, c) in codes.iter().enumerate() {
                    if c[i..].iter().all(|&v| v == 0) {
                        let y = x + code * weight;
                        k[(y, x)] = C64::new(r.get(y).sqrt(), 0.0);
                    } else {
                        let written_by_setting = c[i + 1..].iter().all(|&v| v == 0) && sc.decode(c[i]).0 == s;
                        let w = match (written_by_setting, c[i] == code) {
                            (true, true) => 0.0,
                            (true, false) => others,
                            (false, _) => uniform,
                        };
                        k[(x, x)] = C64::new(w, 0.0);
                    }
                }
                set.push(k);
            }
            per_time.push(set);
        }
        ops.push(per_time);
    }
    KrausSet { scenario: sc, ops }
}

/// Outcome distribution for setting vector `s`, starting from the all-skip
/// basis state, in `outcomes_for(s)` order.
pub fn simulate_sequential(kraus: &KrausSet, s: &SettingVector) -> Result<Vec<(OutcomeVector, f64)>> {
    let sc = kraus.scenario();
    sc.check_settings(s)?;
    let dim = kraus.dimension();
    let mut out = Vec::new();
    for q in sc.outcomes_for(s) {
        let mut psi = DVector::<C64>::zeros(dim);
        psi[0] = C64::new(1.0, 0.0);
        for i in 0..sc.n() {
            psi = kraus.operator(i, s.0[i], q.0[i]) * psi;
        }
        out.push((q, psi.norm_squared()));
    }
    let total: f64 = out.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > PHYSICS_TOL {
        return Err(Error::Construction(format!("outcome probabilities for s={s} sum to {total}")));
    }
    Ok(out)
}

/// Full simulated probability vector over every setting vector.
pub fn simulate_all(kraus: &KrausSet) -> Result<ProbVector<f64>> {
    let sc = kraus.scenario();
    let mut values = vec![0.0; sc.coordinate_count()];
    for s in sc.enumerate_settings() {
        for (q, p) in simulate_sequential(kraus, &s)? {
            values[sc.flat_index(&s, &q)?] = p;
        }
    }
    ProbVector::new(sc, values)
}
