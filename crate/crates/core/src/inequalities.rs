//! Linear witnesses (CHSH, three-time Leggett-Garg) and NSIT residual scans.
//!
//! Outcome 1 counts as `+1` and outcome 2 as `-1` in every correlator.
//! Correlators of a pair of times are read from the setting vector that
//! measures exactly those two times and skips the rest.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::constraints::build_nsit;
use crate::quantum::{InitialState, QubitModel};
use crate::rational::{self, Rational};
use crate::scenario::{ProbVector, Scenario, SettingVector};
use crate::{Error, Result};

/// `sum terms . p <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWitness {
    pub name: String,
    pub scenario: Scenario,
    pub terms: Vec<(usize, Rational)>,
    pub bound: Rational,
}

impl LinearWitness {
    pub fn new(name: impl Into<String>, scenario: Scenario, terms: Vec<(usize, Rational)>, bound: Rational) -> Result<Self> {
        if let Some((bad, _)) = terms.iter().find(|(i, _)| *i >= scenario.coordinate_count()) {
            return Err(Error::Config(format!("witness term index {bad} out of range for {scenario}")));
        }
        Ok(LinearWitness { name: name.into(), scenario, terms, bound })
    }

    pub fn value_exact(&self, p: &ProbVector<Rational>) -> Rational {
        self.terms.iter().map(|(i, c)| c * &p.values()[*i]).sum()
    }

    pub fn value(&self, p: &ProbVector<f64>) -> f64 {
        self.terms.iter().map(|(i, c)| rational::to_f64(c) * p.values()[*i]).sum()
    }

    pub fn bound_f64(&self) -> f64 {
        rational::to_f64(&self.bound)
    }

    pub fn satisfied_exact(&self, p: &ProbVector<Rational>) -> bool {
        self.value_exact(p) <= self.bound
    }

    pub fn satisfied(&self, p: &ProbVector<f64>, tol: f64) -> bool {
        self.value(p) <= self.bound_f64() + tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "scenario": self.scenario,
            "terms": self.terms.iter().map(|(i, c)| rational::term_to_json(*i, c)).collect::<Vec<_>>(),
            "bound": rational::to_json(&self.bound),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let scenario: Scenario = serde_json::from_value(v.get("scenario").cloned().unwrap_or(Value::Null))?;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("witness without `terms`".into()))?
            .iter()
            .map(rational::term_from_json)
            .collect::<Result<Vec<_>>>()?;
        let bound = rational::from_json(v.get("bound").unwrap_or(&Value::Null))?;
        let name = v.get("name").and_then(Value::as_str).unwrap_or("unnamed");
        Self::new(name, scenario, terms, bound)
    }
}

fn sign(q: usize) -> i64 {
    if q == 1 {
        1
    } else {
        -1
    }
}

/// Coefficients of the correlator `<prod_i A_i>` for setting vector `s`.
pub fn correlator_terms(scenario: Scenario, s: &SettingVector) -> Result<Vec<(usize, Rational)>> {
    if scenario.delta() != 2 {
        return Err(Error::ScenarioMismatch { expected: "delta = 2".into(), actual: scenario.to_string() });
    }
    scenario.check_settings(s)?;
    scenario
        .outcomes_for(s)
        .iter()
        .map(|q| {
            let v: i64 = q.0.iter().filter(|&&x| x != 0).map(|&x| sign(x)).product();
            Ok((scenario.flat_index(s, q)?, rational::int(v)))
        })
        .collect()
}

fn require(scenario: Scenario, n: usize, m: usize, delta: usize) -> Result<()> {
    if (scenario.n(), scenario.m(), scenario.delta()) != (n, m, delta) {
        return Err(Error::ScenarioMismatch { expected: format!("(n={n}, m={m}, delta={delta})"), actual: scenario.to_string() });
    }
    Ok(())
}

fn combine(parts: Vec<(i64, Vec<(usize, Rational)>)>) -> Vec<(usize, Rational)> {
    let mut acc: std::collections::BTreeMap<usize, Rational> = Default::default();
    for (w, terms) in parts {
        for (i, c) in terms {
            *acc.entry(i).or_insert_with(rational::zero) += c * rational::int(w);
        }
    }
    acc.into_iter().filter(|(_, c)| c != &rational::zero()).collect()
}

/// `C(1,1) + C(1,2) + C(2,1) - C(2,2) <= 2` on `(2, 2, 2)`.
pub fn chsh_witness(scenario: Scenario) -> Result<LinearWitness> {
    require(scenario, 2, 2, 2)?;
    let parts = [(1, 1, 1), (1, 2, 1), (2, 1, 1), (2, 2, -1)]
        .iter()
        .map(|&(a, b, w)| Ok((w, correlator_terms(scenario, &SettingVector(vec![a, b]))?)))
        .collect::<Result<Vec<_>>>()?;
    LinearWitness::new("CHSH", scenario, combine(parts), rational::int(2))
}

/// Pairwise correlator of times `i < j` (one-based), others skipped.
fn pair_terms(scenario: Scenario, i: usize, j: usize) -> Result<Vec<(usize, Rational)>> {
    let mut s = vec![0; scenario.n()];
    s[i - 1] = 1;
    s[j - 1] = 1;
    correlator_terms(scenario, &SettingVector(s))
}

/// `K = C12 + C23 - C13 <= 1` on `(3, 1, 2)`.
pub fn lgi3_witness(scenario: Scenario) -> Result<LinearWitness> {
    lgi3_with_negated(scenario, (1, 3))
}

/// The three orderings with one negated correlator: `-C13`, `-C12`, `-C23`.
pub fn lgi3_orderings(scenario: Scenario) -> Result<Vec<LinearWitness>> {
    [(1, 3), (1, 2), (2, 3)].iter().map(|&neg| lgi3_with_negated(scenario, neg)).collect()
}

fn lgi3_with_negated(scenario: Scenario, negated: (usize, usize)) -> Result<LinearWitness> {
    require(scenario, 3, 1, 2)?;
    let parts = [(1, 2), (2, 3), (1, 3)]
        .iter()
        .map(|&pair| Ok((if pair == negated { -1 } else { 1 }, pair_terms(scenario, pair.0, pair.1)?)))
        .collect::<Result<Vec<_>>>()?;
    let name = format!("LGI3 -C{}{}", negated.0, negated.1);
    LinearWitness::new(name, scenario, combine(parts), rational::int(1))
}

/// `|lhs - rhs|` for every NSIT row.
pub fn nsit_residuals(p: &ProbVector<f64>) -> Vec<f64> {
    build_nsit(p.scenario()).residuals(p)
}

/// One grid point of the LGI-versus-NSIT scan.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub omega_tau: f64,
    pub state: InitialState,
    /// Values of the three orderings, `-C13` first.
    pub lgi_values: [f64; 3],
    pub lgi_bound: f64,
    pub lgi_ok: bool,
    pub max_nsit_residual: f64,
    pub max_pairwise_nsit: f64,
    pub max_deeper_nsit: f64,
}

impl WitnessReport {
    /// `C12 + C23 - C13`
    pub fn k12_23_13(&self) -> f64 {
        self.lgi_values[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub omega_tau_min: f64,
    pub omega_tau_max: f64,
    /// Number of grid points, endpoints included.
    pub steps: usize,
    pub states: Vec<InitialState>,
    /// Slack for LGI checks against rounding.
    pub lgi_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            omega_tau_min: 0.0,
            omega_tau_max: PI,
            steps: 181,
            states: vec![InitialState::Eigenstate, InitialState::MaximallyMixed],
            lgi_tol: 1e-12,
        }
    }
}

/// NSIT residual above which a grid point counts as NSIT-violating.
pub const NSIT_VIOLATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub rows: Vec<WitnessReport>,
    pub step: f64,
}

impl ScanTable {
    /// Points where all LGI orderings hold but NSIT is violated.
    pub fn separating(&self) -> impl Iterator<Item = &WitnessReport> {
        self.rows.iter().filter(|r| r.lgi_ok && r.max_nsit_residual > NSIT_VIOLATION)
    }

    /// Grid measure (points times spacing) of the separating region per state.
    pub fn separation_measure(&self, state: InitialState) -> f64 {
        self.separating().filter(|r| r.state == state).count() as f64 * self.step
    }

    /// Points where the pairwise NSIT rows vanish while a deeper row does not.
    pub fn pairwise_blind(&self) -> impl Iterator<Item = &WitnessReport> {
        self.rows.iter().filter(|r| r.max_pairwise_nsit < NSIT_VIOLATION && r.max_deeper_nsit > NSIT_VIOLATION)
    }

    pub fn max_k(&self) -> f64 {
        self.rows.iter().map(WitnessReport::k12_23_13).fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `omega_tau,state,K12_23_13,lgi_ok,max_nsit_residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["omega_tau", "state", "K12_23_13", "lgi_ok", "max_nsit_residual"])?;
        for r in &self.rows {
            w.write_record([
                rational::format_float(r.omega_tau),
                r.state.name().to_string(),
                rational::format_float(r.k12_23_13()),
                r.lgi_ok.to_string(),
                rational::format_float(r.max_nsit_residual),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Precessing qubit measured at three times, over an `omega tau` grid and
/// the requested preparations.
pub fn scan_lgi_vs_nsit(cfg: &ScanConfig) -> Result<ScanTable> {
    if cfg.steps == 0 {
        return Err(Error::Config("scan needs at least one grid point".into()));
    }
    if cfg.omega_tau_min.is_nan() || cfg.omega_tau_max.is_nan() || cfg.omega_tau_min > cfg.omega_tau_max {
        return Err(Error::Config("scan range is empty".into()));
    }
    let scenario = Scenario::new(3, 1, 2)?;
    let orderings = lgi3_orderings(scenario)?;
    let nsit = build_nsit(scenario);
    let pairwise: Vec<bool> = nsit
        .rows
        .iter()
        .map(|r| r.provenance.as_ref().is_some_and(|m| m.settings.performed() == 2))
        .collect();
    let step = if cfg.steps > 1 { (cfg.omega_tau_max - cfg.omega_tau_min) / (cfg.steps - 1) as f64 } else { 0.0 };
    let points: Vec<(InitialState, f64)> = cfg
        .states
        .iter()
        .flat_map(|&st| (0..cfg.steps).map(move |k| (st, cfg.omega_tau_min + k as f64 * step)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(state, omega_tau)| {
            let p = QubitModel::with_state(state, omega_tau).distribution(scenario)?;
            let lgi_values = [orderings[0].value(&p), orderings[1].value(&p), orderings[2].value(&p)];
            let lgi_ok = orderings.iter().all(|w| w.satisfied(&p, cfg.lgi_tol));
            let res = nsit.residuals(&p);
            let fold = |want: bool| {
                res.iter().zip(&pairwise).filter(|(_, &pw)| pw == want).map(|(r, _)| *r).fold(0.0, f64::max)
            };
            Ok(WitnessReport {
                omega_tau,
                state,
                lgi_values,
                lgi_bound: 1.0,
                lgi_ok,
                max_nsit_residual: res.iter().copied().fold(0.0, f64::max),
                max_pairwise_nsit: fold(true),
                max_deeper_nsit: fold(false),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { rows, step })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessReport {
    /// `(point index, coordinates equal to zero)` for every saturating point.
    pub saturating: Vec<(usize, Vec<usize>)>,
    /// Every saturating point has at least one zero coordinate.
    pub all_on_positivity_boundary: bool,
}

/// Which points attain the witness bound exactly, and whether each of them
/// sits on a positivity hyperplane.
pub fn tightness_probe(witness: &LinearWitness, points: &[ProbVector<Rational>]) -> TightnessReport {
    let zero = rational::zero();
    let saturating: Vec<(usize, Vec<usize>)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| witness.value_exact(p) == witness.bound)
        .map(|(k, p)| (k, p.values().iter().enumerate().filter(|(_, v)| **v == zero).map(|(i, _)| i).collect()))
        .collect();
    let all_on_positivity_boundary = saturating.iter().all(|(_, zeros)| !zeros.is_empty());
    TightnessReport { saturating, all_on_positivity_boundary }
}

/// True if the witness takes the same value on every point, i.e. its
/// hyperplane contains their affine hull.
pub fn is_constant_on(witness: &LinearWitness, points: &[ProbVector<Rational>]) -> bool {
    let mut values = points.iter().map(|p| witness.value_exact(p));
    match values.next() {
        Some(first) => values.all(|v| v == first),
        None => true,
    }
}
