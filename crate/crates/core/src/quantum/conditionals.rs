//! Conditional probabilities of the last performed measurement given its
//! history.
//!
//! A coordinate `y` whose last performed measurement sits at position `i`
//! determines both the history (positions before `i`) and the new outcome,
//! so the table is stored in flat-index order: `r[y] = p[y] / p[parent(y)]`
//! where `parent(y)` is `y` with position `i` skipped. The all-skip
//! coordinate carries `r = 1`.

use serde_json::{json, Value};

use crate::constraints::{build_aot, build_normalization};
use crate::scenario::{ProbVector, Scenario};
use crate::{Error, Result};

/// Histories whose probability is at most this are treated as unreachable.
const ZERO_HISTORY: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    scenario: Scenario,
    values: Vec<f64>,
}

/// Position of the last performed measurement, if any.
pub(crate) fn last_performed(codes: &[usize]) -> Option<usize> {
    codes.iter().rposition(|&c| c != 0)
}

/// `(parent index, position)` for every coordinate except the all-skip one.
pub(crate) fn parent_of(scenario: Scenario, index: usize) -> Option<(usize, usize)> {
    let codes = scenario.codes_of(index);
    let i = last_performed(&codes)?;
    let weight = scenario.combo_count().pow((scenario.n() - 1 - i) as u32);
    Some((index - codes[i] * weight, i))
}

impl ConditionalTable {
    /// Checks that every conditional lies in `[0, 1]` and that each
    /// (history, setting) block sums to one.
    pub fn new(scenario: Scenario, values: Vec<f64>) -> Result<Self> {
        if values.len() != scenario.coordinate_count() {
            return Err(Error::Config(format!(
                "conditional table has {} entries, scenario needs {}",
                values.len(),
                scenario.coordinate_count()
            )));
        }
        if (values[0] - 1.0).abs() > super::CONSTRUCTION_TOL {
            return Err(Error::Config("conditional of the empty history must be 1".into()));
        }
        if let Some(bad) = values.iter().position(|v| !(-super::CONSTRUCTION_TOL..=1.0 + super::CONSTRUCTION_TOL).contains(v)) {
            return Err(Error::Config(format!("conditional {} = {} outside [0, 1]", scenario.coordinate_label(bad), values[bad])));
        }
        let table = ConditionalTable { scenario, values };
        for (parent, i, s) in table.blocks() {
            let sum: f64 = table.block_members(parent, i, s).map(|y| table.values[y]).sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "conditionals after {} at position {} setting {s} sum to {sum}",
                    scenario.coordinate_label(parent),
                    i + 1
                )));
            }
        }
        Ok(table)
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `r` for the coordinate that appends `(setting, outcome)` at position
    /// `i` to the history `parent`.
    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Every `(history, position, setting)` triple with a free conditional.
    fn blocks(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let s = self.scenario;
        (0..s.coordinate_count()).flat_map(move |x| {
            let start = last_performed(&s.codes_of(x)).map_or(0, |j| j + 1);
            (start..s.n()).flat_map(move |i| (1..=s.m()).map(move |setting| (x, i, setting)))
        })
    }

    fn block_members(&self, parent: usize, i: usize, setting: usize) -> impl Iterator<Item = usize> {
        let s = self.scenario;
        let weight = s.combo_count().pow((s.n() - 1 - i) as u32);
        (1..=s.delta()).map(move |q| parent + s.code(setting, q) * weight)
    }

    pub fn to_json(&self) -> Value {
        json!({ "schema": 1, "scenario": self.scenario, "r": self.values })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let scenario: Scenario = serde_json::from_value(v.get("scenario").cloned().unwrap_or(Value::Null))?;
        let values: Vec<f64> = serde_json::from_value(v.get("r").cloned().unwrap_or(Value::Null))?;
        Self::new(scenario, values)
    }
}

/// Conditionals with the default round-trip tolerance for the input checks.
pub fn conditionals_from_joint(p: &ProbVector<f64>) -> Result<ConditionalTable> {
    conditionals_from_joint_with_tol(p, super::ROUND_TRIP_TOL)
}

/// Rejects inputs violating normalization or an arrow-of-time row by more
/// than `tol`. Unreachable histories get the uniform conditional `1/delta`.
pub fn conditionals_from_joint_with_tol(p: &ProbVector<f64>, tol: f64) -> Result<ConditionalTable> {
    let scenario = p.scenario();
    let vals = p.values();
    for row in &build_normalization(scenario).rows {
        let residual = row.residual(vals);
        if residual > tol {
            return Err(Error::NotNormalized { label: row.label.clone(), residual });
        }
    }
    for row in &build_aot(scenario).rows {
        let residual = row.residual(vals);
        if residual > tol {
            return Err(Error::AotViolation { label: row.label.clone(), residual });
        }
    }
    let uniform = 1.0 / scenario.delta() as f64;
    let mut r = vec![1.0; scenario.coordinate_count()];
    for (y, slot) in r.iter_mut().enumerate().skip(1) {
        let (parent, _) = parent_of(scenario, y).expect("non-root coordinate");
        let hist = vals[parent];
        *slot = if hist <= ZERO_HISTORY { uniform } else { (vals[y] / hist).clamp(0.0, 1.0) };
    }
    // renormalize each block so completeness is exact up to rounding
    let table = ConditionalTable { scenario, values: r };
    let blocks: Vec<_> = table.blocks().collect();
    let mut values = table.values.clone();
    for (parent, i, setting) in blocks {
        let members: Vec<usize> = table.block_members(parent, i, setting).collect();
        let sum: f64 = members.iter().map(|&y| values[y]).sum();
        if sum > 0.0 {
            for y in members {
                values[y] /= sum;
            }
        } else {
            for y in members {
                values[y] = uniform;
            }
        }
    }
    ConditionalTable::new(scenario, values)
}
