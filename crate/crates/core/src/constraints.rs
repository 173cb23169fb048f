//! Exact affine equality systems over a scenario's probability coordinates.
//!
//! Marginalization rows are written as `marginal - sum = 0`, where the sum
//! runs over the outcomes of a single performed measurement and the marginal
//! is the coordinate with that measurement skipped. Normalization rows are
//! `sum_q p(q|s) = 1`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::rational::{self, Rational};
use crate::scenario::{OutcomeVector, ProbVector, Scenario, SettingVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintKind {
    Normalization,
    #[serde(rename = "NS")]
    NoSignaling,
    #[serde(rename = "AoT")]
    ArrowOfTime,
    #[serde(rename = "NSIT")]
    NoSignalingInTime,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Normalization => "Normalization",
            ConstraintKind::NoSignaling => "NS",
            ConstraintKind::ArrowOfTime => "AoT",
            ConstraintKind::NoSignalingInTime => "NSIT",
        })
    }
}

/// Which single measurement a row marginalizes, and in which context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginalization {
    /// Zero-based position of the marginalized measurement.
    pub position: usize,
    /// Full setting vector of the summed distribution (`settings[position] != 0`).
    pub settings: SettingVector,
    /// Outcomes of the other positions; `context[position]` is 0.
    pub context: OutcomeVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
    pub label: String,
    pub provenance: Option<Marginalization>,
}

impl Row {
    pub fn eval_exact(&self, p: &[Rational]) -> Rational {
        self.terms.iter().map(|(i, c)| c * &p[*i]).sum()
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|(i, c)| rational::to_f64(c) * p[*i]).sum()
    }

    /// `|lhs - rhs|` at a floating point.
    pub fn residual(&self, p: &[f64]) -> f64 {
        (self.eval_f64(p) - rational::to_f64(&self.rhs)).abs()
    }

    pub fn holds_exactly(&self, p: &[Rational]) -> bool {
        self.eval_exact(p) == self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub kind: ConstraintKind,
    pub scenario: Scenario,
    pub rows: Vec<Row>,
}

impl ConstraintSystem {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct `(position, settings)` pairs: the distribution-level
    /// marginalization arrows, one per outcome-independent relation.
    pub fn marginalization_arrows(&self) -> BTreeSet<(usize, SettingVector)> {
        self.rows
            .iter()
            .filter_map(|r| r.provenance.as_ref())
            .map(|m| (m.position, m.settings.clone()))
            .collect()
    }

    /// First row not satisfied exactly, if any.
    pub fn first_violation(&self, p: &ProbVector<Rational>) -> Option<usize> {
        self.rows.iter().position(|r| !r.holds_exactly(p.values()))
    }

    pub fn residuals(&self, p: &ProbVector<f64>) -> Vec<f64> {
        self.rows.iter().map(|r| r.residual(p.values())).collect()
    }

    pub fn max_residual(&self, p: &ProbVector<f64>) -> f64 {
        self.residuals(p).into_iter().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "kind": self.kind,
            "scenario": self.scenario,
            "rows": self.rows.iter().map(|r| json!({
                "rhs": rational::to_json(&r.rhs),
                "terms": r.terms.iter().map(|(i, c)| rational::term_to_json(*i, c)).collect::<Vec<_>>(),
                "label": r.label,
            })).collect::<Vec<_>>(),
        })
    }

    /// Reads the export format back. Provenance is not serialized.
    pub fn from_json(v: &Value) -> Result<Self> {
        let kind: ConstraintKind = serde_json::from_value(v.get("kind").cloned().unwrap_or(Value::Null))?;
        let scenario: Scenario = serde_json::from_value(v.get("scenario").cloned().unwrap_or(Value::Null))?;
        let n = scenario.coordinate_count();
        let rows = v
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `rows`".into()))?
            .iter()
            .map(|r| {
                let terms = r
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse("row without `terms`".into()))?
                    .iter()
                    .map(rational::term_from_json)
                    .collect::<Result<Vec<_>>>()?;
                if let Some((bad, _)) = terms.iter().find(|(i, _)| *i >= n) {
                    return Err(Error::Parse(format!("term index {bad} out of range for {scenario}")));
                }
                Ok(Row {
                    terms,
                    rhs: rational::from_json(r.get("rhs").unwrap_or(&Value::Null))?,
                    label: r.get("label").and_then(Value::as_str).unwrap_or_default().to_string(),
                    provenance: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConstraintSystem { kind, scenario, rows })
    }
}

/// One row per setting vector: `sum_q p(q|s) = 1`.
pub fn build_normalization(scenario: Scenario) -> ConstraintSystem {
    let rows = scenario
        .enumerate_settings()
        .into_iter()
        .map(|s| {
            let terms = scenario
                .outcomes_for(&s)
                .iter()
                .map(|q| (scenario.flat_index(&s, q).expect("enumerated pair"), rational::one()))
                .collect();
            Row { terms, rhs: rational::one(), label: format!("norm s={s}"), provenance: None }
        })
        .collect();
    ConstraintSystem { kind: ConstraintKind::Normalization, scenario, rows }
}

/// No-signaling: every party `i` with `s_i != 0`, in every context where
/// some other party measures. Rows where all other parties skip only
/// restate normalization and are not generated.
pub fn build_ns(scenario: Scenario) -> ConstraintSystem {
    marginalization_system(scenario, ConstraintKind::NoSignaling, |s, i| {
        s.iter().enumerate().any(|(j, &x)| j != i && x != 0)
    })
}

/// Arrow of time: the last performed measurement at position `i >= 2`,
/// with at least one earlier measurement performed.
pub fn build_aot(scenario: Scenario) -> ConstraintSystem {
    marginalization_system(scenario, ConstraintKind::ArrowOfTime, |s, i| {
        i >= 1 && s[..i].iter().any(|&x| x != 0) && s[i + 1..].iter().all(|&x| x == 0)
    })
}

/// No-signaling in time: measurement `i < n` with some later measurement
/// performed, against the distribution with `s_i` replaced by 0.
pub fn build_nsit(scenario: Scenario) -> ConstraintSystem {
    marginalization_system(scenario, ConstraintKind::NoSignalingInTime, |s, i| {
        s[i + 1..].iter().any(|&x| x != 0)
    })
}

fn marginalization_system<F>(scenario: Scenario, kind: ConstraintKind, keep: F) -> ConstraintSystem
where
    F: Fn(&[usize], usize) -> bool,
{
    let mut rows = Vec::new();
    for s in scenario.enumerate_settings() {
        for i in 0..scenario.n() {
            if s.0[i] == 0 || !keep(&s.0, i) {
                continue;
            }
            for q in scenario.outcomes_for(&s) {
                // one context per assignment of the other positions
                if q.0[i] != 1 {
                    continue;
                }
                let mut context = q.clone();
                context.0[i] = 0;
                rows.push(marginalization_row(scenario, kind, i, &s, &context));
            }
        }
    }
    ConstraintSystem { kind, scenario, rows }
}

fn marginalization_row(
    scenario: Scenario,
    kind: ConstraintKind,
    position: usize,
    settings: &SettingVector,
    context: &OutcomeVector,
) -> Row {
    let mut skipped = settings.clone();
    skipped.0[position] = 0;
    let marginal = scenario.flat_index(&skipped, context).expect("valid marginal");
    let mut terms = vec![(marginal, rational::one())];
    let mut full = context.clone();
    for q in 1..=scenario.delta() {
        full.0[position] = q;
        terms.push((scenario.flat_index(settings, &full).expect("valid joint"), -rational::one()));
    }
    let label = format!(
        "{kind} i={} {} = sum_q{} p(..|{})",
        position + 1,
        scenario.coordinate_label(marginal),
        position + 1,
        settings_with_context(settings, context, position),
    );
    Row {
        terms,
        rhs: rational::zero(),
        label,
        provenance: Some(Marginalization { position, settings: settings.clone(), context: context.clone() }),
    }
}

fn settings_with_context(s: &SettingVector, q: &OutcomeVector, position: usize) -> String {
    let outs: Vec<String> = q
        .0
        .iter()
        .enumerate()
        .map(|(j, v)| if j == position { "*".to_string() } else { v.to_string() })
        .collect();
    format!("{} ; {}", outs.join(","), s.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
}

/// Number of arrow-of-time equalities, `((m delta + 1)^n - n m delta - 1) / delta`.
pub fn count_aot_closed_form(scenario: Scenario) -> usize {
    let (n, m, d) = (scenario.n(), scenario.m(), scenario.delta());
    (scenario.coordinate_count() - n * m * d - 1) / d
}

/// Normalization conditions made redundant by AoT, `(m + 1)^n - n m - 1`.
pub fn count_redundant_normalizations(scenario: Scenario) -> usize {
    scenario.setting_count() - scenario.n() * scenario.m() - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(n: usize, m: usize, d: usize) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    #[test]
    fn normalization_row_counts() {
        assert_eq!(build_normalization(sc(2, 2, 2)).len(), 9);
        assert_eq!(build_normalization(sc(1, 1, 2)).len(), 2);
        assert_eq!(build_normalization(sc(3, 2, 2)).len(), 27);
        assert!(build_normalization(sc(2, 1, 2)).rows.iter().all(|r| r.rhs == rational::one()));
    }

    #[test]
    fn single_party_has_no_signaling_rows() {
        for (m, d) in [(1, 2), (2, 3)] {
            assert!(build_ns(sc(1, m, d)).is_empty());
            assert!(build_nsit(sc(1, m, d)).is_empty());
            assert!(build_aot(sc(1, m, d)).is_empty());
        }
    }

    #[test]
    fn aot_counts_match_closed_form() {
        for (n, m, d, want) in [(2, 1, 2, 2), (3, 2, 2, 56), (2, 2, 2, 8)] {
            let s = sc(n, m, d);
            assert_eq!(count_aot_closed_form(s), want);
            assert_eq!(build_aot(s).len(), want);
        }
    }

    #[test]
    fn redundant_normalization_counts() {
        assert_eq!(count_redundant_normalizations(sc(2, 1, 2)), 1);
        assert_eq!(count_redundant_normalizations(sc(3, 2, 2)), 20);
        assert_eq!(count_redundant_normalizations(sc(1, 1, 2)), 0);
    }

    #[test]
    fn ns_contains_party_two_instance() {
        // p(0,q2|0,1) = sum_q1 p(q1,q2|1,1)
        let s = sc(2, 1, 2);
        let ns = build_ns(s);
        for q2 in 1..=2 {
            let marginal = s.flat_index(&SettingVector(vec![0, 1]), &OutcomeVector(vec![0, q2])).unwrap();
            let mut want: Vec<usize> = (1..=2)
                .map(|q1| s.flat_index(&SettingVector(vec![1, 1]), &OutcomeVector(vec![q1, q2])).unwrap())
                .collect();
            want.insert(0, marginal);
            assert!(ns.rows.iter().any(|r| r.terms.iter().map(|t| t.0).collect::<Vec<_>>() == want));
        }
    }

    #[test]
    fn nsit_instance_for_two_times() {
        let s = sc(2, 1, 2);
        let nsit = build_nsit(s);
        // s=(1,1) marginalizing time 1 for q2 in {1,2}; s=(1,1) only
        assert_eq!(nsit.len(), 2);
        assert!(nsit.rows.iter().all(|r| r.provenance.as_ref().unwrap().position == 0));
    }

    #[test]
    fn rows_reference_valid_indices() {
        let s = sc(3, 2, 3);
        for sys in [build_normalization(s), build_ns(s), build_aot(s), build_nsit(s)] {
            for r in &sys.rows {
                assert!(r.terms.iter().all(|(i, _)| *i < s.coordinate_count()));
                if sys.kind != ConstraintKind::Normalization {
                    assert_eq!(r.rhs, rational::zero());
                    assert_eq!(r.terms.len(), s.delta() + 1);
                }
            }
        }
    }

    #[test]
    fn uniform_point_satisfies_every_family() {
        let s = sc(3, 2, 2);
        let u = ProbVector::uniform(s);
        for sys in [build_normalization(s), build_ns(s), build_aot(s), build_nsit(s)] {
            assert_eq!(sys.first_violation(&u), None, "{}", sys.kind);
        }
    }

    #[test]
    fn json_export_round_trip() {
        let sys = build_aot(sc(2, 1, 2));
        let v = sys.to_json();
        assert_eq!(v["kind"], "AoT");
        assert_eq!(v["rows"][0]["rhs"], 0);
        assert_eq!(v["rows"][0]["terms"][0][1], 1);
        let back = ConstraintSystem::from_json(&v).unwrap();
        assert_eq!(back.len(), sys.len());
        for (a, b) in back.rows.iter().zip(&sys.rows) {
            assert_eq!(a.terms, b.terms);
            assert_eq!(a.label, b.label);
        }
    }
}
