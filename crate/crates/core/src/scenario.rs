//! Scenarios, setting/outcome tuples, and the flat coordinate index.
//!
//! Every measurement position carries a combo code in `0..=m*delta`: code `0`
//! is the skipped measurement (setting 0, outcome 0), and setting `s >= 1`
//! with outcome `q` maps to `(s - 1) * delta + q`. The flat index is the
//! big-endian positional value of the codes, so position 1 varies slowest.
//! Vectors are always stored at full length `n`; trailing zeros are only
//! trimmed when formatting.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Default cap on `(m * delta + 1)^n`.
pub const DEFAULT_COORDINATE_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawScenario", into = "RawScenario")]
pub struct Scenario {
    n: usize,
    m: usize,
    delta: usize,
}

#[derive(Serialize, Deserialize)]
struct RawScenario {
    n: usize,
    m: usize,
    delta: usize,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        Scenario::new(raw.n, raw.m, raw.delta)
    }
}

impl From<Scenario> for RawScenario {
    fn from(s: Scenario) -> Self {
        RawScenario { n: s.n, m: s.m, delta: s.delta }
    }
}

impl Scenario {
    /// Validated scenario under [`DEFAULT_COORDINATE_LIMIT`].
    pub fn new(n: usize, m: usize, delta: usize) -> Result<Self> {
        Self::with_limit(n, m, delta, DEFAULT_COORDINATE_LIMIT)
    }

    pub fn with_limit(n: usize, m: usize, delta: usize, limit: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidScenario("n must be at least 1".into()));
        }
        if m < 1 {
            return Err(Error::InvalidScenario("m must be at least 1".into()));
        }
        if delta < 2 {
            return Err(Error::InvalidScenario("delta must be at least 2".into()));
        }
        let count = checked_coordinate_count(n, m, delta);
        match count {
            Some(c) if c <= limit as u128 => Ok(Scenario { n, m, delta }),
            Some(c) => Err(Error::SizeLimit { count: c, limit }),
            None => Err(Error::SizeLimit { count: u128::MAX, limit }),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Number of per-position codes, `m * delta + 1`.
    pub fn combo_count(&self) -> usize {
        self.m * self.delta + 1
    }

    /// `(m * delta + 1)^n`; bounded by the limit the scenario was built with.
    pub fn coordinate_count(&self) -> usize {
        self.combo_count().pow(self.n as u32)
    }

    /// `(m + 1)^n`, the number of setting vectors.
    pub fn setting_count(&self) -> usize {
        (self.m + 1).pow(self.n as u32)
    }

    pub fn code(&self, setting: usize, outcome: usize) -> usize {
        if setting == 0 {
            0
        } else {
            (setting - 1) * self.delta + outcome
        }
    }

    /// Inverse of [`Scenario::code`].
    pub fn decode(&self, code: usize) -> (usize, usize) {
        if code == 0 {
            (0, 0)
        } else {
            ((code - 1) / self.delta + 1, (code - 1) % self.delta + 1)
        }
    }

    pub fn index_of_codes(&self, codes: &[usize]) -> usize {
        let base = self.combo_count();
        codes.iter().fold(0, |acc, &c| acc * base + c)
    }

    pub fn codes_of(&self, mut index: usize) -> Vec<usize> {
        let base = self.combo_count();
        let mut codes = vec![0; self.n];
        for slot in codes.iter_mut().rev() {
            *slot = index % base;
            index /= base;
        }
        codes
    }

    pub fn flat_index(&self, s: &SettingVector, q: &OutcomeVector) -> Result<usize> {
        self.check_pair(s, q)?;
        let codes: Vec<usize> = s.0.iter().zip(&q.0).map(|(&si, &qi)| self.code(si, qi)).collect();
        Ok(self.index_of_codes(&codes))
    }

    pub fn unflatten(&self, index: usize) -> (SettingVector, OutcomeVector) {
        let (s, q) = self.codes_of(index).into_iter().map(|c| self.decode(c)).unzip();
        (SettingVector(s), OutcomeVector(q))
    }

    /// All `(m + 1)^n` setting vectors in lexicographic order.
    pub fn enumerate_settings(&self) -> Vec<SettingVector> {
        product(self.n, |_| 0..=self.m).into_iter().map(SettingVector).collect()
    }

    /// Outcome vectors compatible with `s`, in lexicographic order.
    pub fn outcomes_for(&self, s: &SettingVector) -> Vec<OutcomeVector> {
        product(self.n, |i| if s.0[i] == 0 { 0..=0 } else { 1..=self.delta })
            .into_iter()
            .map(OutcomeVector)
            .collect()
    }

    pub fn check_settings(&self, s: &SettingVector) -> Result<()> {
        if s.0.len() != self.n {
            return Err(Error::Incompatible(format!("setting vector {s} has length {}, expected {}", s.0.len(), self.n)));
        }
        if let Some(bad) = s.0.iter().find(|&&v| v > self.m) {
            return Err(Error::Incompatible(format!("setting {bad} exceeds m = {}", self.m)));
        }
        Ok(())
    }

    fn check_pair(&self, s: &SettingVector, q: &OutcomeVector) -> Result<()> {
        self.check_settings(s)?;
        if q.0.len() != self.n {
            return Err(Error::Incompatible(format!("outcome vector {q} has length {}, expected {}", q.0.len(), self.n)));
        }
        for (i, (&si, &qi)) in s.0.iter().zip(&q.0).enumerate() {
            let ok = if si == 0 { qi == 0 } else { (1..=self.delta).contains(&qi) };
            if !ok {
                return Err(Error::Incompatible(format!("position {}: setting {si} with outcome {qi}", i + 1)));
            }
        }
        Ok(())
    }

    /// Human-readable coordinate, e.g. `p(1,2|1,1)`, trailing skips trimmed.
    pub fn coordinate_label(&self, index: usize) -> String {
        let (s, q) = self.unflatten(index);
        format!("p({}|{})", trim_join(&q.0), trim_join(&s.0))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, m={}, delta={})", self.n, self.m, self.delta)
    }
}

fn checked_coordinate_count(n: usize, m: usize, delta: usize) -> Option<u128> {
    let base = (m as u128).checked_mul(delta as u128)?.checked_add(1)?;
    base.checked_pow(u32::try_from(n).ok()?)
}

fn product<F>(len: usize, range: F) -> Vec<Vec<usize>>
where
    F: Fn(usize) -> std::ops::RangeInclusive<usize>,
{
    let mut out = vec![Vec::with_capacity(len)];
    for i in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                range(i).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

fn trim_join(v: &[usize]) -> String {
    let end = v.iter().rposition(|&x| x != 0).map_or(0, |p| p + 1);
    if end == 0 {
        return "0".to_string();
    }
    v[..end].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Settings `s_1..s_n`; `0` means the measurement is skipped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SettingVector(pub Vec<usize>);

/// Outcomes `q_1..q_n`; `0` exactly where the setting is `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeVector(pub Vec<usize>);

impl SettingVector {
    pub fn performed(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }
}

impl fmt::Display for SettingVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", trim_join(&self.0))
    }
}

impl fmt::Display for OutcomeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", trim_join(&self.0))
    }
}

/// Value type stored in a [`ProbVector`].
pub trait CoordValue: Clone + PartialEq + fmt::Debug {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl CoordValue for f64 {
    fn to_json(&self) -> Value {
        Value::from(*self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64().ok_or_else(|| Error::Parse(format!("expected number, got {v}")))
    }
}

impl CoordValue for Rational {
    fn to_json(&self) -> Value {
        rational::to_json(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        rational::from_json(v)
    }
}

/// A full assignment of probabilities to the coordinates of a scenario, in
/// flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T> {
    scenario: Scenario,
    values: Vec<T>,
}

impl<T: CoordValue> ProbVector<T> {
    pub fn new(scenario: Scenario, values: Vec<T>) -> Result<Self> {
        if values.len() != scenario.coordinate_count() {
            return Err(Error::Config(format!(
                "probability vector has {} entries, scenario {scenario} needs {}",
                values.len(),
                scenario.coordinate_count()
            )));
        }
        Ok(ProbVector { scenario, values })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, s: &SettingVector, q: &OutcomeVector) -> Result<&T> {
        Ok(&self.values[self.scenario.flat_index(s, q)?])
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "scenario": self.scenario,
            "values": self.values.iter().map(CoordValue::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let scenario: Scenario = serde_json::from_value(v.get("scenario").cloned().unwrap_or(Value::Null))?;
        let values = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `values` array".into()))?
            .iter()
            .map(T::from_json)
            .collect::<Result<Vec<_>>>()?;
        Self::new(scenario, values)
    }
}

impl ProbVector<Rational> {
    pub fn to_f64(&self) -> ProbVector<f64> {
        ProbVector {
            scenario: self.scenario,
            values: self.values.iter().map(rational::to_f64).collect(),
        }
    }

    /// Uniform distribution: `delta^-k` on every coordinate with `k`
    /// performed measurements. Strictly positive and satisfies every
    /// equality family in this crate.
    pub fn uniform(scenario: Scenario) -> Self {
        let values = (0..scenario.coordinate_count())
            .map(|idx| {
                let k = scenario.codes_of(idx).iter().filter(|&&c| c != 0).count();
                rational::frac(1, (scenario.delta() as i64).pow(k as u32))
            })
            .collect();
        ProbVector { scenario, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(n: usize, m: usize, d: usize) -> Scenario {
        Scenario::new(n, m, d).unwrap()
    }

    #[test]
    fn coordinate_counts() {
        assert_eq!(sc(2, 2, 2).coordinate_count(), 25);
        assert_eq!(sc(1, 1, 2).coordinate_count(), 3);
        assert_eq!(sc(3, 2, 2).coordinate_count(), 125);
    }

    #[test]
    fn size_guard_is_an_error() {
        assert!(matches!(Scenario::new(9, 3, 3), Err(Error::SizeLimit { .. })));
        assert!(Scenario::with_limit(9, 3, 3, 2_000_000_000).is_ok());
        assert!(matches!(Scenario::new(usize::MAX, 2, 2), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn invalid_parameters() {
        assert!(Scenario::new(0, 1, 2).is_err());
        assert!(Scenario::new(1, 0, 2).is_err());
        assert!(Scenario::new(1, 1, 1).is_err());
    }

    #[test]
    fn flat_index_examples() {
        let s = sc(2, 1, 2);
        let idx = |sv: Vec<usize>, qv: Vec<usize>| s.flat_index(&SettingVector(sv), &OutcomeVector(qv));
        assert_eq!(idx(vec![0, 0], vec![0, 0]).unwrap(), 0);
        assert_eq!(idx(vec![1, 1], vec![2, 2]).unwrap(), 8);
        let s = sc(2, 2, 2);
        // code(2,1) = 3, weight 5 for the first position
        assert_eq!(s.flat_index(&SettingVector(vec![2, 0]), &OutcomeVector(vec![1, 0])).unwrap(), 15);
    }

    #[test]
    fn flat_index_rejects_incompatible_pairs() {
        let s = sc(2, 1, 2);
        let bad = [
            (vec![0, 1], vec![1, 1]),
            (vec![1, 1], vec![0, 1]),
            (vec![1, 1], vec![3, 1]),
            (vec![2, 1], vec![1, 1]),
            (vec![1], vec![1]),
        ];
        for (sv, qv) in bad {
            assert!(s.flat_index(&SettingVector(sv), &OutcomeVector(qv)).is_err());
        }
    }

    #[test]
    fn settings_and_outcomes() {
        assert_eq!(sc(1, 1, 2).enumerate_settings(), vec![SettingVector(vec![0]), SettingVector(vec![1])]);
        assert_eq!(sc(2, 1, 2).enumerate_settings().len(), 4);
        let all = sc(3, 2, 2).enumerate_settings();
        assert_eq!(all.len(), 27);
        assert!(all.windows(2).all(|w| w[0] < w[1]));

        let s = sc(2, 1, 2);
        assert_eq!(s.outcomes_for(&SettingVector(vec![0, 0])), vec![OutcomeVector(vec![0, 0])]);
        assert_eq!(s.outcomes_for(&SettingVector(vec![1, 1])).len(), 4);
        assert_eq!(sc(2, 1, 3).outcomes_for(&SettingVector(vec![1, 0])).len(), 3);
    }

    #[test]
    fn labels_trim_trailing_zeros() {
        let s = sc(3, 2, 2);
        let idx = s.flat_index(&SettingVector(vec![1, 2, 0]), &OutcomeVector(vec![2, 1, 0])).unwrap();
        assert_eq!(s.coordinate_label(idx), "p(2,1|1,2)");
        assert_eq!(s.coordinate_label(0), "p(0|0)");
    }

    #[test]
    fn prob_vector_json_round_trip() {
        let s = sc(2, 1, 2);
        let u = ProbVector::uniform(s);
        let back = ProbVector::<Rational>::from_json(&u.to_json()).unwrap();
        assert_eq!(back, u);
        assert_eq!(u.to_json()["scenario"], serde_json::json!({"n": 2, "m": 1, "delta": 2}));
        assert!(ProbVector::new(s, vec![0.0; 3]).is_err());
    }

    #[test]
    fn scenario_json_validates() {
        let ok: Scenario = serde_json::from_str(r#"{"n":2,"m":1,"delta":2}"#).unwrap();
        assert_eq!(ok, sc(2, 1, 2));
        assert!(serde_json::from_str::<Scenario>(r#"{"n":2,"m":1,"delta":1}"#).is_err());
    }
}
