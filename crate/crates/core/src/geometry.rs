//! Polytope dimensions, deterministic vertices and coordinate coverage.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::constraints::{build_aot, build_normalization, build_ns, build_nsit, ConstraintSystem};
use crate::linalg::{affine_solution_dim, RowEchelon};
use crate::rational::{self, Rational};
use crate::scenario::{ProbVector, Scenario};
use crate::{Error, Result};

/// Default cap on `delta^(n m)` deterministic strategies.
pub const DEFAULT_VERTEX_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "NS")]
    pub ns: usize,
    #[serde(rename = "AoT")]
    pub aot: usize,
    #[serde(rename = "MR")]
    pub mr: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimMatches {
    #[serde(rename = "P")]
    pub p: bool,
    #[serde(rename = "NS")]
    pub ns: bool,
    #[serde(rename = "AoT")]
    pub aot: bool,
    #[serde(rename = "MR")]
    pub mr: bool,
}

impl DimMatches {
    pub fn all(&self) -> bool {
        self.p && self.ns && self.aot && self.mr
    }
}

/// Computed versus closed-form dimensions of P, NS, AoT and MR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub scenario: Scenario,
    pub computed: Dims,
    pub closed_form: Dims,
    pub matches: DimMatches,
    pub caveats: Vec<String>,
}

impl DimensionReport {
    pub fn all_match(&self) -> bool {
        self.matches.all()
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["schema"] = json!(1);
        v["all_match"] = json!(self.all_match());
        v
    }
}

/// `(m delta + 1)^n - (m + 1)^n`
pub fn dim_p_closed_form(s: Scenario) -> usize {
    s.coordinate_count() - s.setting_count()
}

/// `[m (delta - 1) + 1]^n - 1`
pub fn dim_ns_closed_form(s: Scenario) -> usize {
    (s.m() * (s.delta() - 1) + 1).pow(s.n() as u32) - 1
}

/// `[(m delta + 1)^n - 1] (delta - 1) / delta`
pub fn dim_aot_closed_form(s: Scenario) -> usize {
    (s.coordinate_count() - 1) / s.delta() * (s.delta() - 1)
}

/// Same value as NS.
pub fn dim_mr_closed_form(s: Scenario) -> usize {
    dim_ns_closed_form(s)
}

pub fn dimension_report(scenario: Scenario) -> Result<DimensionReport> {
    let norm = build_normalization(scenario);
    let ns = build_ns(scenario);
    let aot = build_aot(scenario);
    let nsit = build_nsit(scenario);
    let computed = Dims {
        p: affine_solution_dim(&[&norm], scenario)?,
        ns: affine_solution_dim(&[&norm, &ns], scenario)?,
        aot: affine_solution_dim(&[&norm, &aot], scenario)?,
        mr: affine_solution_dim(&[&norm, &aot, &nsit], scenario)?,
    };
    let closed_form = Dims {
        p: dim_p_closed_form(scenario),
        ns: dim_ns_closed_form(scenario),
        aot: dim_aot_closed_form(scenario),
        mr: dim_mr_closed_form(scenario),
    };
    let matches = DimMatches {
        p: computed.p == closed_form.p,
        ns: computed.ns == closed_form.ns,
        aot: computed.aot == closed_form.aot,
        mr: computed.mr == closed_form.mr,
    };
    let mut caveats = Vec::new();
    if scenario.n() == 1 {
        caveats.push("n = 1: NS, AoT and NSIT systems are empty; all four polytopes coincide with P".to_string());
    }
    Ok(DimensionReport { scenario, computed, closed_form, matches, caveats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    LocalRealism,
    Macrorealism,
}

/// Fixed outcome for every `(position, setting)`; `table[i][s - 1]` is in
/// `1..=delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub table: Vec<Vec<usize>>,
}

impl DeterministicStrategy {
    /// Strategy number `k` in `0..delta^(n m)`, digits in base `delta`.
    pub fn from_index(scenario: Scenario, mut k: usize) -> Self {
        let d = scenario.delta();
        let mut table = vec![vec![1; scenario.m()]; scenario.n()];
        for row in table.iter_mut().rev() {
            for cell in row.iter_mut().rev() {
                *cell = k % d + 1;
                k /= d;
            }
        }
        DeterministicStrategy { table }
    }

    /// `p(q|s) = 1` iff every performed measurement shows its assigned outcome.
    pub fn vertex(&self, scenario: Scenario) -> ProbVector<Rational> {
        let values = (0..scenario.coordinate_count())
            .map(|idx| {
                let (s, q) = scenario.unflatten(idx);
                let hit = s.0.iter().zip(&q.0).enumerate().all(|(i, (&si, &qi))| si == 0 || self.table[i][si - 1] == qi);
                if hit {
                    rational::one()
                } else {
                    rational::zero()
                }
            })
            .collect();
        ProbVector::new(scenario, values).expect("sized by scenario")
    }
}

pub fn strategy_count(scenario: Scenario) -> Option<u128> {
    (scenario.delta() as u128).checked_pow((scenario.n() * scenario.m()) as u32)
}

/// Deterministic vertices of the LR or MR polytope. For deterministic,
/// non-invasive strategies the two sets coincide coordinatewise, so `model`
/// only documents intent.
pub fn enumerate_vertices(scenario: Scenario, _model: Model, limit: usize) -> Result<Vec<ProbVector<Rational>>> {
    let count = strategy_count(scenario).unwrap_or(u128::MAX);
    if count > limit as u128 {
        return Err(Error::EnumerationLimit { count, limit });
    }
    let all: Vec<ProbVector<Rational>> = (0..count as usize)
        .into_par_iter()
        .map(|k| DeterministicStrategy::from_index(scenario, k).vertex(scenario))
        .collect();
    let mut seen = BTreeSet::new();
    Ok(all.into_iter().filter(|v| seen.insert(v.values().to_vec())).collect())
}

/// Affine dimension of a point set: rank of `v - v_0` over all points.
pub fn affine_dim_of_hull(vertices: &[ProbVector<Rational>]) -> usize {
    let Some(first) = vertices.first() else { return 0 };
    let mut ech = RowEchelon::new();
    for v in &vertices[1..] {
        let diff: Vec<(usize, Rational)> =
            v.values().iter().zip(first.values()).map(|(a, b)| a - b).enumerate().collect();
        ech.insert(&diff);
    }
    ech.rank()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Satisfaction {
    pub satisfied: bool,
    /// `(vertex index, row index, row label)` of the first failure.
    pub counterexample: Option<(usize, usize, String)>,
}

pub fn vertices_satisfy(system: &ConstraintSystem, vertices: &[ProbVector<Rational>]) -> Satisfaction {
    for (vi, v) in vertices.iter().enumerate() {
        if let Some(ri) = system.first_violation(v) {
            return Satisfaction {
                satisfied: false,
                counterexample: Some((vi, ri, system.rows[ri].label.clone())),
            };
        }
    }
    Satisfaction { satisfied: true, counterexample: None }
}

/// Per-coordinate `(min, max)` over a point set.
pub fn coordinate_coverage(vertices: &[ProbVector<Rational>]) -> Vec<(Rational, Rational)> {
    let Some(first) = vertices.first() else { return Vec::new() };
    let mut out: Vec<(Rational, Rational)> = first.values().iter().map(|v| (v.clone(), v.clone())).collect();
    for v in &vertices[1..] {
        for ((lo, hi), x) in out.iter_mut().zip(v.values()) {
            if x < lo {
                *lo = x.clone();
            }
            if x > hi {
                *hi = x.clone();
            }
        }
    }
    out
}

/// Vertex set as CSV: a `vertex` column then one column per flat index.
pub fn vertices_to_csv<W: std::io::Write>(vertices: &[ProbVector<Rational>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cols = vertices.first().map_or(0, |v| v.values().len());
    let mut header = vec!["vertex".to_string()];
    header.extend((0..cols).map(|i| i.to_string()));
    w.write_record(&header)?;
    for (k, v) in vertices.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(v.values().iter().map(rational::format));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
