//! A two-time distribution that generalized measurements reach but
//! projective ones do not.
//!
//! Target, for `(n=2, m=1, delta=2)`: the first measurement always yields
//! 1, the second yields 1 whenever the first was performed, and never yields
//! 1 when the first was skipped. A projective first measurement that is
//! certain to give 1 leaves the state unchanged, so the second measurement
//! cannot tell whether it happened.
//!
//! The search below is numerical evidence, not a proof. It covers
//! projective models of dimension `2..=max_dim`: a density matrix, a
//! projector for outcome 1 at time 1, and a projector for outcome 1 at time
//! 2 in the Heisenberg picture (any unitary evolution between the times is
//! absorbed into it). Distance is the maximum absolute coordinate difference.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{build_kraus, conditionals_from_joint, simulate_all, C64};
use crate::constraints::{build_aot, build_nsit};
use crate::rational::{self, Rational};
use crate::scenario::{OutcomeVector, ProbVector, Scenario, SettingVector};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectiveSearchConfig {
    /// Total model evaluations across all dimensions and ranks.
    pub budget: usize,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for ProjectiveSearchConfig {
    fn default() -> Self {
        ProjectiveSearchConfig { budget: 100_000, max_dim: 4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub target: ProbVector<Rational>,
    pub target_satisfies_aot: bool,
    pub target_violates_nsit: bool,
    pub povm_round_trip_error: f64,
    pub best_distance: f64,
    /// `(dimension, rank of time-1 projector, rank of time-2 projector)`.
    pub best_model: (usize, usize, usize),
    pub evaluations: usize,
    pub note: &'static str,
}

pub fn counterexample_target() -> ProbVector<Rational> {
    let s = Scenario::new(2, 1, 2).expect("fixed scenario");
    let mut vals = vec![rational::zero(); s.coordinate_count()];
    for (sv, qv) in [
        (vec![0, 0], vec![0, 0]),
        (vec![1, 0], vec![1, 0]),
        (vec![0, 1], vec![0, 2]),
        (vec![1, 1], vec![1, 1]),
    ] {
        vals[s.flat_index(&SettingVector(sv), &OutcomeVector(qv)).expect("valid")] = rational::one();
    }
    ProbVector::new(s, vals).expect("sized")
}

const RESTARTS: usize = 4;

struct Params {
    state: DMatrix<C64>,
    first: DMatrix<C64>,
    second: DMatrix<C64>,
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

fn projector_from(g: &DMatrix<C64>, rank: usize) -> DMatrix<C64> {
    let q = g.clone().qr().q();
    let v = q.columns(0, rank);
    v * v.adjoint()
}

/// Probability vector of a projective model, in flat-index order.
fn model_vector(p: &Params, rank1: usize, rank2: usize) -> [f64; 9] {
    let d = p.state.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let rho = {
        let r = &p.state * p.state.adjoint();
        let tr = r.trace().re;
        r / C64::new(tr, 0.0)
    };
    let p1 = projector_from(&p.first, rank1);
    let q1 = projector_from(&p.second, rank2);
    let first = [p1.clone(), &id - &p1];
    let second = [q1.clone(), &id - &q1];
    let tr = |m: DMatrix<C64>| m.trace().re;
    let mut out = [0.0; 9];
    out[0] = 1.0;
    // codes per time: 0 skip, 1 outcome 1, 2 outcome 2; index = 3 c1 + c2
    for a in 0..2 {
        out[3 * (a + 1)] = tr(&first[a] * &rho);
        out[a + 1] = tr(&second[a] * &rho);
        for b in 0..2 {
            out[3 * (a + 1) + b + 1] = tr(&second[b] * &first[a] * &rho * &first[a]);
        }
    }
    out
}

fn distance(v: &[f64; 9], target: &[f64]) -> f64 {
    v.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Runs the exact AoT/NSIT checks on the target, the generalized-measurement
/// round trip, and the budgeted projective search.
pub fn projective_counterexample_check(cfg: ProjectiveSearchConfig) -> Result<CounterexampleReport> {
    let target = counterexample_target();
    let s = target.scenario();
    let target_satisfies_aot = build_aot(s).first_violation(&target).is_none();
    let target_violates_nsit = build_nsit(s).first_violation(&target).is_some();

    let tf = target.to_f64();
    let sim = simulate_all(&build_kraus(&conditionals_from_joint(&tf)?))?;
    let povm_round_trip_error = sim.values().iter().zip(tf.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let combos: Vec<(usize, usize, usize)> = (2..=cfg.max_dim.max(2))
        .flat_map(|d| (1..d).flat_map(move |k1| (1..d).map(move |k2| (d, k1, k2))))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = (f64::INFINITY, combos[0]);
    let mut evaluations = 0;

    for (ci, &(d, k1, k2)) in combos.iter().enumerate() {
        let share = cfg.budget / combos.len() + usize::from(ci < cfg.budget % combos.len());
        let mut eval = |params: &Params| {
            evaluations += 1;
            distance(&model_vector(params, k1, k2), tf.values())
        };
        let explore = (share / 4).max(1).min(share);
        let mut starts: Vec<(f64, Params)> = Vec::new();
        for _ in 0..explore {
            let params = Params { state: gaussian(&mut rng, d, 1.0), first: gaussian(&mut rng, d, 1.0), second: gaussian(&mut rng, d, 1.0) };
            let dist = eval(&params);
            starts.push((dist, params));
            starts.sort_by(|a, b| a.0.total_cmp(&b.0));
            starts.truncate(RESTARTS);
        }
        // adaptive random walk from each of the best starting points
        let refine = share - explore;
        let n_starts = starts.len().max(1);
        for (si, (mut cur, mut params)) in starts.into_iter().enumerate() {
            let steps = refine / n_starts + usize::from(si < refine % n_starts);
            let mut scale = 0.3;
            for _ in 0..steps {
                let trial = Params {
                    state: &params.state + gaussian(&mut rng, d, scale),
                    first: &params.first + gaussian(&mut rng, d, scale),
                    second: &params.second + gaussian(&mut rng, d, scale),
                };
                let dist = eval(&trial);
                if dist < cur {
                    cur = dist;
                    params = trial;
                    scale = (scale * 1.5).min(1.0);
                } else {
                    scale = (scale * 0.97).max(1e-4);
                }
            }
            if cur < best.0 {
                best = (cur, (d, k1, k2));
            }
        }
    }

    Ok(CounterexampleReport {
        target,
        target_satisfies_aot,
        target_violates_nsit,
        povm_round_trip_error,
        best_distance: best.0,
        best_model: best.1,
        evaluations,
        note: "projective search is budgeted numerical evidence, not a proof",
    })
}
