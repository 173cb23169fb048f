use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantum::conditionals::last_performed;
use crate::rational::{self, Rational};
use crate::scenario::{ProbVector, Scenario};

/// Denominator of the sampled conditionals.
const GRID: i64 = 1 << 20;

/// Random point of the arrow-of-time polytope.
///
/// Every conditional distribution (one per history and next setting) is
/// drawn independently and uniformly from the simplex, discretized to
/// multiples of `2^-20` via sorted uniform spacings, and the joint is the
/// product along each history. The result satisfies normalization and every
/// arrow-of-time row exactly.
pub fn random_aot_point(scenario: Scenario, seed: u64) -> ProbVector<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = scenario.delta();
    let mut p = vec![rational::zero(); scenario.coordinate_count()];
    p[0] = rational::one();
    for x in 0..scenario.coordinate_count() {
        let start = last_performed(&scenario.codes_of(x)).map_or(0, |j| j + 1);
        for i in start..scenario.n() {
            let weight = scenario.combo_count().pow((scenario.n() - 1 - i) as u32);
            for s in 1..=scenario.m() {
                let mut cuts: Vec<i64> = (0..delta - 1).map(|_| rng.random_range(0..=GRID)).collect();
                cuts.push(0);
                cuts.push(GRID);
                cuts.sort_unstable();
                for q in 1..=delta {
                    let r = rational::frac(cuts[q] - cuts[q - 1], GRID);
                    p[x + scenario.code(s, q) * weight] = &p[x] * r;
                }
            }
        }
    }
    ProbVector::new(scenario, p).expect("sized by scenario")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{build_aot, build_normalization, build_nsit};

    #[test]
    fn satisfies_aot_exactly_and_is_reproducible() {
        let s = Scenario::new(3, 2, 2).unwrap();
        let p = random_aot_point(s, 7);
        assert_eq!(build_aot(s).first_violation(&p), None);
        assert_eq!(build_normalization(s).first_violation(&p), None);
        assert_eq!(random_aot_point(s, 7), p);
        assert_ne!(random_aot_point(s, 8), p);
    }

    #[test]
    fn samples_violate_nsit() {
        let s = Scenario::new(2, 1, 2).unwrap();
        let nsit = build_nsit(s);
        let violating = (0..100).filter(|&seed| nsit.first_violation(&random_aot_point(s, seed)).is_some()).count();
        assert_eq!(violating, 100);
    }
}
