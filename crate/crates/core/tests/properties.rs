use proptest::prelude::*;

use tempoly::constraints::{build_aot, build_normalization, build_nsit};
use tempoly::geometry::{enumerate_vertices, vertices_satisfy, Model, DEFAULT_VERTEX_LIMIT};
use tempoly::linalg::{rank, RationalMatrix};
use tempoly::quantum::{build_kraus, conditionals_from_joint, random_aot_point, simulate_all};
use tempoly::rational::{self, Rational};
use tempoly::Scenario;

fn small_scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=4, 1usize..=3, 2usize..=4).prop_filter_map("too large", |(n, m, d)| Scenario::with_limit(n, m, d, 10_000).ok())
}

fn sparse_matrix() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..7).prop_flat_map(|cols| (Just(cols), prop::collection::vec(prop::collection::vec(-3i64..=3, cols), 0..8)))
}

fn to_matrix(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| rational::int(x)).collect()).collect()
}

/// Float Gaussian elimination with partial pivoting; exact enough for
/// entries in [-3, 3] and at most 8 x 6.
fn float_rank(rows: &[Vec<i64>], cols: usize) -> usize {
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(r, p);
        let pivot = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r {
                let f = row[c] / pivot[c];
                for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * p;
                }
            }
        }
        r += 1;
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flat_index_is_a_bijection(s in small_scenario(), probe in any::<prop::sample::Index>()) {
        let idx = probe.index(s.coordinate_count());
        let (sv, qv) = s.unflatten(idx);
        prop_assert_eq!(s.flat_index(&sv, &qv).unwrap(), idx);
    }

    #[test]
    fn outcome_sets_partition_the_coordinates(s in small_scenario()) {
        let total: usize = s.enumerate_settings().iter().map(|sv| s.outcomes_for(sv).len()).sum();
        prop_assert_eq!(total, s.coordinate_count());
        let mut seen = vec![false; s.coordinate_count()];
        for sv in s.enumerate_settings() {
            for qv in s.outcomes_for(&sv) {
                let i = s.flat_index(&sv, &qv).unwrap();
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }

    #[test]
    fn rank_matches_float_oracle((cols, rows) in sparse_matrix()) {
        let m = RationalMatrix::from_dense(&to_matrix(&rows));
        let expected = if rows.is_empty() { 0 } else { float_rank(&rows, cols) };
        prop_assert_eq!(rank(&m), expected);
    }

    #[test]
    fn rank_invariant_under_permutation_and_scaling(
        (_, rows) in sparse_matrix(),
        scales in prop::collection::vec(prop_oneof![-5i64..=-1, 1i64..=5], 8),
        seed in any::<u64>(),
    ) {
        let base = rank(&RationalMatrix::from_dense(&to_matrix(&rows)));
        let mut perm: Vec<Vec<i64>> = rows.iter().zip(&scales).map(|(r, &k)| r.iter().map(|x| x * k).collect()).collect();
        let len = perm.len();
        if len > 1 {
            perm.rotate_left((seed as usize) % len);
            perm.swap(0, len - 1);
        }
        prop_assert_eq!(rank(&RationalMatrix::from_dense(&to_matrix(&perm))), base);
    }

    #[test]
    fn stacking_a_matrix_on_itself_keeps_rank((_, rows) in sparse_matrix()) {
        let m = RationalMatrix::from_dense(&to_matrix(&rows));
        if m.nrows() > 0 {
            prop_assert_eq!(rank(&m.stack(&m).unwrap()), rank(&m));
        }
    }

    #[test]
    fn random_aot_points_satisfy_the_aot_system(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2, d in 2usize..=3) {
        let s = Scenario::new(n, m, d).unwrap();
        let p = random_aot_point(s, seed);
        prop_assert_eq!(build_normalization(s).first_violation(&p), None);
        prop_assert_eq!(build_aot(s).first_violation(&p), None);
        prop_assert!(p.values().iter().all(|x| *x >= rational::zero()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kraus_round_trip(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let s = Scenario::new(n, m, 2).unwrap();
        let target = random_aot_point(s, seed).to_f64();
        let kraus = build_kraus(&conditionals_from_joint(&target).unwrap());
        prop_assert!(kraus.completeness_residual() < 1e-12);
        let sim = simulate_all(&kraus).unwrap();
        let err = sim.values().iter().zip(target.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "seed {seed}: error {err}");
    }
}

#[test]
fn mr_vertices_satisfy_no_signaling_in_time_exactly() {
    for (n, m, d) in [(2, 1, 2), (2, 2, 2), (3, 1, 2), (2, 1, 3)] {
        let s = Scenario::new(n, m, d).unwrap();
        let v = enumerate_vertices(s, Model::Macrorealism, DEFAULT_VERTEX_LIMIT).unwrap();
        assert!(vertices_satisfy(&build_nsit(s), &v).satisfied);
        assert!(vertices_satisfy(&build_aot(s), &v).satisfied);
    }
}
