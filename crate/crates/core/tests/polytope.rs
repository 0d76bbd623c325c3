mod common;

use common::{exhaustive_vertices, random_intervals, same_point_set};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use upsynth::polytope::{enumerate_vertices, vertex_count_bound, TransitionPolytope};
use upsynth_conic::{solve_qcqp, ConvexQcqp, LinearForm, QcqpConstraint, Settings, SolveStatus};

#[test]
fn cube_slice_gives_the_six_permutations() {
    let p = TransitionPolytope::canonical_form(&[0.1; 3], &[0.5; 3]).unwrap();
    let v = enumerate_vertices(&p).vertices;
    let perms: Vec<Vec<f64>> = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
        .iter()
        .map(|perm| perm.iter().map(|&i| [0.1, 0.4, 0.5][i]).collect())
        .collect();
    assert_eq!(v.len(), 6);
    assert!(same_point_set(&v, &perms, 1e-12));
}

#[test]
fn matches_bound_assignment_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..600 {
        let n = rng.random_range(1..=5);
        let (lo, hi) = random_intervals(&mut rng, n);
        let p = TransitionPolytope::canonical_form(&lo, &hi).unwrap();
        let got = enumerate_vertices(&p).vertices;
        let want = exhaustive_vertices(&lo, &hi);
        assert!(same_point_set(&got, &want, 1e-9), "lo {lo:?} hi {hi:?}\n got {got:?}\nwant {want:?}");
        assert!(got.len() as u128 <= vertex_count_bound(n));
    }
}

#[test]
fn full_simplex_has_unit_vectors_as_vertices() {
    // Lower bounds tiny, upper bounds 1: vertices sit next to the unit vectors.
    let n = 4;
    let p = TransitionPolytope::canonical_form(&vec![1e-6; n], &vec![1.0; n]).unwrap();
    let v = enumerate_vertices(&p).vertices;
    assert_eq!(v.len(), n);
    for x in v {
        assert!(x.iter().filter(|&&c| c > 0.5).count() == 1);
    }
}

/// Is `x` a convex combination of `vertices`? Decided by a feasibility LP.
fn in_hull(vertices: &[Vec<f64>], x: &[f64]) -> bool {
    let k = vertices.len();
    let mut q = ConvexQcqp::new(k);
    q.push(QcqpConstraint::eq(LinearForm::from_terms((0..k).map(|j| (j, 1.0))), -1.0));
    for i in 0..x.len() {
        q.push(QcqpConstraint::eq(
            LinearForm::from_terms((0..k).map(|j| (j, vertices[j][i]))),
            -x[i],
        ));
    }
    for j in 0..k {
        q.bound(j, Some(0.0), None);
    }
    let report = solve_qcqp(&q, &Settings::default()).unwrap();
    match report.status {
        SolveStatus::Optimal => true,
        SolveStatus::Infeasible => false,
        other => panic!("unexpected status {other:?}"),
    }
}

#[test]
fn polytope_points_lie_in_the_vertex_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..60 {
        let n = rng.random_range(2..=4);
        let (lo, hi) = random_intervals(&mut rng, n);
        let p = TransitionPolytope::canonical_form(&lo, &hi).unwrap();
        let v = enumerate_vertices(&p).vertices;
        // A random convex combination of box corners projected onto the
        // simplex slice stays in the polytope.
        let w: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| b - a).collect();
        let total: f64 = w.iter().sum();
        let rest = 1.0 - lo.iter().sum::<f64>();
        if total <= 1e-12 {
            continue;
        }
        let t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut x: Vec<f64> = (0..n).map(|i| lo[i] + w[i] * rest / total).collect();
        // Move mass between two coordinates while staying inside the bounds.
        let (i, j) = (0, 1);
        let room = (hi[i] - x[i]).min(x[j] - lo[j]);
        x[i] += t[0] * room;
        x[j] -= t[0] * room;
        assert!(p.contains(&x, 1e-12));
        assert!(in_hull(&v, &x), "{x:?} not in hull of {v:?}");
    }
}

#[test]
fn points_outside_are_not_in_the_hull() {
    let p = TransitionPolytope::canonical_form(&[0.2, 0.2, 0.2], &[0.5, 0.5, 0.5]).unwrap();
    let v = enumerate_vertices(&p).vertices;
    assert!(!in_hull(&v, &[0.6, 0.2, 0.2]));
    assert!(in_hull(&v, &[0.4, 0.3, 0.3]));
}

proptest! {
    #[test]
    fn vertices_are_feasible_distributions(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = random_intervals(&mut rng, n);
        let p = TransitionPolytope::canonical_form(&lo, &hi).unwrap();
        let v = enumerate_vertices(&p).vertices;
        prop_assert!(!v.is_empty());
        for x in &v {
            prop_assert!(p.contains(x, 1e-12));
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let off_bound = x.iter().zip(lo.iter().zip(&hi))
                .filter(|(c, (a, b))| (*c - *a).abs() > 1e-10 && (*c - *b).abs() > 1e-10)
                .count();
            prop_assert!(off_bound <= 1);
        }
        for (i, a) in v.iter().enumerate() {
            for b in &v[i + 1..] {
                prop_assert!(a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-10));
            }
        }
    }

    #[test]
    fn canonical_rows_encode_bounds(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = random_intervals(&mut rng, n);
        let p = TransitionPolytope::canonical_form(&lo, &hi).unwrap();
        prop_assert_eq!(p.a.len(), 2 * n + 2);
        prop_assert_eq!(p.c.len(), 2 * n + 2);
        let mut outside = lo.clone();
        outside[0] -= 1e-3;
        prop_assert!(!p.contains(&outside, 1e-9));
    }
}
