mod common;

use common::exact_reach;
use upsynth::model::{induce_chain, Interval, IntervalPomdp, Policy, Specification};
use upsynth::synth::{build_program, run_ccp, CcpParams, LinearizationPoint, ObjectiveChoice, SynthesisStatus};
use upsynth::verify::check;
use upsynth_conic::{solve_qcqp, Settings, SolveStatus};

fn absorbing(s: usize, na: usize) -> Vec<Vec<(usize, Interval)>> {
    vec![vec![(s, Interval::point(1.0))]; na]
}

/// State 0 with a two-vertex action and a three-vertex action; 1 is the
/// target, 2 a sink.
fn two_by_three() -> IntervalPomdp {
    IntervalPomdp {
        num_states: 3,
        num_actions: 2,
        num_observations: 2,
        initial: 0,
        transitions: vec![
            vec![
                vec![(1, Interval::new(0.3, 0.7)), (2, Interval::new(0.3, 0.7))],
                vec![
                    (0, Interval::new(0.1, 0.8)),
                    (1, Interval::new(0.1, 0.8)),
                    (2, Interval::new(0.1, 0.8)),
                ],
            ],
            absorbing(1, 2),
            absorbing(2, 2),
        ],
        cost: vec![vec![1.0, 1.0], vec![0.0; 2], vec![0.0; 2]],
        observation: vec![0, 1, 1],
        targets: [1].into(),
        goals: [1].into(),
    }
}

#[test]
fn constraint_count_is_the_vertex_product() {
    let m = two_by_three();
    let specs = [Specification::reach(0.5, [1])];
    let p = build_program(&m, &specs, ObjectiveChoice::Auto, 1e-4, 4096).unwrap();
    assert_eq!(p.robust_constraint_count(), 6);
    assert_eq!(p.vertex_stats(), (5, 3));
    // Two policy entries for observation 0, one value and one penalty for state 0.
    assert_eq!(p.num_policy_vars(), 2);
    assert_eq!(p.num_vars, 4);
    assert!(p.sigma[1].iter().all(|v| v.is_none()));

    let point = LinearizationPoint {
        sigma: Policy::uniform(2, 2),
        values: vec![vec![0.3, 1.0, 0.0]],
    };
    let q = p.instantiate_robust(&point, 1.0).unwrap();
    assert_eq!(q.quadratic_constraint_count(), 6);
}

/// Fully observable two-state MDP with point probabilities: 2 target, 3 sink.
fn small_mdp() -> IntervalPomdp {
    let pt = Interval::point;
    IntervalPomdp {
        num_states: 4,
        num_actions: 2,
        num_observations: 4,
        initial: 0,
        transitions: vec![
            vec![
                vec![(1, pt(0.6)), (3, pt(0.4))],
                vec![(0, pt(0.4)), (2, pt(0.4)), (3, pt(0.2))],
            ],
            vec![
                vec![(2, pt(0.7)), (3, pt(0.3))],
                vec![(0, pt(0.5)), (2, pt(0.3)), (3, pt(0.2))],
            ],
            absorbing(2, 2),
            absorbing(3, 2),
        ],
        cost: vec![vec![1.0; 2]; 4],
        observation: vec![0, 1, 2, 3],
        targets: [2].into(),
        goals: [2].into(),
    }
}

/// Best reachability over the four deterministic policies.
fn enumerated_optimum(m: &IntervalPomdp) -> f64 {
    let mut best: f64 = 0.0;
    for a0 in 0..2 {
        for a1 in 0..2 {
            let dist: Vec<Vec<(usize, f64)>> = (0..m.num_states)
                .map(|s| {
                    let a = [a0, a1, 0, 0][s];
                    m.transitions[s][a].iter().map(|&(t, iv)| (t, iv.lo)).collect()
                })
                .collect();
            best = best.max(exact_reach(&dist, &m.targets)[0]);
        }
    }
    best
}

#[test]
fn reaches_the_enumerated_optimum() {
    let m = small_mdp();
    let opt = enumerated_optimum(&m);
    assert!(opt > 0.5 && opt < 1.0, "{opt}");
    let r = run_ccp(&m, &[Specification::reach(opt - 1e-3, [2])], &CcpParams::default()).unwrap();
    assert_eq!(r.status, SynthesisStatus::Certified);
    assert!(r.verification.outcomes[0].value <= opt + 1e-9);

    let params = CcpParams {
        max_iters: 30,
        restarts: 1,
        ..CcpParams::default()
    };
    let r = run_ccp(&m, &[Specification::reach(opt + 1e-3, [2])], &params).unwrap();
    assert_eq!(r.status, SynthesisStatus::Infeasible);
    assert!(r.verification.outcomes[0].value <= opt + 1e-9);
    assert!(r.verification.outcomes[0].value > opt - 1e-2);
}

#[test]
fn optimal_penalty_does_not_grow_with_tau() {
    let m = small_mdp();
    let specs = [Specification::reach(0.99, [2])];
    let p = build_program(&m, &specs, ObjectiveChoice::Auto, 1e-4, 4096).unwrap();
    let uniform = Policy::uniform(4, 2);
    let v = check(&induce_chain(&m, &uniform).unwrap(), &specs).unwrap();
    let point = LinearizationPoint {
        sigma: uniform,
        values: vec![v.outcomes[0].values.values.clone()],
    };
    let mut last = f64::INFINITY;
    for tau in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        let report = solve_qcqp(&p.instantiate_robust(&point, tau).unwrap(), &Settings::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        let pen = p.penalty_sum(&report.x);
        assert!(pen <= last + 1e-6, "tau {tau}: {pen} > {last}");
        last = pen;
    }
}

#[test]
fn forced_policy_needs_no_iterations() {
    let mut m = small_mdp();
    m.num_actions = 1;
    for row in &mut m.transitions {
        row.truncate(1);
    }
    for row in &mut m.cost {
        row.truncate(1);
    }
    // The only policy reaches the target with 0.6 · 0.7.
    let ok = run_ccp(&m, &[Specification::reach(0.4, [2])], &CcpParams::default()).unwrap();
    assert_eq!(ok.status, SynthesisStatus::Certified);
    assert_eq!(ok.trace.total_iterations(), 0);
    assert!((ok.verification.outcomes[0].value - 0.42).abs() < 1e-12);
    let no = run_ccp(&m, &[Specification::reach(0.5, [2])], &CcpParams::default()).unwrap();
    assert_eq!(no.status, SynthesisStatus::Infeasible);
    assert_eq!(no.num_policy_vars, 0);
}

#[test]
fn unreachable_target_is_blocked_up_front() {
    // State 4 has no incoming transitions.
    let mut m = small_mdp();
    m.num_states = 5;
    m.transitions.push(absorbing(4, 2));
    m.cost.push(vec![0.0; 2]);
    m.observation.push(3);
    let r = run_ccp(&m, &[Specification::reach(0.1, [4])], &CcpParams::default()).unwrap();
    assert_eq!(r.status, SynthesisStatus::Infeasible);
    assert!(!r.blocked.is_empty());
    assert_eq!(r.trace.total_iterations(), 0);
}

#[test]
fn certified_results_survive_fresh_verification() {
    let m = two_by_three();
    for lambda in [0.3, 0.5, 0.6] {
        let specs = [Specification::reach(lambda, [1]), Specification::cost(10.0, [1, 2])];
        let r = run_ccp(&m, &specs, &CcpParams::default()).unwrap();
        if r.status == SynthesisStatus::Certified {
            let fresh = check(&induce_chain(&m, &r.policy).unwrap(), &specs).unwrap();
            assert!(fresh.satisfied);
            for o in &fresh.outcomes {
                assert!(o.values.residual <= 1e-8);
            }
        }
    }
}

#[test]
fn same_seed_same_result() {
    let m = small_mdp();
    let specs = [Specification::reach(0.99, [2])];
    let params = CcpParams {
        max_iters: 15,
        restarts: 2,
        seed: 42,
        ..CcpParams::default()
    };
    let a = run_ccp(&m, &specs, &params).unwrap();
    let b = run_ccp(&m, &specs, &params).unwrap();
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.trace.verified_value, b.trace.verified_value);
    assert_eq!(a.trace.iterations_per_restart, b.trace.iterations_per_restart);
    assert_eq!(a.trace.tau, b.trace.tau);
    assert_eq!(a.trace.penalty, b.trace.penalty);
}

#[test]
fn tau_follows_the_additive_schedule() {
    let m = small_mdp();
    let params = CcpParams {
        max_iters: 8,
        restarts: 0,
        tau0: 0.5,
        mu: 3.0,
        tau_max: 7.0,
        stagnation_window: 0,
        ..CcpParams::default()
    };
    let r = run_ccp(&m, &[Specification::reach(0.99, [2])], &params).unwrap();
    let expect: Vec<f64> = [0.5, 3.5, 6.5, 7.0, 7.0, 7.0, 7.0, 7.0][..r.trace.tau.len()].to_vec();
    assert_eq!(r.trace.tau, expect);
}
