//! Oracles and random instances shared by the integration tests. Nothing here
//! calls into the solver under test except to build its input types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use upsynth::model::{Interval, IntervalMarkovChain, IntervalPomdp};

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        assert!(a[col][col].abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Every point with all coordinates on a bound except possibly one, which
/// takes the remaining mass; deduplicated at `1e-9`.
pub fn exhaustive_vertices(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    let mut out: Vec<Vec<f64>> = Vec::new();
    for free in 0..n {
        for mask in 0u32..(1 << n) {
            let mut x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
            let rest: f64 = (0..n).filter(|&i| i != free).map(|i| x[i]).sum();
            x[free] = 1.0 - rest;
            if x[free] < lo[free] - 1e-12 || x[free] > hi[free] + 1e-12 {
                continue;
            }
            if !out.iter().any(|v| close(v, &x, 1e-9)) {
                out.push(x);
            }
        }
    }
    out
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

pub fn same_point_set(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.iter().all(|x| b.iter().any(|y| close(x, y, tol))) && b.iter().all(|y| a.iter().any(|x| close(x, y, tol)))
}

/// Random nonempty interval vector with positive lower bounds containing a
/// distribution; roughly one in five is a point distribution.
pub fn random_intervals(rng: &mut impl Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    if rng.random_bool(0.2) {
        return (p.clone(), p);
    }
    let lo = p.iter().map(|&x| x * rng.random_range(0.2..1.0)).collect();
    let hi = p.iter().map(|&x| (x + rng.random_range(0.0..0.4)).min(1.0)).collect();
    (lo, hi)
}

pub fn random_point_distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn random_successors(rng: &mut impl Rng, n: usize, max_succ: usize) -> Vec<usize> {
    let k = rng.random_range(1..=max_succ.min(n));
    let mut set = BTreeSet::new();
    while set.len() < k {
        set.insert(rng.random_range(0..n));
    }
    set.into_iter().collect()
}

/// Random interval chain with `2..=max_states` states and at most `max_succ`
/// successors per state; some states are absorbing.
pub fn random_chain(rng: &mut impl Rng, max_states: usize, max_succ: usize, point: bool) -> IntervalMarkovChain {
    let n = rng.random_range(2..=max_states);
    let transitions = (0..n)
        .map(|s| {
            if rng.random_bool(0.2) {
                return vec![(s, Interval::point(1.0))];
            }
            let succ = random_successors(rng, n, max_succ);
            let (lo, hi) = if point {
                let p = random_point_distribution(rng, succ.len());
                (p.clone(), p)
            } else {
                random_intervals(rng, succ.len())
            };
            succ.into_iter().zip(lo.into_iter().zip(hi)).map(|(t, (l, h))| (t, Interval::new(l, h))).collect()
        })
        .collect();
    let cost = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    IntervalMarkovChain {
        initial: 0,
        transitions,
        cost,
    }
}

/// Random interval POMDP whose actions all have valid interval rows.
pub fn random_pomdp(rng: &mut impl Rng, max_states: usize, max_actions: usize, max_succ: usize) -> IntervalPomdp {
    let n = rng.random_range(2..=max_states);
    let na = rng.random_range(1..=max_actions);
    let nz = rng.random_range(1..=n);
    let transitions = (0..n)
        .map(|_| {
            (0..na)
                .map(|_| {
                    let succ = random_successors(rng, n, max_succ);
                    let (lo, hi) = random_intervals(rng, succ.len());
                    succ.into_iter().zip(lo.into_iter().zip(hi)).map(|(t, (l, h))| (t, Interval::new(l, h))).collect()
                })
                .collect()
        })
        .collect();
    let mut observation: Vec<usize> = (0..n).map(|_| rng.random_range(0..nz)).collect();
    // Every observation is used.
    for z in 0..nz {
        observation[z] = z;
    }
    IntervalPomdp {
        num_states: n,
        num_actions: na,
        num_observations: nz,
        initial: 0,
        transitions,
        cost: (0..n).map(|_| (0..na).map(|_| rng.random_range(0.0..2.0)).collect()).collect(),
        observation,
        targets: [n - 1].into(),
        goals: [n - 1].into(),
    }
}

/// Backward reachability in the graph `succ`.
pub fn reaches(succ: &[Vec<usize>], targets: &BTreeSet<usize>) -> Vec<bool> {
    let n = succ.len();
    let mut yes: Vec<bool> = (0..n).map(|s| targets.contains(&s)).collect();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !yes[s] && succ[s].iter().any(|&t| yes[t]) {
                yes[s] = true;
                changed = true;
            }
        }
        if !changed {
            return yes;
        }
    }
}

pub fn support(dist: &[Vec<(usize, f64)>]) -> Vec<Vec<usize>> {
    dist.iter().map(|row| row.iter().filter(|(_, p)| *p > 0.0).map(|&(t, _)| t).collect()).collect()
}

/// Reachability probabilities of a concrete chain by a linear solve.
pub fn exact_reach(dist: &[Vec<(usize, f64)>], targets: &BTreeSet<usize>) -> Vec<f64> {
    let n = dist.len();
    let can = reaches(&support(dist), targets);
    let unknown: Vec<usize> = (0..n).filter(|&s| can[s] && !targets.contains(&s)).collect();
    let idx = |s: usize| unknown.iter().position(|&u| u == s);
    let m = unknown.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] += 1.0;
        for &(t, p) in &dist[s] {
            if targets.contains(&t) {
                b[i] += p;
            } else if let Some(j) = idx(t) {
                a[i][j] -= p;
            }
        }
    }
    let x = if m > 0 { dense_solve(a, b) } else { Vec::new() };
    (0..n)
        .map(|s| {
            if targets.contains(&s) {
                1.0
            } else {
                idx(s).map_or(0.0, |i| x[i])
            }
        })
        .collect()
}

/// Expected cost until `goals` of a concrete chain by a linear solve;
/// infinite where the goals are not reached almost surely.
pub fn exact_cost(dist: &[Vec<(usize, f64)>], cost: &[f64], goals: &BTreeSet<usize>) -> Vec<f64> {
    let n = dist.len();
    let sup = support(dist);
    let can = reaches(&sup, goals);
    let bad: BTreeSet<usize> = (0..n).filter(|&s| !can[s]).collect();
    let trimmed: Vec<Vec<usize>> = (0..n).map(|s| if goals.contains(&s) { Vec::new() } else { sup[s].clone() }).collect();
    let risky = if bad.is_empty() { vec![false; n] } else { reaches(&trimmed, &bad) };
    let unknown: Vec<usize> = (0..n).filter(|&s| !goals.contains(&s) && !risky[s]).collect();
    let idx = |s: usize| unknown.iter().position(|&u| u == s);
    let m = unknown.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] += 1.0;
        b[i] = cost[s];
        for &(t, p) in &dist[s] {
            if let Some(j) = idx(t) {
                a[i][j] -= p;
            }
        }
    }
    let x = if m > 0 { dense_solve(a, b) } else { Vec::new() };
    (0..n)
        .map(|s| {
            if goals.contains(&s) {
                0.0
            } else if risky[s] {
                f64::INFINITY
            } else {
                x[idx(s).unwrap()]
            }
        })
        .collect()
}

/// Point chain as a distribution table.
pub fn point_distributions(chain: &IntervalMarkovChain) -> Vec<Vec<(usize, f64)>> {
    chain.transitions.iter().map(|row| row.iter().map(|&(t, iv)| (t, iv.lo)).collect()).collect()
}
