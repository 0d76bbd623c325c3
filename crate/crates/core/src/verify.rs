//! Robust value iteration on interval Markov chains.
//!
//! Nature picks, at every visit of a state, a distribution from the state's
//! interval polytope: the minimizing one for reachability, the maximizing one
//! for expected cost. The inner optimization is the greedy order-based
//! assignment; a brute-force vertex adversary is provided as a test oracle.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Interval, IntervalMarkovChain, SpecKind, Specification};
use crate::polytope::{enumerate_vertices, TransitionPolytope};

pub const RESIDUAL_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100_000;
pub const ORACLE_BUDGET: u128 = 1_000_000;

/// Largest chain for which converged values are polished by an exact solve
/// under the final adversary.
const POLISH_MAX_STATES: usize = 2000;

/// Sweeps between two exact evaluations of the greedy cost adversary.
const ACCELERATION_PERIOD: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustValues {
    /// Worst-case value per state (`f64::INFINITY` for costs of states that
    /// do not reach the goal set almost surely).
    pub values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Sup-norm change of the last sweep.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLimits {
    pub residual: f64,
    pub max_iterations: usize,
}

impl Default for IterationLimits {
    fn default() -> Self {
        Self {
            residual: RESIDUAL_TOL,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Distribution inside the intervals that minimizes (or maximizes) the
/// expectation of `v`: all lower bounds, then the remaining mass poured into
/// successors in ascending (descending) order of value.
pub fn greedy_distribution(succ: &[(usize, Interval)], v: &[f64], minimize: bool) -> Vec<f64> {
    let mut order: Vec<usize> = (0..succ.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (v[succ[i].0], v[succ[j].0]);
        let ord = if minimize { a.total_cmp(&b) } else { b.total_cmp(&a) };
        ord.then(succ[i].0.cmp(&succ[j].0))
    });
    let mut x: Vec<f64> = succ.iter().map(|(_, iv)| iv.lo).collect();
    let mut rest = 1.0 - x.iter().sum::<f64>();
    for i in order {
        if rest <= 0.0 {
            break;
        }
        let add = succ[i].1.width().min(rest);
        x[i] += add;
        rest -= add;
    }
    x
}

pub fn greedy_value(succ: &[(usize, Interval)], v: &[f64], minimize: bool) -> f64 {
    greedy_distribution(succ, v, minimize)
        .iter()
        .zip(succ)
        .map(|(p, &(t, _))| p * v[t])
        .sum()
}

/// States with a path into `targets` in the support graph.
pub fn can_reach(support: &[Vec<usize>], targets: &BTreeSet<usize>) -> Vec<bool> {
    let n = support.len();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, succ) in support.iter().enumerate() {
        for &t in succ {
            pred[t].push(s);
        }
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = targets.iter().copied().collect();
    for &t in targets {
        seen[t] = true;
    }
    while let Some(t) = queue.pop_front() {
        for &s in &pred[t] {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    seen
}

/// States from which `targets` is reached with probability one under every
/// resolution of the intervals. Lower bounds are positive, so the support
/// graph does not depend on nature and this is a graph property: a state
/// qualifies iff it cannot reach a state that cannot reach the targets.
pub fn almost_surely_reaches(support: &[Vec<usize>], targets: &BTreeSet<usize>) -> Vec<bool> {
    let reach = can_reach(support, targets);
    let bad: BTreeSet<usize> = (0..support.len()).filter(|&s| !reach[s]).collect();
    if bad.is_empty() {
        return vec![true; support.len()];
    }
    // Paths through targets stop there.
    let trimmed: Vec<Vec<usize>> = support
        .iter()
        .enumerate()
        .map(|(s, succ)| if targets.contains(&s) { Vec::new() } else { succ.clone() })
        .collect();
    let reaches_bad = can_reach(&trimmed, &bad);
    reaches_bad.iter().map(|b| !b).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Value fixed by the graph analysis.
    Fixed,
    Free,
}

struct Setup {
    roles: Vec<Role>,
    init: Vec<f64>,
    minimize: bool,
    with_cost: bool,
}

fn reach_setup(chain: &IntervalMarkovChain, targets: &BTreeSet<usize>) -> Setup {
    let reach = can_reach(&chain.support(), targets);
    let n = chain.num_states();
    let mut roles = vec![Role::Free; n];
    let mut init = vec![0.0; n];
    for s in 0..n {
        if targets.contains(&s) {
            roles[s] = Role::Fixed;
            init[s] = 1.0;
        } else if !reach[s] {
            roles[s] = Role::Fixed;
        }
    }
    Setup {
        roles,
        init,
        minimize: true,
        with_cost: false,
    }
}

fn cost_setup(chain: &IntervalMarkovChain, goals: &BTreeSet<usize>) -> Setup {
    let sure = almost_surely_reaches(&chain.support(), goals);
    let n = chain.num_states();
    let mut roles = vec![Role::Free; n];
    let mut init = vec![0.0; n];
    for s in 0..n {
        if goals.contains(&s) {
            roles[s] = Role::Fixed;
        } else if !sure[s] {
            roles[s] = Role::Fixed;
            init[s] = f64::INFINITY;
        }
    }
    Setup {
        roles,
        init,
        minimize: false,
        with_cost: true,
    }
}

fn bellman(chain: &IntervalMarkovChain, setup: &Setup, v: &[f64]) -> Vec<f64> {
    (0..chain.num_states())
        .map(|s| match setup.roles[s] {
            Role::Fixed => setup.init[s],
            Role::Free => {
                let e = greedy_value(&chain.transitions[s], v, setup.minimize);
                if setup.with_cost {
                    chain.cost[s] + e
                } else {
                    e.clamp(0.0, 1.0)
                }
            }
        })
        .collect()
}

fn sup_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(x, y)| x.is_finite() || y.is_finite())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One Jacobi sweep of the robust reachability operator (targets 1, states
/// that cannot reach the targets 0).
pub fn reach_step(chain: &IntervalMarkovChain, targets: &BTreeSet<usize>, v: &[f64]) -> Vec<f64> {
    bellman(chain, &reach_setup(chain, targets), v)
}

/// One Jacobi sweep of the robust expected-cost operator.
pub fn cost_step(chain: &IntervalMarkovChain, goals: &BTreeSet<usize>, v: &[f64]) -> Vec<f64> {
    bellman(chain, &cost_setup(chain, goals), v)
}

fn iterate(chain: &IntervalMarkovChain, setup: &Setup, limits: &IterationLimits) -> Result<RobustValues> {
    let mut v = setup.init.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < limits.max_iterations {
        let next = bellman(chain, setup, &v);
        residual = sup_change(&next, &v);
        v = next;
        iterations += 1;
        if residual <= limits.residual {
            break;
        }
        if !setup.minimize && iterations % ACCELERATION_PERIOD == 0 && chain.num_states() <= POLISH_MAX_STATES {
            accelerate(chain, setup, &mut v);
        }
    }
    if residual > limits.residual {
        return Err(Error::Convergence { iterations, residual });
    }
    if chain.num_states() <= POLISH_MAX_STATES {
        if let Some(exact) = polish(chain, setup, &v) {
            v = exact;
        }
    }
    Ok(RobustValues {
        values: v,
        converged: true,
        iterations,
        residual,
    })
}

/// Exact values of the chain under the adversary that is greedy for `v`.
fn greedy_adversary_values(chain: &IntervalMarkovChain, setup: &Setup, v: &[f64]) -> Option<Vec<f64>> {
    let dist: Vec<Vec<(usize, f64)>> = chain
        .transitions
        .iter()
        .map(|succ| {
            greedy_distribution(succ, v, setup.minimize)
                .into_iter()
                .zip(succ)
                .map(|(p, &(t, _))| (t, p))
                .collect()
        })
        .collect();
    let free: Vec<bool> = setup.roles.iter().map(|r| *r == Role::Free).collect();
    let cost = setup.with_cost.then_some(chain.cost.as_slice());
    solve_fixed_adversary(&dist, cost, &free, &setup.init)
}

/// Raises the cost iterate to the values of its greedy adversary. Starting
/// below the fixed point, those values lie between the iterate and the fixed
/// point, so the iterates stay nondecreasing and bounded by the robust cost.
fn accelerate(chain: &IntervalMarkovChain, setup: &Setup, v: &mut [f64]) {
    if let Some(jump) = greedy_adversary_values(chain, setup, v) {
        if jump.iter().all(|x| *x >= 0.0) {
            for (x, j) in v.iter_mut().zip(jump) {
                *x = x.max(j);
            }
        }
    }
}

/// Solves the chain exactly under the adversary that is greedy for `v` and
/// keeps the result only if it is a fixed point of the robust operator.
fn polish(chain: &IntervalMarkovChain, setup: &Setup, v: &[f64]) -> Option<Vec<f64>> {
    let exact = greedy_adversary_values(chain, setup, v)?;
    let check = bellman(chain, setup, &exact);
    let scale = exact.iter().filter(|x| x.is_finite()).fold(1.0f64, |m, x| m.max(x.abs()));
    (sup_change(&check, &exact) <= 1e-11 * scale).then_some(exact)
}

/// Values of a concrete chain: `v_s = r_s + Σ_t P(s,t) v_t` on `free` states,
/// `v_s = fixed[s]` elsewhere (`r = 0` when `cost` is `None`).
pub fn solve_fixed_adversary(
    dist: &[Vec<(usize, f64)>],
    cost: Option<&[f64]>,
    free: &[bool],
    fixed: &[f64],
) -> Option<Vec<f64>> {
    let n = dist.len();
    let index: Vec<Option<usize>> = {
        let mut k = 0;
        free.iter()
            .map(|&f| {
                f.then(|| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let m = free.iter().filter(|f| **f).count();
    if m == 0 {
        return Some(fixed.to_vec());
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for s in 0..n {
        let Some(i) = index[s] else { continue };
        if let Some(c) = cost {
            b[i] += c[s];
        }
        for &(t, p) in &dist[s] {
            match index[t] {
                Some(j) => a[(i, j)] -= p,
                None => {
                    if fixed[t] != 0.0 {
                        b[i] += p * fixed[t];
                    }
                }
            }
        }
    }
    let x = a.lu().solve(&b)?;
    let mut out = fixed.to_vec();
    for s in 0..n {
        if let Some(i) = index[s] {
            if !x[i].is_finite() {
                return None;
            }
            out[s] = x[i];
        }
    }
    Some(out)
}

/// Minimal probability of reaching `targets`, per state.
pub fn robust_reach(chain: &IntervalMarkovChain, targets: &BTreeSet<usize>) -> Result<RobustValues> {
    robust_reach_with(chain, targets, &IterationLimits::default())
}

pub fn robust_reach_with(
    chain: &IntervalMarkovChain,
    targets: &BTreeSet<usize>,
    limits: &IterationLimits,
) -> Result<RobustValues> {
    check_targets(chain, targets)?;
    let mut out = iterate(chain, &reach_setup(chain, targets), limits)?;
    out.values.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    Ok(out)
}

/// Maximal expected cost until `goals`, per state. Fails when the initial
/// state does not reach `goals` almost surely.
pub fn robust_cost(chain: &IntervalMarkovChain, goals: &BTreeSet<usize>) -> Result<RobustValues> {
    robust_cost_with(chain, goals, &IterationLimits::default())
}

pub fn robust_cost_with(
    chain: &IntervalMarkovChain,
    goals: &BTreeSet<usize>,
    limits: &IterationLimits,
) -> Result<RobustValues> {
    check_targets(chain, goals)?;
    let setup = cost_setup(chain, goals);
    if setup.init[chain.initial].is_infinite() {
        return Err(Error::InfiniteCost { state: chain.initial });
    }
    iterate(chain, &setup, limits)
}

fn check_targets(chain: &IntervalMarkovChain, targets: &BTreeSet<usize>) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::InvalidSpec("target set is empty".into()));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= chain.num_states()) {
        return Err(Error::InvalidSpec(format!("target state {t} out of range")));
    }
    Ok(())
}

/// Worst case over all stationary vertex adversaries, found by enumerating
/// every combination of per-state polytope vertices and solving each
/// resulting Markov chain exactly. Only meant for small chains.
pub fn vertex_adversary_oracle(chain: &IntervalMarkovChain, spec: &Specification) -> Result<f64> {
    check_targets(chain, &spec.targets)?;
    let setup = match spec.kind {
        SpecKind::ReachAtLeast => reach_setup(chain, &spec.targets),
        SpecKind::ExpCostAtMost => cost_setup(chain, &spec.targets),
    };
    if setup.roles[chain.initial] == Role::Fixed {
        let v = setup.init[chain.initial];
        if v.is_infinite() {
            return Err(Error::InfiniteCost { state: chain.initial });
        }
        return Ok(v);
    }
    let free: Vec<bool> = setup.roles.iter().map(|r| *r == Role::Free).collect();
    let mut choices: Vec<Vec<Vec<(usize, f64)>>> = Vec::with_capacity(chain.num_states());
    let mut combinations: u128 = 1;
    for (s, succ) in chain.transitions.iter().enumerate() {
        let lower: Vec<f64> = succ.iter().map(|(_, iv)| iv.lo).collect();
        let upper: Vec<f64> = succ.iter().map(|(_, iv)| iv.hi).collect();
        let verts = if free[s] {
            enumerate_vertices(&TransitionPolytope::canonical_form(&lower, &upper)?).vertices
        } else {
            vec![lower]
        };
        combinations = combinations.saturating_mul(verts.len() as u128);
        if combinations > ORACLE_BUDGET {
            return Err(Error::OracleTooLarge {
                combinations,
                budget: ORACLE_BUDGET,
            });
        }
        choices.push(
            verts
                .into_iter()
                .map(|v| succ.iter().zip(v).map(|(&(t, _), p)| (t, p)).collect())
                .collect(),
        );
    }

    let cost = setup.with_cost.then_some(chain.cost.as_slice());
    let mut digits = vec![0usize; choices.len()];
    let mut best: Option<f64> = None;
    loop {
        let dist: Vec<Vec<(usize, f64)>> = digits.iter().zip(&choices).map(|(&d, c)| c[d].clone()).collect();
        if let Some(v) = solve_fixed_adversary(&dist, cost, &free, &setup.init) {
            let x = v[chain.initial];
            best = Some(match best {
                None => x,
                Some(b) if setup.minimize => b.min(x),
                Some(b) => b.max(x),
            });
        }
        // Mixed-radix increment.
        let mut k = 0;
        loop {
            if k == digits.len() {
                return best.ok_or_else(|| Error::InvalidModel("no vertex combination could be solved".into()));
            }
            digits[k] += 1;
            if digits[k] < choices[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecOutcome {
    pub spec: Specification,
    /// Robust value at the initial state.
    pub value: f64,
    pub satisfied: bool,
    pub values: RobustValues,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub satisfied: bool,
    pub outcomes: Vec<SpecOutcome>,
}

/// Robust values for every specification and whether all of them hold at the
/// initial state. An expected cost that is infinite at the initial state
/// counts as a violated specification rather than an error.
pub fn check(chain: &IntervalMarkovChain, specs: &[Specification]) -> Result<Verification> {
    chain.validate()?;
    let mut outcomes = Vec::with_capacity(specs.len());
    for spec in specs {
        spec.validate(chain.num_states())?;
        let values = match spec.kind {
            SpecKind::ReachAtLeast => robust_reach(chain, &spec.targets)?,
            SpecKind::ExpCostAtMost => match robust_cost(chain, &spec.targets) {
                Err(Error::InfiniteCost { .. }) => {
                    let setup = cost_setup(chain, &spec.targets);
                    RobustValues {
                        values: setup.init,
                        converged: true,
                        iterations: 0,
                        residual: 0.0,
                    }
                }
                other => other?,
            },
        };
        let value = values.values[chain.initial];
        outcomes.push(SpecOutcome {
            spec: spec.clone(),
            value,
            satisfied: spec.holds(value),
            values,
        });
    }
    Ok(Verification {
        satisfied: outcomes.iter().all(|o| o.satisfied),
        outcomes,
    })
}
