//! Interval POMDPs, specifications, observation-based policies and the
//! interval Markov chain a policy induces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on distributions and policies.
pub const DIST_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(p: f64) -> Self {
        Self { lo: p, hi: p }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Successor list of one state-action pair (or one chain state).
pub type Successors = Vec<(usize, Interval)>;

fn check_successors(succ: &[(usize, Interval)], num_states: usize, context: &str) -> Result<()> {
    if succ.is_empty() {
        return Err(Error::InvalidModel(format!("{context} has no successors")));
    }
    let mut seen = BTreeSet::new();
    let (mut lo, mut hi) = (0.0, 0.0);
    for &(t, iv) in succ {
        if t >= num_states {
            return Err(Error::InvalidModel(format!("{context}: successor {t} out of range")));
        }
        if !seen.insert(t) {
            return Err(Error::InvalidModel(format!("{context}: successor {t} listed twice")));
        }
        if !(iv.lo > 0.0) {
            return Err(Error::GraphPreservation(format!(
                "{context}: lower bound {} toward {t} must be strictly positive",
                iv.lo
            )));
        }
        if !(iv.lo <= iv.hi && iv.hi <= 1.0) || !iv.hi.is_finite() {
            return Err(Error::InvalidModel(format!(
                "{context}: interval [{}, {}] toward {t} is not a sub-interval of (0, 1]",
                iv.lo, iv.hi
            )));
        }
        lo += iv.lo;
        hi += iv.hi;
    }
    if lo > 1.0 + DIST_TOL || hi < 1.0 - DIST_TOL {
        return Err(Error::InfeasibleUncertainty {
            context: context.to_string(),
            lower_sum: lo,
            upper_sum: hi,
        });
    }
    Ok(())
}

/// Interval POMDP with a deterministic observation function. Every state has
/// the same `num_actions` actions available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalPomdp {
    pub num_states: usize,
    pub num_actions: usize,
    pub num_observations: usize,
    pub initial: usize,
    /// `transitions[s][a]` lists the successors of `(s, a)`.
    pub transitions: Vec<Vec<Successors>>,
    /// `cost[s][a] >= 0`.
    pub cost: Vec<Vec<f64>>,
    /// `observation[s]` is the observation of state `s`.
    pub observation: Vec<usize>,
    /// Named target set for reachability specifications (`@target`).
    pub targets: BTreeSet<usize>,
    /// Named goal set for expected-cost specifications (`@goal`).
    pub goals: BTreeSet<usize>,
}

impl IntervalPomdp {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_states;
        if n == 0 || self.num_actions == 0 || self.num_observations == 0 {
            return Err(Error::InvalidModel("states, actions and observations must be nonempty".into()));
        }
        if self.initial >= n {
            return Err(Error::InvalidModel(format!("initial state {} out of range", self.initial)));
        }
        if self.transitions.len() != n || self.cost.len() != n || self.observation.len() != n {
            return Err(Error::InvalidModel("per-state tables do not match the state count".into()));
        }
        for s in 0..n {
            if self.transitions[s].len() != self.num_actions || self.cost[s].len() != self.num_actions {
                return Err(Error::InvalidModel(format!(
                    "state {s} does not define all {} actions",
                    self.num_actions
                )));
            }
            for a in 0..self.num_actions {
                check_successors(&self.transitions[s][a], n, &format!("state {s}, action {a}"))?;
                let r = self.cost[s][a];
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::InvalidModel(format!("state {s}, action {a}: cost {r} must be >= 0")));
                }
            }
            if self.observation[s] >= self.num_observations {
                return Err(Error::InvalidModel(format!(
                    "state {s}: observation {} out of range",
                    self.observation[s]
                )));
            }
        }
        for &t in self.targets.iter().chain(&self.goals) {
            if t >= n {
                return Err(Error::InvalidModel(format!("labelled state {t} out of range")));
            }
        }
        Ok(())
    }

    /// True when every interval is a point.
    pub fn is_nominal(&self) -> bool {
        self.transitions.iter().flatten().flatten().all(|(_, iv)| iv.is_point())
    }

    /// States carrying observation `z`.
    pub fn states_with_observation(&self, z: usize) -> Vec<usize> {
        (0..self.num_states).filter(|&s| self.observation[s] == z).collect()
    }

    /// Concrete model choosing `choice[s][a][k]` for the `k`-th successor of
    /// `(s, a)`; the result has point intervals everywhere.
    pub fn instantiate(&self, choice: &[Vec<Vec<f64>>]) -> Result<IntervalPomdp> {
        let mut out = self.clone();
        if choice.len() != self.num_states {
            return Err(Error::InvalidInstantiation("choice does not cover every state".into()));
        }
        for (s, row) in choice.iter().enumerate() {
            if row.len() != self.num_actions {
                return Err(Error::InvalidInstantiation(format!("state {s}: choice does not cover every action")));
            }
            for (a, values) in row.iter().enumerate() {
                out.transitions[s][a] = instantiate_successors(&self.transitions[s][a], values, &format!("({s}, {a})"))?;
            }
        }
        Ok(out)
    }
}

fn instantiate_successors(succ: &[(usize, Interval)], values: &[f64], context: &str) -> Result<Successors> {
    if values.len() != succ.len() {
        return Err(Error::InvalidInstantiation(format!(
            "{context}: {} values for {} successors",
            values.len(),
            succ.len()
        )));
    }
    let mut total = 0.0;
    let mut out = Vec::with_capacity(succ.len());
    for (&(t, iv), &p) in succ.iter().zip(values) {
        if !iv.contains(p) {
            return Err(Error::InvalidInstantiation(format!(
                "{context}: value {p} toward {t} lies outside [{}, {}]",
                iv.lo, iv.hi
            )));
        }
        total += p;
        out.push((t, Interval::point(p)));
    }
    if (total - 1.0).abs() > DIST_TOL {
        return Err(Error::InvalidInstantiation(format!("{context}: values sum to {total}")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecKind {
    /// Probability of reaching the target set is at least the threshold.
    ReachAtLeast,
    /// Expected cost until the goal set is at most the threshold.
    ExpCostAtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Specification {
    pub kind: SpecKind,
    pub threshold: f64,
    pub targets: BTreeSet<usize>,
}

impl Specification {
    pub fn reach(threshold: f64, targets: impl IntoIterator<Item = usize>) -> Self {
        Self {
            kind: SpecKind::ReachAtLeast,
            threshold,
            targets: targets.into_iter().collect(),
        }
    }

    pub fn cost(threshold: f64, goals: impl IntoIterator<Item = usize>) -> Self {
        Self {
            kind: SpecKind::ExpCostAtMost,
            threshold,
            targets: goals.into_iter().collect(),
        }
    }

    pub fn validate(&self, num_states: usize) -> Result<()> {
        match self.kind {
            SpecKind::ReachAtLeast if !(0.0..=1.0).contains(&self.threshold) => {
                return Err(Error::InvalidSpec(format!(
                    "reachability threshold {} outside [0, 1]",
                    self.threshold
                )))
            }
            SpecKind::ExpCostAtMost if !(self.threshold >= 0.0 && self.threshold.is_finite()) => {
                return Err(Error::InvalidSpec(format!("cost threshold {} must be >= 0", self.threshold)))
            }
            _ => {}
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidSpec("target set is empty".into()));
        }
        if let Some(&t) = self.targets.iter().find(|&&t| t >= num_states) {
            return Err(Error::InvalidSpec(format!("target state {t} out of range")));
        }
        Ok(())
    }

    /// Whether `value` (the robust value at the initial state) meets the threshold.
    pub fn holds(&self, value: f64) -> bool {
        match self.kind {
            SpecKind::ReachAtLeast => value >= self.threshold,
            SpecKind::ExpCostAtMost => value <= self.threshold,
        }
    }
}

/// Memoryless randomized policy over observations: `probs[z][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub probs: Vec<Vec<f64>>,
}

impl Policy {
    pub fn uniform(num_observations: usize, num_actions: usize) -> Self {
        Self {
            probs: vec![vec![1.0 / num_actions as f64; num_actions]; num_observations],
        }
    }

    pub fn validate(&self, num_observations: usize, num_actions: usize) -> Result<()> {
        if self.probs.len() < num_observations {
            return Err(Error::InvalidPolicy(format!(
                "policy covers {} observations, model has {num_observations}",
                self.probs.len()
            )));
        }
        for (z, row) in self.probs.iter().enumerate().take(num_observations) {
            if row.len() != num_actions {
                return Err(Error::InvalidPolicy(format!(
                    "observation {z}: {} action probabilities for {num_actions} actions",
                    row.len()
                )));
            }
            if let Some(a) = row.iter().position(|&p| !(p > 0.0)) {
                return Err(Error::GraphPreservation(format!(
                    "observation {z}, action {a}: probability {} must be strictly positive",
                    row[a]
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > DIST_TOL {
                return Err(Error::InvalidPolicy(format!("observation {z}: probabilities sum to {total}")));
            }
        }
        Ok(())
    }

    /// Action distribution used in state `s`.
    pub fn at_state<'a>(&'a self, model: &IntervalPomdp, s: usize) -> &'a [f64] {
        &self.probs[model.observation[s]]
    }
}

/// Interval Markov chain: the result of fixing a policy in an interval POMDP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMarkovChain {
    pub initial: usize,
    pub transitions: Vec<Successors>,
    pub cost: Vec<f64>,
}

impl IntervalMarkovChain {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_states();
        if self.initial >= n || self.cost.len() != n {
            return Err(Error::InvalidModel("chain tables inconsistent".into()));
        }
        for (s, succ) in self.transitions.iter().enumerate() {
            check_successors(succ, n, &format!("chain state {s}"))?;
            if !(self.cost[s] >= 0.0 && self.cost[s].is_finite()) {
                return Err(Error::InvalidModel(format!("chain state {s}: cost {} must be >= 0", self.cost[s])));
            }
        }
        Ok(())
    }

    pub fn is_nominal(&self) -> bool {
        self.transitions.iter().flatten().all(|(_, iv)| iv.is_point())
    }

    /// Concrete chain choosing `choice[s][k]` for the `k`-th successor of `s`.
    pub fn instantiate(&self, choice: &[Vec<f64>]) -> Result<IntervalMarkovChain> {
        if choice.len() != self.num_states() {
            return Err(Error::InvalidInstantiation("choice does not cover every state".into()));
        }
        let transitions = self
            .transitions
            .iter()
            .zip(choice)
            .enumerate()
            .map(|(s, (succ, values))| instantiate_successors(succ, values, &format!("chain state {s}")))
            .collect::<Result<_>>()?;
        Ok(IntervalMarkovChain {
            initial: self.initial,
            transitions,
            cost: self.cost.clone(),
        })
    }

    /// Successor sets in the support graph.
    pub fn support(&self) -> Vec<Vec<usize>> {
        self.transitions.iter().map(|succ| succ.iter().map(|&(t, _)| t).collect()).collect()
    }
}

/// The chain obtained by resolving actions with `policy`: the interval toward
/// `s'` is `[Σ_a σ(a)·lo(s,a,s'), Σ_a σ(a)·hi(s,a,s')]` and the cost is
/// `Σ_a σ(a)·r(s,a)`.
pub fn induce_chain(model: &IntervalPomdp, policy: &Policy) -> Result<IntervalMarkovChain> {
    policy.validate(model.num_observations, model.num_actions)?;
    let mut transitions = Vec::with_capacity(model.num_states);
    let mut cost = Vec::with_capacity(model.num_states);
    for s in 0..model.num_states {
        let sigma = policy.at_state(model, s);
        let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        let mut r = 0.0;
        for (a, &p) in sigma.iter().enumerate() {
            for &(t, iv) in &model.transitions[s][a] {
                let e = acc.entry(t).or_insert((0.0, 0.0));
                e.0 += p * iv.lo;
                e.1 += p * iv.hi;
            }
            r += p * model.cost[s][a];
        }
        transitions.push(acc.into_iter().map(|(t, (lo, hi))| (t, Interval::new(lo.min(1.0), hi.min(1.0)))).collect());
        cost.push(r);
    }
    Ok(IntervalMarkovChain {
        initial: model.initial,
        transitions,
        cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_action_model() -> IntervalPomdp {
        IntervalPomdp {
            num_states: 3,
            num_actions: 2,
            num_observations: 1,
            initial: 0,
            transitions: vec![
                vec![
                    vec![(1, Interval::point(0.5)), (2, Interval::point(0.5))],
                    vec![(2, Interval::point(1.0))],
                ],
                vec![vec![(1, Interval::point(1.0))]; 2],
                vec![vec![(2, Interval::point(1.0))]; 2],
            ],
            cost: vec![vec![1.0, 3.0], vec![0.0; 2], vec![0.0; 2]],
            observation: vec![0; 3],
            targets: [1].into(),
            goals: [2].into(),
        }
    }

    #[test]
    fn mixing_point_distributions() {
        let m = two_action_model();
        m.validate().unwrap();
        let chain = induce_chain(&m, &Policy::uniform(1, 2)).unwrap();
        assert_eq!(chain.transitions[0], vec![(1, Interval::point(0.25)), (2, Interval::point(0.75))]);
        assert_eq!(chain.cost[0], 2.0);
        chain.validate().unwrap();
    }

    #[test]
    fn single_action_chain_is_verbatim() {
        let mut m = two_action_model();
        m.num_actions = 1;
        for s in 0..3 {
            m.transitions[s].truncate(1);
            m.cost[s].truncate(1);
        }
        m.transitions[0][0] = vec![(1, Interval::new(0.3, 0.7)), (2, Interval::new(0.3, 0.7))];
        let chain = induce_chain(&m, &Policy::uniform(1, 1)).unwrap();
        for s in 0..3 {
            assert_eq!(chain.transitions[s], m.transitions[s][0]);
        }
    }

    #[test]
    fn policy_errors() {
        let m = two_action_model();
        let short = Policy { probs: vec![] };
        assert!(matches!(induce_chain(&m, &short), Err(Error::InvalidPolicy(_))));
        let zero = Policy {
            probs: vec![vec![1.0, 0.0]],
        };
        assert!(matches!(induce_chain(&m, &zero), Err(Error::GraphPreservation(_))));
    }

    #[test]
    fn instantiation_bounds() {
        let succ = vec![(0, Interval::new(0.3, 0.7)), (1, Interval::new(0.3, 0.7))];
        assert!(instantiate_successors(&succ, &[0.4, 0.6], "t").is_ok());
        assert!(matches!(
            instantiate_successors(&succ, &[0.2, 0.8], "t"),
            Err(Error::InvalidInstantiation(_))
        ));
        assert!(matches!(
            instantiate_successors(&succ, &[0.4, 0.5], "t"),
            Err(Error::InvalidInstantiation(_))
        ));
    }

    #[test]
    fn validation_rejects_bad_intervals() {
        let mut m = two_action_model();
        m.transitions[1][0] = vec![(1, Interval::new(0.0, 1.0))];
        assert!(matches!(m.validate(), Err(Error::GraphPreservation(_))));
        let mut m = two_action_model();
        m.transitions[1][0] = vec![(1, Interval::new(0.6, 0.9)), (2, Interval::new(0.6, 0.9))];
        assert!(matches!(m.validate(), Err(Error::InfeasibleUncertainty { .. })));
    }

    #[test]
    fn spec_thresholds() {
        assert!(Specification::reach(1.01, [0]).validate(1).is_err());
        assert!(Specification::cost(-1.0, [0]).validate(1).is_err());
        assert!(Specification::reach(0.5, []).validate(1).is_err());
        assert!(Specification::reach(0.5, [3]).validate(1).is_err());
        assert!(Specification::cost(4.0, [0]).validate(1).is_ok());
    }
}
