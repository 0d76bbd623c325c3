//! Variable layout of the synthesis program and its finite convex
//! instantiation around a linearization point.
//!
//! For every specification there is one family of value variables (`p_s` for
//! reachability, `c_s` for expected cost) over the states that are reachable
//! from the initial state and whose value is not settled by graph analysis.
//! Every such state gets one penalty variable and one robust Bellman
//! constraint per combination of polytope vertices across its actions. Policy
//! variables exist per observation, so states sharing an observation share
//! their action distribution by construction.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use upsynth_conic::{ConvexQcqp, LinearForm, QcqpConstraint, QuadAtom};

use crate::error::{Error, Result};
use crate::model::{IntervalPomdp, Policy, SpecKind, Specification};
use crate::polytope::{enumerate_vertices_with_budget, TransitionPolytope};
use crate::synth::convexify::{convexify_bilinear, BilinearRole};
use crate::verify::{almost_surely_reaches, can_reach};

/// See [`Program::cost_linearization_cap`].
pub const COST_LINEARIZATION_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveChoice {
    /// The first reachability specification if there is one, else the first
    /// expected-cost specification.
    #[default]
    Auto,
    Reach,
    Cost,
}

/// Value variables of one specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub spec: usize,
    pub kind: SpecKind,
    /// Variable index per state, `None` where the value is a constant.
    pub var: Vec<Option<usize>>,
    /// Constant value of states without a variable.
    pub fixed: Vec<f64>,
    pub penalty: Vec<Option<usize>>,
    /// States carrying a variable (and a Bellman constraint), ascending.
    pub states: Vec<usize>,
}

impl Family {
    fn role(&self) -> BilinearRole {
        match self.kind {
            SpecKind::ReachAtLeast => BilinearRole::Reach,
            SpecKind::ExpCostAtMost => BilinearRole::Cost,
        }
    }

    /// Value of state `s` at a point given as a per-state vector.
    fn value(&self, s: usize, point: &[f64]) -> f64 {
        match self.var[s] {
            Some(_) => point[s],
            None => self.fixed[s],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Program<'a> {
    pub model: &'a IntervalPomdp,
    pub specs: Vec<Specification>,
    pub num_vars: usize,
    /// `sigma[z][a]`: policy variable, `None` if the entry is not optimized.
    pub sigma: Vec<Vec<Option<usize>>>,
    pub families: Vec<Family>,
    /// `vertices[s][a]`: vertices of the polytope of `(s, a)`, coordinates in
    /// successor-list order. Empty for states without constraints.
    pub vertices: Vec<Vec<Vec<Vec<f64>>>>,
    /// Family whose initial-state value is optimized, if it is a variable.
    pub objective: Option<usize>,
    pub eps_graph: f64,
    /// Reasons why no positive policy can satisfy the specifications; the
    /// support graph does not depend on the policy, so these are final.
    pub blocked: Vec<String>,
}

/// Current assignment the concave parts are linearized around.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearizationPoint {
    pub sigma: Policy,
    /// Per family, one value per state.
    pub values: Vec<Vec<f64>>,
}

pub fn build_program<'a>(
    model: &'a IntervalPomdp,
    specs: &[Specification],
    objective: ObjectiveChoice,
    eps_graph: f64,
    vertex_budget: usize,
) -> Result<Program<'a>> {
    model.validate()?;
    if specs.is_empty() {
        return Err(Error::InvalidSpec("at least one specification is required".into()));
    }
    for spec in specs {
        spec.validate(model.num_states)?;
    }
    let na = model.num_actions;
    if !(eps_graph > 0.0 && eps_graph * na as f64 <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "minimal action probability {eps_graph} must be positive and at most 1/{na}"
        )));
    }

    let n = model.num_states;
    let support: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            let set: BTreeSet<usize> = model.transitions[s].iter().flatten().map(|&(t, _)| t).collect();
            set.into_iter().collect()
        })
        .collect();
    let relevant = can_reach_from(&support, model.initial);

    let mut blocked = Vec::new();
    let mut next_var = 0;
    let mut families = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let mut var = vec![None; n];
        let mut fixed = vec![0.0; n];
        match spec.kind {
            SpecKind::ReachAtLeast => {
                let reach = can_reach(&support, &spec.targets);
                for s in 0..n {
                    if spec.targets.contains(&s) {
                        fixed[s] = 1.0;
                    } else if reach[s] && relevant[s] {
                        var[s] = Some(0);
                    }
                }
                if !reach[model.initial] && spec.threshold > 0.0 {
                    blocked.push(format!("specification {i}: the target set is unreachable from the initial state"));
                }
            }
            SpecKind::ExpCostAtMost => {
                let sure = almost_surely_reaches(&support, &spec.targets);
                if !sure[model.initial] {
                    blocked.push(format!(
                        "specification {i}: the goal set is not reached almost surely from the initial state"
                    ));
                }
                for s in 0..n {
                    if !spec.targets.contains(&s) && relevant[s] && sure[s] {
                        var[s] = Some(0);
                    }
                }
            }
        }
        let states: Vec<usize> = (0..n).filter(|&s| var[s].is_some()).collect();
        families.push(Family {
            spec: i,
            kind: spec.kind,
            var,
            fixed,
            penalty: vec![None; n],
            states,
        });
    }

    // Policy variables first, then values and penalties family by family.
    let mut sigma = vec![vec![None; na]; model.num_observations];
    if na > 1 {
        let used: BTreeSet<usize> = families
            .iter()
            .flat_map(|f| f.states.iter().map(|&s| model.observation[s]))
            .collect();
        for z in used {
            for slot in sigma[z].iter_mut() {
                *slot = Some(next_var);
                next_var += 1;
            }
        }
    }
    for fam in &mut families {
        for &s in &fam.states {
            fam.var[s] = Some(next_var);
            next_var += 1;
        }
        for &s in &fam.states {
            fam.penalty[s] = Some(next_var);
            next_var += 1;
        }
    }

    let mut vertices = vec![Vec::new(); n];
    let constrained: BTreeSet<usize> = families.iter().flat_map(|f| f.states.iter().copied()).collect();
    for &s in &constrained {
        let mut per_action = Vec::with_capacity(na);
        for succ in &model.transitions[s] {
            let lower: Vec<f64> = succ.iter().map(|(_, iv)| iv.lo).collect();
            let upper: Vec<f64> = succ.iter().map(|(_, iv)| iv.hi).collect();
            let poly = TransitionPolytope::canonical_form(&lower, &upper)?;
            per_action.push(enumerate_vertices_with_budget(&poly, vertex_budget)?.vertices);
        }
        vertices[s] = per_action;
    }

    let pick = |kind: SpecKind| specs.iter().position(|s| s.kind == kind);
    let objective_spec = match objective {
        ObjectiveChoice::Auto => pick(SpecKind::ReachAtLeast).or_else(|| pick(SpecKind::ExpCostAtMost)),
        ObjectiveChoice::Reach => Some(
            pick(SpecKind::ReachAtLeast)
                .ok_or_else(|| Error::InvalidSpec("reachability objective without a reachability spec".into()))?,
        ),
        ObjectiveChoice::Cost => Some(
            pick(SpecKind::ExpCostAtMost)
                .ok_or_else(|| Error::InvalidSpec("cost objective without an expected-cost spec".into()))?,
        ),
    };
    let objective = objective_spec.filter(|&i| families[i].var[model.initial].is_some());

    Ok(Program {
        model,
        specs: specs.to_vec(),
        num_vars: next_var,
        sigma,
        families,
        vertices,
        objective,
        eps_graph,
        blocked,
    })
}

fn can_reach_from(support: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; support.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(s) = stack.pop() {
        for &t in &support[s] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen
}

/// Contribution of one action at one vertex to a Bellman constraint.
#[derive(Clone, Debug, Default)]
struct Part {
    affine: Vec<(usize, f64)>,
    constant: f64,
    squares: Vec<(usize, f64)>,
    sum_squares: Vec<(usize, usize, f64)>,
}

impl Program<'_> {
    /// Number of policy-variable entries that are optimized.
    pub fn num_policy_vars(&self) -> usize {
        self.sigma.iter().flatten().filter(|v| v.is_some()).count()
    }

    /// Number of robust Bellman constraints after vertex instantiation.
    pub fn robust_constraint_count(&self) -> u128 {
        self.families
            .iter()
            .flat_map(|f| f.states.iter())
            .map(|&s| self.vertices[s].iter().map(|v| v.len() as u128).product::<u128>())
            .sum()
    }

    /// Total vertex count and largest vertex set over constrained state-action pairs.
    pub fn vertex_stats(&self) -> (usize, usize) {
        let sizes = self.vertices.iter().flatten().map(|v| v.len());
        (sizes.clone().sum(), sizes.max().unwrap_or(0))
    }

    /// Largest expected-cost value used as a linearization point. Any
    /// linearization point yields a valid convex restriction.
    pub fn cost_linearization_cap(&self, fam: &Family) -> f64 {
        COST_LINEARIZATION_FACTOR * self.specs[fam.spec].threshold.max(1.0)
    }

    fn sigma_value(&self, z: usize, a: usize, point: &LinearizationPoint) -> f64 {
        if self.model.num_actions == 1 {
            1.0
        } else {
            point.sigma.probs[z][a]
        }
    }

    fn part(&self, fam: &Family, s: usize, a: usize, vertex: &[f64], point: &LinearizationPoint) -> Result<Part> {
        let z_obs = self.model.observation[s];
        let values = &point.values[fam.spec];
        let role = fam.role();
        let sign = match role {
            BilinearRole::Reach => -1.0,
            BilinearRole::Cost => 1.0,
        };
        let y_var = self.sigma[z_obs][a];
        let y_hat = self.sigma_value(z_obs, a, point);
        let mut part = Part::default();
        for (&(t, _), &q) in self.model.transitions[s][a].iter().zip(vertex) {
            match (y_var, fam.var[t]) {
                (Some(y), Some(zv)) => {
                    let mut z_hat = fam.value(t, values);
                    if role == BilinearRole::Cost {
                        z_hat = z_hat.min(self.cost_linearization_cap(fam));
                    }
                    let split = convexify_bilinear(q / 2.0, role, y_hat, z_hat)?;
                    match role {
                        BilinearRole::Reach => {
                            part.squares.push((y, split.d));
                            part.squares.push((zv, split.d));
                        }
                        BilinearRole::Cost => part.sum_squares.push((y, zv, split.d)),
                    }
                    part.affine.push((y, split.lin_y));
                    part.affine.push((zv, split.lin_z));
                    part.constant += split.constant;
                }
                (Some(y), None) => part.affine.push((y, sign * q * fam.fixed[t])),
                (None, Some(zv)) => part.affine.push((zv, sign * q * y_hat)),
                (None, None) => part.constant += sign * q * y_hat * fam.fixed[t],
            }
        }
        if fam.kind == SpecKind::ExpCostAtMost {
            let r = self.model.cost[s][a];
            match y_var {
                Some(y) => part.affine.push((y, r)),
                None => part.constant += y_hat * r,
            }
        }
        Ok(part)
    }

    /// The convex program of one CCP iteration: the robust constraints at
    /// every vertex combination with concave parts linearized at `point`,
    /// penalties weighted by `tau`.
    pub fn instantiate_robust(&self, point: &LinearizationPoint, tau: f64) -> Result<ConvexQcqp> {
        let model = self.model;
        let mut q = ConvexQcqp::new(self.num_vars);

        for row in &self.sigma {
            let vars: Vec<usize> = row.iter().flatten().copied().collect();
            if vars.is_empty() {
                continue;
            }
            q.push(QcqpConstraint::eq(
                LinearForm::from_terms(vars.iter().map(|&v| (v, 1.0))),
                -1.0,
            ));
            for &v in &vars {
                q.bound(v, Some(self.eps_graph), None);
            }
        }

        for fam in &self.families {
            let spec = &self.specs[fam.spec];
            for &s in &fam.states {
                let v = fam.var[s].expect("family state has a variable");
                match fam.kind {
                    SpecKind::ReachAtLeast => q.bound(v, Some(0.0), Some(1.0)),
                    SpecKind::ExpCostAtMost => q.bound(v, Some(0.0), None),
                }
                q.bound(fam.penalty[s].expect("family state has a penalty"), Some(0.0), None);
                q.objective.add(fam.penalty[s].unwrap(), tau);
            }
            if let Some(v) = fam.var[model.initial] {
                match fam.kind {
                    SpecKind::ReachAtLeast => q.bound(v, Some(spec.threshold), None),
                    SpecKind::ExpCostAtMost => q.bound(v, None, Some(spec.threshold)),
                }
            }

            for &s in &fam.states {
                let parts: Vec<Vec<Part>> = (0..model.num_actions)
                    .map(|a| {
                        self.vertices[s][a]
                            .iter()
                            .map(|vx| self.part(fam, s, a, vx, point))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                let v = fam.var[s].unwrap();
                let k = fam.penalty[s].unwrap();
                let base: Vec<(usize, f64)> = match fam.kind {
                    SpecKind::ReachAtLeast => vec![(v, 1.0), (k, -1.0)],
                    SpecKind::ExpCostAtMost => vec![(v, -1.0), (k, -1.0)],
                };
                let mut digits = vec![0usize; parts.len()];
                loop {
                    q.push(combine(&base, digits.iter().zip(&parts).map(|(&d, p)| &p[d])));
                    if !advance(&mut digits, &parts) {
                        break;
                    }
                }
            }
        }

        if let Some(f) = self.objective {
            let fam = &self.families[f];
            let v = fam.var[model.initial].expect("objective state has a variable");
            match fam.kind {
                SpecKind::ReachAtLeast => q.objective.add(v, -1.0),
                SpecKind::ExpCostAtMost => q.objective.add(v, 1.0),
            }
        }
        Ok(q)
    }

    /// Policy read off a solution: optimized entries clamped to at least
    /// `eps_graph` and renormalized; other observations keep `fallback`.
    pub fn extract_policy(&self, x: &[f64], fallback: &Policy) -> Policy {
        let mut out = fallback.clone();
        for (z, row) in self.sigma.iter().enumerate() {
            if row.iter().any(|v| v.is_none()) {
                continue;
            }
            let clamped: Vec<f64> = row
                .iter()
                .map(|v| {
                    let p = x[v.unwrap()];
                    if p.is_finite() {
                        p.clamp(self.eps_graph, 1.0)
                    } else {
                        self.eps_graph
                    }
                })
                .collect();
            let total: f64 = clamped.iter().sum();
            out.probs[z] = clamped.iter().map(|p| p / total).collect();
        }
        out
    }

    /// Sum of the penalty variables at a solution.
    pub fn penalty_sum(&self, x: &[f64]) -> f64 {
        self.families
            .iter()
            .flat_map(|f| f.penalty.iter().flatten())
            .map(|&k| x[k].max(0.0))
            .sum()
    }
}

fn advance<T>(digits: &mut [usize], parts: &[Vec<T>]) -> bool {
    for (d, p) in digits.iter_mut().zip(parts) {
        *d += 1;
        if *d < p.len() {
            return true;
        }
        *d = 0;
    }
    false
}

fn combine<'p>(base: &[(usize, f64)], parts: impl Iterator<Item = &'p Part>) -> QcqpConstraint {
    let mut affine = LinearForm::from_terms(base.iter().copied());
    let mut constant = 0.0;
    let mut squares: BTreeMap<usize, f64> = BTreeMap::new();
    let mut sums: Vec<QuadAtom> = Vec::new();
    for p in parts {
        for &(j, c) in &p.affine {
            affine.add(j, c);
        }
        constant += p.constant;
        for &(j, d) in &p.squares {
            *squares.entry(j).or_insert(0.0) += d;
        }
        for &(u, v, d) in &p.sum_squares {
            sums.push(QuadAtom::square_of_sum(d, u, v));
        }
    }
    let mut quads: Vec<QuadAtom> = squares.into_iter().map(|(j, d)| QuadAtom::square(d, j)).collect();
    quads.extend(sums);
    QcqpConstraint::le(affine, constant, quads)
}
