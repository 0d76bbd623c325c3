use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use upsynth_conic::{solve_qcqp, Settings, SolveStatus};

use crate::error::{Error, Result};
use crate::model::{induce_chain, IntervalPomdp, Policy, SpecKind, Specification};
use crate::polytope::DEFAULT_VERTEX_BUDGET;
use crate::synth::program::{build_program, LinearizationPoint, ObjectiveChoice, Program};
use crate::verify::{check, Verification};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcpParams {
    pub tau0: f64,
    /// Additive penalty increment.
    pub mu: f64,
    pub tau_max: f64,
    /// Penalty sums at or below this count as zero.
    pub penalty_tol: f64,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Number of random restarts after the first start.
    pub restarts: usize,
    /// Minimal probability of every action.
    pub eps_graph: f64,
    pub stagnation_window: usize,
    pub stagnation_tol: f64,
    pub seed: u64,
    /// Wall-clock budget for the whole synthesis.
    pub timeout: Option<Duration>,
    pub objective: ObjectiveChoice,
    pub vertex_budget: usize,
    pub solver: Settings,
}

impl Default for CcpParams {
    fn default() -> Self {
        Self {
            tau0: 1.0,
            mu: 2.0,
            tau_max: 1e6,
            penalty_tol: 1e-6,
            max_iters: 500,
            restarts: 5,
            eps_graph: 1e-4,
            stagnation_window: 10,
            stagnation_tol: 1e-8,
            seed: 0,
            timeout: None,
            objective: ObjectiveChoice::Auto,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
            solver: Settings::default(),
        }
    }
}

/// Mutable state of one CCP run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcpState {
    pub sigma_hat: Policy,
    /// Per specification, the verified robust value of every state.
    pub values_hat: Vec<Vec<f64>>,
    pub tau: f64,
    pub mu: f64,
    pub tau_max: f64,
    pub iteration: usize,
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthesisStatus {
    Certified,
    Infeasible,
    Timeout,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Convex solves performed in each start (the first entry is the initial start).
    pub iterations_per_restart: Vec<usize>,
    pub tau: Vec<f64>,
    pub penalty: Vec<f64>,
    /// Optimal value of each convex program.
    pub objective: Vec<f64>,
    pub solver_status: Vec<SolveStatus>,
    /// Verified value of the optimized specification at the initial state.
    pub verified_value: Vec<f64>,
    pub build_seconds: f64,
    pub solve_seconds: Vec<f64>,
    pub verify_seconds: Vec<f64>,
    pub total_seconds: f64,
}

impl Trace {
    pub fn total_iterations(&self) -> usize {
        self.iterations_per_restart.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub status: SynthesisStatus,
    /// The certified policy, or the best policy found otherwise.
    pub policy: Policy,
    /// Robust verification of `policy`.
    pub verification: Verification,
    pub trace: Trace,
    pub num_vars: usize,
    pub num_policy_vars: usize,
    pub constraint_count: u128,
    pub vertex_total: usize,
    pub vertex_max: usize,
    /// Why no policy can exist, when known up front.
    pub blocked: Vec<String>,
}

fn shortfall(v: &Verification) -> f64 {
    v.outcomes
        .iter()
        .map(|o| match o.spec.kind {
            SpecKind::ReachAtLeast => (o.spec.threshold - o.value).max(0.0),
            SpecKind::ExpCostAtMost => {
                if o.value.is_finite() {
                    ((o.value - o.spec.threshold) / o.spec.threshold.max(1.0)).max(0.0)
                } else {
                    f64::INFINITY
                }
            }
        })
        .sum()
}

fn random_policy(program: &Program, rng: &mut ChaCha8Rng, fallback: &Policy) -> Policy {
    let mut out = fallback.clone();
    for (z, row) in program.sigma.iter().enumerate() {
        if row.iter().any(|v| v.is_none()) {
            continue;
        }
        let draws: Vec<f64> = row.iter().map(|_| Exp1.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        let clamped: Vec<f64> = draws.iter().map(|d| (d / total).max(program.eps_graph)).collect();
        let total: f64 = clamped.iter().sum();
        out.probs[z] = clamped.iter().map(|p| p / total).collect();
    }
    out
}

struct Run<'a> {
    program: Program<'a>,
    params: &'a CcpParams,
    start: Instant,
    trace: Trace,
    best: Option<(f64, Policy, Verification)>,
}

impl Run<'_> {
    fn verify(&mut self, policy: &Policy) -> Result<Verification> {
        let t = Instant::now();
        let chain = induce_chain(self.program.model, policy)?;
        let v = check(&chain, &self.program.specs)?;
        self.trace.verify_seconds.push(t.elapsed().as_secs_f64());
        let score = shortfall(&v);
        if self.best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            self.best = Some((score, policy.clone(), v.clone()));
        }
        Ok(v)
    }

    fn objective_value(&self, v: &Verification) -> f64 {
        match self.program.objective {
            Some(f) => v.outcomes[f].value,
            None => shortfall(v),
        }
    }

    fn timed_out(&self) -> bool {
        self.params.timeout.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn finish(mut self, status: SynthesisStatus, certified: Option<(Policy, Verification)>) -> SynthesisResult {
        self.trace.total_seconds = self.start.elapsed().as_secs_f64();
        let (policy, verification) = match certified {
            Some(pv) => pv,
            None => {
                let (_, p, v) = self.best.take().expect("at least one policy verified");
                (p, v)
            }
        };
        let (vertex_total, vertex_max) = self.program.vertex_stats();
        SynthesisResult {
            status,
            policy,
            verification,
            num_vars: self.program.num_vars,
            num_policy_vars: self.program.num_policy_vars(),
            constraint_count: self.program.robust_constraint_count(),
            vertex_total,
            vertex_max,
            blocked: self.program.blocked.clone(),
            trace: self.trace,
        }
    }
}

/// Penalty convex-concave procedure with robust verification after every
/// convex solve. Returns as soon as a policy is certified.
pub fn run_ccp(model: &IntervalPomdp, specs: &[Specification], params: &CcpParams) -> Result<SynthesisResult> {
    let start = Instant::now();
    let program = build_program(model, specs, params.objective, params.eps_graph, params.vertex_budget)?;
    let mut run = Run {
        program,
        params,
        start,
        trace: Trace {
            build_seconds: start.elapsed().as_secs_f64(),
            ..Trace::default()
        },
        best: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let uniform = Policy::uniform(model.num_observations, model.num_actions);

    let first = run.verify(&uniform)?;
    if first.satisfied {
        run.trace.iterations_per_restart.push(0);
        return Ok(run.finish(SynthesisStatus::Certified, Some((uniform, first))));
    }
    if !run.program.blocked.is_empty() || run.program.num_policy_vars() == 0 {
        run.trace.iterations_per_restart.push(0);
        return Ok(run.finish(SynthesisStatus::Infeasible, None));
    }

    let mut state = CcpState {
        sigma_hat: uniform.clone(),
        values_hat: first.outcomes.iter().map(|o| o.values.values.clone()).collect(),
        tau: params.tau0,
        mu: params.mu,
        tau_max: params.tau_max,
        iteration: 0,
        restarts: 0,
    };
    let mut global_iteration = 0;

    for restart in 0..=params.restarts {
        state.restarts = restart;
        state.iteration = 0;
        state.tau = params.tau0;
        if restart > 0 {
            state.sigma_hat = random_policy(&run.program, &mut rng, &uniform);
            let v = run.verify(&state.sigma_hat)?;
            if v.satisfied {
                run.trace.iterations_per_restart.push(0);
                return Ok(run.finish(SynthesisStatus::Certified, Some((state.sigma_hat, v))));
            }
            state.values_hat = v.outcomes.iter().map(|o| o.values.values.clone()).collect();
        }
        run.trace.iterations_per_restart.push(0);
        let mut history: Vec<f64> = Vec::new();

        while state.iteration < params.max_iters {
            if run.timed_out() {
                return Ok(run.finish(SynthesisStatus::Timeout, None));
            }
            let point = LinearizationPoint {
                sigma: state.sigma_hat.clone(),
                values: state.values_hat.clone(),
            };
            let qcqp = run.program.instantiate_robust(&point, state.tau)?;
            let mut settings = params.solver.clone();
            if let Some(limit) = params.timeout {
                let left = limit.saturating_sub(run.start.elapsed());
                settings.time_limit = Some(settings.time_limit.map_or(left, |t| t.min(left)));
            }
            let t = Instant::now();
            let report = solve_qcqp(&qcqp, &settings)?;
            run.trace.solve_seconds.push(t.elapsed().as_secs_f64());
            state.iteration += 1;
            global_iteration += 1;
            *run.trace.iterations_per_restart.last_mut().unwrap() += 1;

            match report.status {
                SolveStatus::Optimal => {}
                SolveStatus::NumericalFailure if report.timed_out => {
                    return Ok(run.finish(SynthesisStatus::Timeout, None));
                }
                SolveStatus::NumericalFailure if report.x.iter().all(|v| v.is_finite()) => {}
                other => {
                    return Err(Error::Solver {
                        iteration: global_iteration,
                        message: format!(
                            "{other:?}{}",
                            report.message.map(|m| format!(" ({m})")).unwrap_or_default()
                        ),
                    })
                }
            }

            let sigma = run.program.extract_policy(&report.x, &state.sigma_hat);
            let v = run.verify(&sigma)?;
            run.trace.tau.push(state.tau);
            run.trace.penalty.push(run.program.penalty_sum(&report.x));
            run.trace.objective.push(report.objective);
            run.trace.solver_status.push(report.status);
            let value = run.objective_value(&v);
            run.trace.verified_value.push(value);
            if v.satisfied {
                return Ok(run.finish(SynthesisStatus::Certified, Some((sigma, v))));
            }

            state.values_hat = v.outcomes.iter().map(|o| o.values.values.clone()).collect();
            state.sigma_hat = sigma;
            state.tau = (state.tau + state.mu).min(state.tau_max);

            history.push(value);
            let w = params.stagnation_window;
            if w > 0 && history.len() > w {
                let old = history[history.len() - 1 - w];
                if (value - old).abs() < params.stagnation_tol {
                    break;
                }
            }
        }
    }
    Ok(run.finish(SynthesisStatus::Infeasible, None))
}
