//! Machine-readable report of one synthesis or verification run.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::spec::format_spec;
use crate::model::{IntervalPomdp, Policy, SpecKind};
use crate::synth::{CcpParams, SynthesisResult, SynthesisStatus};
use crate::verify::Verification;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Synthesize,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub states: usize,
    pub actions: usize,
    pub observations: usize,
    pub initial: usize,
}

/// Outcome of one specification at the initial state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub spec: String,
    pub kind: String,
    pub threshold: f64,
    /// `null` when the value is infinite.
    pub value: Option<f64>,
    pub satisfied: bool,
}

/// Robust values of one specification as computed by the verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub spec: String,
    /// Per state, `null` where infinite.
    pub values: Vec<Option<f64>>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub iterations_per_restart: Vec<usize>,
    pub total_iterations: usize,
    pub tau: Vec<f64>,
    pub penalty: Vec<f64>,
    pub objective: Vec<f64>,
    pub verified_value: Vec<Option<f64>>,
    pub solver_status: Vec<String>,
    pub constraint_count: u128,
    pub num_vars: usize,
    pub num_policy_vars: usize,
    pub vertex_total: usize,
    pub vertex_max: usize,
    pub blocked: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRecord {
    pub tau0: f64,
    pub mu: f64,
    pub tau_max: f64,
    pub eps_graph: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub timeout_seconds: Option<f64>,
}

impl From<&CcpParams> for ParameterRecord {
    fn from(p: &CcpParams) -> Self {
        Self {
            tau0: p.tau0,
            mu: p.mu,
            tau_max: p.tau_max,
            eps_graph: p.eps_graph,
            max_iters: p.max_iters,
            restarts: p.restarts,
            seed: p.seed,
            timeout_seconds: p.timeout.map(|t| t.as_secs_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_seconds: f64,
    pub solve_seconds: Vec<f64>,
    pub verify_seconds: Vec<f64>,
    pub total_seconds: f64,
}

/// Serialized with a fixed key order (field order below).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub mode: RunMode,
    /// In verify mode, `certified` means every specification holds and
    /// `infeasible` that at least one is violated.
    pub status: SynthesisStatus,
    pub model: ModelSummary,
    pub specs: Vec<SpecRecord>,
    /// `policy[z][a]`: probability of action `a` under observation `z`.
    pub policy: Vec<Vec<f64>>,
    pub verification: Vec<TranscriptEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ParameterRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn summarize(model: &IntervalPomdp) -> ModelSummary {
    ModelSummary {
        states: model.num_states,
        actions: model.num_actions,
        observations: model.num_observations,
        initial: model.initial,
    }
}

fn spec_records(v: &Verification) -> Vec<SpecRecord> {
    v.outcomes
        .iter()
        .map(|o| SpecRecord {
            spec: format_spec(&o.spec),
            kind: match o.spec.kind {
                SpecKind::ReachAtLeast => "reach".into(),
                SpecKind::ExpCostAtMost => "cost".into(),
            },
            threshold: o.spec.threshold,
            value: finite(o.value),
            satisfied: o.satisfied,
        })
        .collect()
}

fn transcript(v: &Verification) -> Vec<TranscriptEntry> {
    v.outcomes
        .iter()
        .map(|o| TranscriptEntry {
            spec: format_spec(&o.spec),
            values: o.values.values.iter().map(|&x| finite(x)).collect(),
            converged: o.values.converged,
            iterations: o.values.iterations,
            residual: o.values.residual,
        })
        .collect()
}

impl ResultRecord {
    pub fn from_synthesis(model: &IntervalPomdp, result: &SynthesisResult, params: &CcpParams, timings: bool) -> Self {
        let t = &result.trace;
        Self {
            mode: RunMode::Synthesize,
            status: result.status,
            model: summarize(model),
            specs: spec_records(&result.verification),
            policy: result.policy.probs.clone(),
            verification: transcript(&result.verification),
            synthesis: Some(SynthesisSummary {
                iterations_per_restart: t.iterations_per_restart.clone(),
                total_iterations: t.total_iterations(),
                tau: t.tau.clone(),
                penalty: t.penalty.clone(),
                objective: t.objective.clone(),
                verified_value: t.verified_value.iter().map(|&x| finite(x)).collect(),
                solver_status: t.solver_status.iter().map(|s| format!("{s:?}")).collect(),
                constraint_count: result.constraint_count,
                num_vars: result.num_vars,
                num_policy_vars: result.num_policy_vars,
                vertex_total: result.vertex_total,
                vertex_max: result.vertex_max,
                blocked: result.blocked.clone(),
            }),
            parameters: Some(params.into()),
            timings: timings.then(|| Timings {
                build_seconds: t.build_seconds,
                solve_seconds: t.solve_seconds.clone(),
                verify_seconds: t.verify_seconds.clone(),
                total_seconds: t.total_seconds,
            }),
        }
    }

    pub fn from_verification(model: &IntervalPomdp, policy: &Policy, verification: &Verification) -> Self {
        Self {
            mode: RunMode::Verify,
            status: if verification.satisfied {
                SynthesisStatus::Certified
            } else {
                SynthesisStatus::Infeasible
            },
            model: summarize(model),
            specs: spec_records(verification),
            policy: policy.probs.clone(),
            verification: transcript(verification),
            synthesis: None,
            parameters: None,
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

/// Reads a policy from JSON: a result record (its `policy` table), an object
/// with a `probs` table, or a bare table `[[p_00, p_01, …], …]`.
pub fn parse_policy(text: &str) -> Result<Policy> {
    let value: Value = serde_json::from_str(text)?;
    let table = match &value {
        Value::Array(_) => &value,
        Value::Object(map) => map
            .get("policy")
            .or_else(|| map.get("probs"))
            .ok_or_else(|| Error::InvalidPolicy("policy file has neither `policy` nor `probs`".into()))?,
        _ => return Err(Error::InvalidPolicy("policy file must hold a JSON array or object".into())),
    };
    Ok(Policy {
        probs: serde_json::from_value(table.clone())?,
    })
}
