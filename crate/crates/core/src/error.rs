use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("graph preservation violated: {0}")]
    GraphPreservation(String),

    #[error("infeasible uncertainty set at {context}: lower bounds sum to {lower_sum}, upper bounds to {upper_sum}")]
    InfeasibleUncertainty {
        context: String,
        lower_sum: f64,
        upper_sum: f64,
    },

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid instantiation: {0}")]
    InvalidInstantiation(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error(
        "{count} vertices exceed the budget of {budget} for a {dim}-successor polytope; \
         reduce the number of uncertain successors of this state-action pair or raise the budget"
    )]
    VertexBudget { dim: usize, count: usize, budget: usize },

    #[error("value iteration did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("expected cost is infinite: state {state} does not reach the goal set almost surely")]
    InfiniteCost { state: usize },

    #[error("vertex oracle needs {combinations} combinations, budget is {budget}")]
    OracleTooLarge { combinations: u128, budget: u128 },

    #[error("solver failed in CCP iteration {iteration}: {message}")]
    Solver { iteration: usize, message: String },

    #[error(transparent)]
    Conic(#[from] upsynth_conic::ConicError),

    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
