use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("variable index {index} out of range ({num_vars} variables declared)")]
    VariableOutOfRange { index: usize, num_vars: usize },

    #[error("constraint {constraint}, atom {atom}: quadratic coefficient {coef} is not positive")]
    NonConvexAtom {
        constraint: usize,
        atom: usize,
        coef: f64,
    },

    #[error("constraint {0} is an equality with quadratic terms")]
    QuadraticEquality(usize),

    #[error("malformed problem: {0}")]
    Malformed(String),

    #[error("interchange format, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
