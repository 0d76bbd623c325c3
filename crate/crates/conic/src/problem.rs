use serde::{Deserialize, Serialize};

use crate::ConicError;

/// Sparse linear form `Σ coef·x[index]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub terms: Vec<(usize, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut form = Self::new();
        for (index, coef) in terms {
            form.add(index, coef);
        }
        form
    }

    /// Adds `coef·x[index]`, merging with an existing term on the same variable.
    pub fn add(&mut self, index: usize, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.terms.iter_mut().find(|(i, _)| *i == index) {
            Some((_, c)) => *c += coef,
            None => self.terms.push((index, coef)),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn check_range(&self, num_vars: usize) -> Result<(), ConicError> {
        match self.terms.iter().find(|(i, _)| *i >= num_vars) {
            Some(&(index, _)) => Err(ConicError::VariableOutOfRange { index, num_vars }),
            None => Ok(()),
        }
    }
}

/// `form(x) = rhs` or `form(x) <= rhs`, depending on where the row is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub form: LinearForm,
    pub rhs: f64,
}

/// Affine image `u = M·x[cols] + offset` constrained to the second-order cone
/// `u[0] >= ‖u[1..]‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub cols: Vec<usize>,
    /// One row per cone coordinate, each of length `cols.len()`.
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl ConeBlock {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn image(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, g)| g + row.iter().zip(&self.cols).map(|(m, &j)| m * x[j]).sum::<f64>())
            .collect()
    }
}

/// Amount by which `u` lies outside the second-order cone (0 inside).
pub fn soc_violation(u: &[f64]) -> f64 {
    let tail = u[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    (tail - u[0]).max(0.0)
}

/// `minimize c'x + offset` subject to linear equalities, linear inequalities
/// and second-order cone blocks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub equalities: Vec<LinearRow>,
    pub inequalities: Vec<LinearRow>,
    pub cones: Vec<ConeBlock>,
}

impl ConicProblem {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        if self.objective.len() != self.num_vars {
            return Err(ConicError::Malformed(format!(
                "objective has {} entries for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        for row in self.equalities.iter().chain(&self.inequalities) {
            row.form.check_range(self.num_vars)?;
        }
        for (k, cone) in self.cones.iter().enumerate() {
            if cone.dim() == 0 {
                return Err(ConicError::Malformed(format!("cone block {k} is empty")));
            }
            if cone.matrix.len() != cone.dim() || cone.matrix.iter().any(|r| r.len() != cone.cols.len()) {
                return Err(ConicError::Malformed(format!("cone block {k} has inconsistent dimensions")));
            }
            if let Some(&index) = cone.cols.iter().find(|&&j| j >= self.num_vars) {
                return Err(ConicError::VariableOutOfRange {
                    index,
                    num_vars: self.num_vars,
                });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest violation over all constraints at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let eq = self
            .equalities
            .iter()
            .map(|r| (r.form.eval(x) - r.rhs).abs())
            .fold(0.0, f64::max);
        let ineq = self
            .inequalities
            .iter()
            .map(|r| (r.form.eval(x) - r.rhs).max(0.0))
            .fold(0.0, f64::max);
        let cones = self
            .cones
            .iter()
            .map(|c| soc_violation(&c.image(x)))
            .fold(0.0, f64::max);
        eq.max(ineq).max(cones)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }
}
