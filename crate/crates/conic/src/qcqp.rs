use serde::{Deserialize, Serialize};

use crate::problem::{ConeBlock, ConicProblem, LinearForm, LinearRow};
use crate::ConicError;

/// `coef·(form(x))²` with `coef > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadAtom {
    pub coef: f64,
    pub form: LinearForm,
}

impl QuadAtom {
    pub fn square(coef: f64, var: usize) -> Self {
        Self {
            coef,
            form: LinearForm::from_terms([(var, 1.0)]),
        }
    }

    /// `coef·(x[u] + x[v])²`
    pub fn square_of_sum(coef: f64, u: usize, v: usize) -> Self {
        Self {
            coef,
            form: LinearForm::from_terms([(u, 1.0), (v, 1.0)]),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let q = self.form.eval(x);
        self.coef * q * q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// `affine(x) + constant + Σ atoms <= 0`
    Le,
    /// `affine(x) + constant = 0`; atoms must be empty.
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QcqpConstraint {
    pub affine: LinearForm,
    pub constant: f64,
    pub quads: Vec<QuadAtom>,
    pub sense: Sense,
}

impl QcqpConstraint {
    pub fn le(affine: LinearForm, constant: f64, quads: Vec<QuadAtom>) -> Self {
        Self {
            affine,
            constant,
            quads,
            sense: Sense::Le,
        }
    }

    pub fn eq(affine: LinearForm, constant: f64) -> Self {
        Self {
            affine,
            constant,
            quads: Vec::new(),
            sense: Sense::Eq,
        }
    }

    /// Left-hand side `affine(x) + constant + Σ atoms`.
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.affine.eval(x) + self.constant + self.quads.iter().map(|q| q.eval(x)).sum::<f64>()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.lhs(x);
        match self.sense {
            Sense::Le => v.max(0.0),
            Sense::Eq => v.abs(),
        }
    }
}

/// Convex quadratically constrained program with a linear objective.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexQcqp {
    pub num_vars: usize,
    pub objective: LinearForm,
    pub objective_constant: f64,
    pub constraints: Vec<QcqpConstraint>,
}

impl ConvexQcqp {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn push(&mut self, constraint: QcqpConstraint) {
        self.constraints.push(constraint);
    }

    /// Adds `lo <= x[var] <= hi` as linear rows (either side may be omitted).
    pub fn bound(&mut self, var: usize, lo: Option<f64>, hi: Option<f64>) {
        if let Some(lo) = lo {
            self.push(QcqpConstraint::le(LinearForm::from_terms([(var, -1.0)]), lo, Vec::new()));
        }
        if let Some(hi) = hi {
            self.push(QcqpConstraint::le(LinearForm::from_terms([(var, 1.0)]), -hi, Vec::new()));
        }
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.eval(x) + self.objective_constant
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(x)).fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    pub fn quadratic_constraint_count(&self) -> usize {
        self.constraints.iter().filter(|c| !c.quads.is_empty()).count()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        self.objective.check_range(self.num_vars)?;
        for (k, c) in self.constraints.iter().enumerate() {
            c.affine.check_range(self.num_vars)?;
            if c.sense == Sense::Eq && !c.quads.is_empty() {
                return Err(ConicError::QuadraticEquality(k));
            }
            for (a, atom) in c.quads.iter().enumerate() {
                if !(atom.coef > 0.0 && atom.coef.is_finite()) {
                    return Err(ConicError::NonConvexAtom {
                        constraint: k,
                        atom: a,
                        coef: atom.coef,
                    });
                }
                atom.form.check_range(self.num_vars)?;
            }
        }
        Ok(())
    }

    /// Rewrites every quadratic constraint `Σ λᵢ qᵢ(x)² + a'x + b <= 0` into one
    /// second-order cone on the affine image
    /// `((t+1)/2, (t-1)/2, √λ₁ q₁(x), …)` with `t = -(a'x + b)`, which holds iff
    /// `Σ λᵢ qᵢ(x)² <= t`. Linear constraints pass through unchanged.
    pub fn to_conic(&self) -> Result<ConicProblem, ConicError> {
        self.validate()?;
        let mut out = ConicProblem::new(self.num_vars);
        for &(j, c) in &self.objective.terms {
            out.objective[j] += c;
        }
        out.objective_offset = self.objective_constant;

        for c in &self.constraints {
            match (c.sense, c.quads.is_empty()) {
                (Sense::Eq, _) => out.equalities.push(LinearRow {
                    form: c.affine.clone(),
                    rhs: -c.constant,
                }),
                (Sense::Le, true) => out.inequalities.push(LinearRow {
                    form: c.affine.clone(),
                    rhs: -c.constant,
                }),
                (Sense::Le, false) => out.cones.push(cone_of(c)),
            }
        }
        Ok(out)
    }
}

fn cone_of(c: &QcqpConstraint) -> ConeBlock {
    fn local(j: usize, cols: &mut Vec<usize>) -> usize {
        match cols.iter().position(|&k| k == j) {
            Some(p) => p,
            None => {
                cols.push(j);
                cols.len() - 1
            }
        }
    }
    let mut cols: Vec<usize> = Vec::new();
    for &(j, _) in &c.affine.terms {
        local(j, &mut cols);
    }
    for atom in &c.quads {
        for &(j, _) in &atom.form.terms {
            local(j, &mut cols);
        }
    }

    let width = cols.len();
    // t = -(a'x + b); rows 0 and 1 carry (t + 1)/2 and (t - 1)/2.
    let mut head = vec![0.0; width];
    for &(j, a) in &c.affine.terms {
        head[local(j, &mut cols)] -= 0.5 * a;
    }
    let mut matrix = vec![head.clone(), head];
    let mut offset = vec![0.5 * (1.0 - c.constant), 0.5 * (-1.0 - c.constant)];
    for atom in &c.quads {
        let scale = atom.coef.sqrt();
        let mut row = vec![0.0; width];
        for &(j, q) in &atom.form.terms {
            row[local(j, &mut cols)] += scale * q;
        }
        matrix.push(row);
        offset.push(0.0);
    }
    ConeBlock { cols, matrix, offset }
}
