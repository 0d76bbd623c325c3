//! Second-order cone machinery for the synthesis loop.
//!
//! A [`ConvexQcqp`] (linear objective, constraints made of an affine part plus
//! positively weighted squares of linear forms) is rewritten into a
//! [`ConicProblem`] over the nonnegative orthant and second-order cones, which
//! is then solved by a primal-dual interior-point method on the homogeneous
//! self-dual embedding ([`solve`]).

pub mod cbf;
mod cones;
mod error;
mod ipm;
mod problem;
mod qcqp;
mod scaling;

pub use error::ConicError;
pub use ipm::{solve, Settings, SolveReport, SolveStatus};
pub use problem::{soc_violation, ConeBlock, ConicProblem, LinearForm, LinearRow};
pub use qcqp::{ConvexQcqp, QcqpConstraint, QuadAtom, Sense};

/// Reformulates `problem` into conic form and solves it.
pub fn solve_qcqp(problem: &ConvexQcqp, settings: &Settings) -> Result<SolveReport, ConicError> {
    solve(&problem.to_conic()?, settings)
}
