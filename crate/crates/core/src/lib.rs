//! Robust policy synthesis for interval POMDPs.
//!
//! Observation-based memoryless randomized policies are computed by a penalty
//! convex-concave procedure over a finite convex QCQP (obtained by enumerating
//! the vertices of every interval polytope) and certified by robust value
//! iteration on the induced interval Markov chain.

pub mod error;
pub mod io;
pub mod model;
pub mod polytope;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
