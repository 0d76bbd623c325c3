//! The interval-simplex polytope `{x : a <= x <= b, Σx = 1}` of one
//! state-action pair, its canonical inequality form and its vertices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DIST_TOL;

pub const DEFAULT_VERTEX_BUDGET: usize = 4096;

/// Per-coordinate tolerance under which two vertices are the same, and under
/// which a coordinate counts as sitting on a bound.
pub const DEDUP_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionPolytope {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Rows `-e_i` (n), `e_i` (n), `1ᵀ`, `-1ᵀ`.
    pub a: Vec<Vec<f64>>,
    /// `(-lower, upper, 1, -1)`.
    pub c: Vec<f64>,
}

impl TransitionPolytope {
    pub fn canonical_form(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let n = lower.len();
        if n == 0 || upper.len() != n {
            return Err(Error::InvalidModel("bound vectors must be nonempty and of equal length".into()));
        }
        for i in 0..n {
            if !(lower[i] > 0.0) {
                return Err(Error::GraphPreservation(format!("lower bound {} of coordinate {i}", lower[i])));
            }
            if !(lower[i] <= upper[i] && upper[i] <= 1.0) {
                return Err(Error::InvalidModel(format!(
                    "coordinate {i}: [{}, {}] is not a sub-interval of (0, 1]",
                    lower[i], upper[i]
                )));
            }
        }
        let (lo, hi): (f64, f64) = (lower.iter().sum(), upper.iter().sum());
        if lo > 1.0 + DIST_TOL || hi < 1.0 - DIST_TOL {
            return Err(Error::InfeasibleUncertainty {
                context: "polytope".into(),
                lower_sum: lo,
                upper_sum: hi,
            });
        }

        let mut a = Vec::with_capacity(2 * n + 2);
        let unit = |i: usize, v: f64| (0..n).map(|j| if j == i { v } else { 0.0 }).collect::<Vec<_>>();
        a.extend((0..n).map(|i| unit(i, -1.0)));
        a.extend((0..n).map(|i| unit(i, 1.0)));
        a.push(vec![1.0; n]);
        a.push(vec![-1.0; n]);
        let mut c: Vec<f64> = lower.iter().map(|v| -v).collect();
        c.extend_from_slice(upper);
        c.push(1.0);
        c.push(-1.0);
        Ok(Self {
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            a,
            c,
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// `A·x <= c + tol` row by row.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.a
            .iter()
            .zip(&self.c)
            .all(|(row, &ci)| row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() <= ci + tol)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    pub vertices: Vec<Vec<f64>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// `n·2^(n-1)`, saturating.
pub fn vertex_count_bound(n: usize) -> u128 {
    if n == 0 {
        return 0;
    }
    if n > 120 {
        return u128::MAX;
    }
    (n as u128) << (n - 1)
}

pub fn enumerate_vertices(poly: &TransitionPolytope) -> VertexSet {
    enumerate_vertices_with_budget(poly, usize::MAX).expect("unbounded budget")
}

/// Every vertex has all coordinates on a bound except at most one, the
/// designated free coordinate `j`, which absorbs the remaining mass. With `R`
/// the mass left after all lower bounds and `U` the coordinates raised to
/// their upper bound, `x_j = a_j + R - Σ_{i∈U} w_i` with `w = b - a`, so `U`
/// ranges over subsets whose width sum lies in `[R - w_j, R]`; these are
/// listed by a pruned depth-first search. A vertex whose free coordinate
/// also sits on a bound is only kept for the smallest free coordinate.
pub fn enumerate_vertices_with_budget(poly: &TransitionPolytope, budget: usize) -> Result<VertexSet> {
    let n = poly.dim();
    let free: Vec<usize> = (0..n).filter(|&i| poly.upper[i] - poly.lower[i] > DEDUP_TOL).collect();
    if free.is_empty() {
        return Ok(VertexSet {
            vertices: vec![poly.lower.clone()],
        });
    }
    let mut search = Search {
        poly,
        free: &free,
        residual: (1.0 - poly.lower.iter().sum::<f64>()).max(0.0),
        budget,
        vertices: Vec::new(),
        raised: Vec::new(),
    };
    for jpos in 0..free.len() {
        let others: Vec<usize> = (0..free.len()).filter(|&k| k != jpos).map(|k| free[k]).collect();
        let mut suffix = vec![0.0; others.len() + 1];
        for k in (0..others.len()).rev() {
            suffix[k] = suffix[k + 1] + poly.upper[others[k]] - poly.lower[others[k]];
        }
        search.visit(jpos, &others, &suffix, 0, 0.0)?;
    }
    Ok(VertexSet {
        vertices: search.vertices,
    })
}

struct Search<'a> {
    poly: &'a TransitionPolytope,
    free: &'a [usize],
    residual: f64,
    budget: usize,
    vertices: Vec<Vec<f64>>,
    raised: Vec<usize>,
}

impl Search<'_> {
    fn visit(&mut self, jpos: usize, others: &[usize], suffix: &[f64], depth: usize, sum: f64) -> Result<()> {
        let p = self.poly;
        let j = self.free[jpos];
        let wj = p.upper[j] - p.lower[j];
        if sum > self.residual + DEDUP_TOL || sum + suffix[depth] < self.residual - wj - DEDUP_TOL {
            return Ok(());
        }
        if depth < others.len() {
            let o = others[depth];
            self.visit(jpos, others, suffix, depth + 1, sum)?;
            self.raised.push(o);
            let r = self.visit(jpos, others, suffix, depth + 1, sum + p.upper[o] - p.lower[o]);
            self.raised.pop();
            return r;
        }
        let xj = p.lower[j] + self.residual - sum;
        let on_bound = (xj - p.lower[j]).abs() <= DEDUP_TOL || (xj - p.upper[j]).abs() <= DEDUP_TOL;
        if on_bound && jpos != 0 {
            return Ok(());
        }
        let xj = xj.clamp(p.lower[j], p.upper[j]);
        let mut v = p.lower.clone();
        for &i in &self.raised {
            v[i] = p.upper[i];
        }
        v[j] = xj;
        self.vertices.push(v);
        if self.vertices.len() > self.budget {
            return Err(Error::VertexBudget {
                dim: p.dim(),
                count: self.vertices.len(),
                budget: self.budget,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn canonical_blocks() {
        let p = TransitionPolytope::canonical_form(&[0.3, 0.3], &[0.7, 0.7]).unwrap();
        assert_eq!(
            p.a,
            vec![
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
                vec![-1.0, -1.0]
            ]
        );
        assert_eq!(p.c, vec![-0.3, -0.3, 0.7, 0.7, 1.0, -1.0]);
    }

    #[test]
    fn empty_and_nonpositive_rejected() {
        assert!(matches!(
            TransitionPolytope::canonical_form(&[0.6, 0.6], &[0.9, 0.9]),
            Err(Error::InfeasibleUncertainty { .. })
        ));
        assert!(matches!(
            TransitionPolytope::canonical_form(&[0.0, 0.6], &[0.9, 0.9]),
            Err(Error::GraphPreservation(_))
        ));
    }

    #[test]
    fn segment_endpoints() {
        let p = TransitionPolytope::canonical_form(&[0.3, 0.3], &[0.7, 0.7]).unwrap();
        assert_eq!(sorted(enumerate_vertices(&p).vertices), vec![vec![0.3, 0.7], vec![0.7, 0.3]]);
    }

    #[test]
    fn single_point() {
        let p = TransitionPolytope::canonical_form(&[1.0], &[1.0]).unwrap();
        assert_eq!(enumerate_vertices(&p).vertices, vec![vec![1.0]]);
        let p = TransitionPolytope::canonical_form(&[0.2, 0.5, 0.3], &[0.2, 0.5, 0.3]).unwrap();
        assert_eq!(enumerate_vertices(&p).vertices, vec![vec![0.2, 0.5, 0.3]]);
    }

    #[test]
    fn degenerate_coordinate_kept_fixed() {
        let p = TransitionPolytope::canonical_form(&[0.2, 0.1, 0.1], &[0.2, 0.7, 0.7]).unwrap();
        let v = sorted(enumerate_vertices(&p).vertices);
        assert_eq!(v.len(), 2);
        for x in v {
            assert_eq!(x[0], 0.2);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = TransitionPolytope::canonical_form(&[0.1; 3], &[0.5; 3]).unwrap();
        assert!(matches!(
            enumerate_vertices_with_budget(&p, 5),
            Err(Error::VertexBudget { budget: 5, .. })
        ));
        assert_eq!(enumerate_vertices_with_budget(&p, 6).unwrap().len(), 6);
    }

    #[test]
    fn count_bound() {
        assert_eq!(vertex_count_bound(1), 1);
        assert_eq!(vertex_count_bound(3), 12);
        assert_eq!(vertex_count_bound(5), 80);
    }
}
