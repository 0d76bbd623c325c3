//! Internal standard form `min c'x  s.t.  Ax = b,  Gx + s = h,  s ∈ K` and its
//! Ruiz equilibration.

use crate::cones::Layout;
use crate::problem::ConicProblem;

pub(crate) type SparseRow = Vec<(usize, f64)>;

/// `G` restricted to one cone block: dense rows over the block's columns.
#[derive(Clone, Debug)]
pub(crate) struct DenseBlock {
    pub cols: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub c: Vec<f64>,
    pub a: Vec<SparseRow>,
    pub b: Vec<f64>,
    /// Orthant rows of `G`.
    pub g_lp: Vec<SparseRow>,
    pub g_soc: Vec<DenseBlock>,
    pub h: Vec<f64>,
    pub layout: Layout,
}

impl StandardForm {
    pub fn from_problem(p: &ConicProblem) -> Self {
        let merge = |terms: &[(usize, f64)]| -> SparseRow {
            let mut row: SparseRow = Vec::with_capacity(terms.len());
            for &(j, v) in terms {
                match row.iter_mut().find(|(k, _)| *k == j) {
                    Some((_, w)) => *w += v,
                    None => row.push((j, v)),
                }
            }
            row.retain(|&(_, v)| v != 0.0);
            row
        };
        let a = p.equalities.iter().map(|r| merge(&r.form.terms)).collect();
        let b = p.equalities.iter().map(|r| r.rhs).collect();
        let g_lp = p.inequalities.iter().map(|r| merge(&r.form.terms)).collect();
        let mut h: Vec<f64> = p.inequalities.iter().map(|r| r.rhs).collect();
        // u = Mx + g ∈ Q  ⇔  s = h - Gx with G = -M, h = g.
        let mut g_soc = Vec::with_capacity(p.cones.len());
        for cone in &p.cones {
            g_soc.push(DenseBlock {
                cols: cone.cols.clone(),
                rows: cone.matrix.iter().map(|r| r.iter().map(|v| -v).collect()).collect(),
            });
            h.extend_from_slice(&cone.offset);
        }
        let layout = Layout {
            lp: p.inequalities.len(),
            soc: p.cones.iter().map(|c| c.dim()).collect(),
        };
        debug_assert_eq!(layout.dim(), h.len());
        Self {
            n: p.num_vars,
            c: p.objective.clone(),
            a,
            b,
            g_lp,
            g_soc,
            h,
            layout,
        }
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn m(&self) -> usize {
        self.h.len()
    }

    pub fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|r| r.iter().map(|&(j, v)| v * x[j]).sum()).collect()
    }

    pub fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &yi) in self.a.iter().zip(y) {
            for &(j, v) in r {
                out[j] += v * yi;
            }
        }
        out
    }

    pub fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .g_lp
            .iter()
            .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum())
            .collect();
        for blk in &self.g_soc {
            for row in &blk.rows {
                out.push(row.iter().zip(&blk.cols).map(|(v, &j)| v * x[j]).sum());
            }
        }
        out
    }

    pub fn gt_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, &zi) in self.g_lp.iter().zip(z) {
            for &(j, v) in r {
                out[j] += v * zi;
            }
        }
        let mut off = self.layout.lp;
        for blk in &self.g_soc {
            for row in &blk.rows {
                let zi = z[off];
                for (v, &j) in row.iter().zip(&blk.cols) {
                    out[j] += v * zi;
                }
                off += 1;
            }
        }
        out
    }
}

/// Diagonal scalings: `x = D x̃`, equality rows by `e_eq`, orthant rows by
/// `e_lp`, each cone block by one scalar, objective by `cost`.
#[derive(Clone, Debug)]
pub(crate) struct Equilibration {
    pub d: Vec<f64>,
    pub e_eq: Vec<f64>,
    /// One entry per row of `h` (uniform within each cone block).
    pub e_ineq: Vec<f64>,
    pub cost: f64,
}

impl Equilibration {
    pub fn identity(f: &StandardForm) -> Self {
        Self {
            d: vec![1.0; f.n],
            e_eq: vec![1.0; f.p()],
            e_ineq: vec![1.0; f.m()],
            cost: 1.0,
        }
    }

    /// Ruiz iterations on `[A; G]` followed by an objective normalisation.
    pub fn ruiz(f: &StandardForm, passes: usize) -> (StandardForm, Self) {
        let mut eq = Self::identity(f);
        let mut cur = f.clone();
        const LIMIT: f64 = 1e4;
        for _ in 0..passes {
            let mut col = vec![0.0f64; cur.n];
            let mut seen = |j: usize, v: f64| col[j] = col[j].max(v.abs());
            for r in cur.a.iter().chain(&cur.g_lp) {
                for &(j, v) in r {
                    seen(j, v);
                }
            }
            for blk in &cur.g_soc {
                for row in &blk.rows {
                    for (v, &j) in row.iter().zip(&blk.cols) {
                        seen(j, *v);
                    }
                }
            }
            let dcol: Vec<f64> = col
                .iter()
                .map(|&m| if m > 0.0 { 1.0 / m.sqrt() } else { 1.0 })
                .collect();
            let row_scale = |r: &SparseRow| {
                let m = r.iter().fold(0.0f64, |acc, &(_, v)| acc.max(v.abs()));
                if m > 0.0 {
                    1.0 / m.sqrt()
                } else {
                    1.0
                }
            };
            let e_eq: Vec<f64> = cur.a.iter().map(row_scale).collect();
            let mut e_ineq: Vec<f64> = cur.g_lp.iter().map(row_scale).collect();
            for blk in &cur.g_soc {
                let m = blk
                    .rows
                    .iter()
                    .flat_map(|r| r.iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                let e = if m > 0.0 { 1.0 / m.sqrt() } else { 1.0 };
                e_ineq.extend(std::iter::repeat_n(e, blk.rows.len()));
            }

            let ok = |total: f64, step: f64| (total * step).clamp(1.0 / LIMIT, LIMIT) / total;
            let dcol: Vec<f64> = dcol.iter().zip(&eq.d).map(|(&s, &t)| ok(t, s)).collect();
            let e_eq: Vec<f64> = e_eq.iter().zip(&eq.e_eq).map(|(&s, &t)| ok(t, s)).collect();
            let e_ineq: Vec<f64> = e_ineq.iter().zip(&eq.e_ineq).map(|(&s, &t)| ok(t, s)).collect();
            apply(&mut cur, &dcol, &e_eq, &e_ineq);
            eq.d.iter_mut().zip(&dcol).for_each(|(t, s)| *t *= s);
            eq.e_eq.iter_mut().zip(&e_eq).for_each(|(t, s)| *t *= s);
            eq.e_ineq.iter_mut().zip(&e_ineq).for_each(|(t, s)| *t *= s);
        }
        let cmax = cur.c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if cmax > 0.0 {
            eq.cost = (1.0 / cmax).clamp(1.0 / LIMIT, LIMIT);
            cur.c.iter_mut().for_each(|v| *v *= eq.cost);
        }
        (cur, eq)
    }

    pub fn unscale_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.d).map(|(v, d)| v * d).collect()
    }

    pub fn unscale_y(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.e_eq).map(|(v, e)| v * e / self.cost).collect()
    }

    pub fn unscale_z(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.e_ineq).map(|(v, e)| v * e / self.cost).collect()
    }

    pub fn unscale_s(&self, s: &[f64]) -> Vec<f64> {
        s.iter().zip(&self.e_ineq).map(|(v, e)| v / e).collect()
    }
}

fn apply(f: &mut StandardForm, d: &[f64], e_eq: &[f64], e_ineq: &[f64]) {
    for (r, &e) in f.a.iter_mut().zip(e_eq) {
        for (j, v) in r.iter_mut() {
            *v *= e * d[*j];
        }
    }
    for (bi, &e) in f.b.iter_mut().zip(e_eq) {
        *bi *= e;
    }
    for (r, &e) in f.g_lp.iter_mut().zip(e_ineq) {
        for (j, v) in r.iter_mut() {
            *v *= e * d[*j];
        }
    }
    let mut off = f.layout.lp;
    for blk in &mut f.g_soc {
        for row in &mut blk.rows {
            for (v, &j) in row.iter_mut().zip(&blk.cols) {
                *v *= e_ineq[off] * d[j];
            }
            off += 1;
        }
    }
    for (hi, &e) in f.h.iter_mut().zip(e_ineq) {
        *hi *= e;
    }
    for (ci, &dj) in f.c.iter_mut().zip(d) {
        *ci *= dj;
    }
}
