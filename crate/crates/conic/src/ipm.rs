//! Primal-dual interior-point method on the homogeneous self-dual embedding
//! with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cones::{dot, Layout, NtScaling};
use crate::problem::ConicProblem;
use crate::scaling::{Equilibration, StandardForm};
use crate::ConicError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub max_iters: usize,
    /// Relative primal/dual residual required for `Optimal`.
    pub feas_tol: f64,
    pub abs_gap_tol: f64,
    pub rel_gap_tol: f64,
    pub time_limit: Option<Duration>,
    pub equilibrate: bool,
    pub ruiz_passes: usize,
    pub static_reg: f64,
    pub refine_steps: usize,
    pub step_fraction: f64,
    /// Per-iteration progress on stderr.
    pub verbose: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iters: 100,
            feas_tol: 1e-8,
            abs_gap_tol: 1e-8,
            rel_gap_tol: 1e-7,
            time_limit: Some(Duration::from_secs(300)),
            equilibrate: true,
            ruiz_passes: 15,
            static_reg: 1e-10,
            refine_steps: 8,
            step_fraction: 0.99,
            verbose: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Primal point (best iterate when not `Optimal`).
    pub x: Vec<f64>,
    /// Equality multipliers.
    pub y: Vec<f64>,
    /// Inequality and cone multipliers, orthant rows first.
    pub z: Vec<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub solve_time: Duration,
    pub timed_out: bool,
    pub message: Option<String>,
}

impl SolveReport {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct Metrics {
    pres: f64,
    dres: f64,
    gap: f64,
    rel_gap: f64,
}

impl Metrics {
    fn merit(&self) -> f64 {
        self.pres.max(self.dres).max(self.rel_gap.min(self.gap))
    }
}

/// Factorised reduced KKT system for one scaling.
struct Kkt<'a> {
    f: &'a StandardForm,
    w: &'a NtScaling,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    refine: usize,
}

impl<'a> Kkt<'a> {
    fn new(f: &'a StandardForm, w: &'a NtScaling, reg: f64, refine: usize) -> Option<Self> {
        let n = f.n;
        let p = f.p();
        let mut k = DMatrix::<f64>::zeros(n + p, n + p);
        // H = Gᵀ W⁻² G, assembled per block.
        for (i, row) in f.g_lp.iter().enumerate() {
            let wi = 1.0 / (w.lp_weight(i) * w.lp_weight(i));
            for &(j, a) in row {
                for &(l, b) in row {
                    k[(j, l)] += wi * a * b;
                }
            }
        }
        for (bi, blk) in f.g_soc.iter().enumerate() {
            let dim = blk.rows.len();
            let scaled: Vec<Vec<f64>> = (0..blk.cols.len())
                .map(|c| {
                    let col: Vec<f64> = (0..dim).map(|r| blk.rows[r][c]).collect();
                    w.block_inv(bi, &col)
                })
                .collect();
            for (a, ca) in scaled.iter().enumerate() {
                for (b, cb) in scaled.iter().enumerate().skip(a) {
                    let v = dot(ca, cb);
                    k[(blk.cols[a], blk.cols[b])] += v;
                    if a != b {
                        k[(blk.cols[b], blk.cols[a])] += v;
                    }
                }
            }
        }
        for i in 0..n {
            k[(i, i)] += reg;
        }
        for (i, row) in f.a.iter().enumerate() {
            for &(j, v) in row {
                k[(n + i, j)] += v;
                k[(j, n + i)] += v;
            }
            k[(n + i, n + i)] -= reg;
        }
        let lu = k.lu();
        if !lu.is_invertible() {
            return None;
        }
        Some(Self { f, w, lu, refine })
    }

    fn w2inv(&self, v: &[f64]) -> Vec<f64> {
        let l = &self.f.layout;
        self.w.apply_inv(l, &self.w.apply_inv(l, v))
    }

    fn reduced_solve(&self, r1: &[f64], r2: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.f.n;
        let rhs = DVector::from_iterator(n + r2.len(), r1.iter().chain(r2).copied());
        let sol = self.lu.solve(&rhs)?;
        Some((sol.rows(0, n).iter().copied().collect(), sol.rows(n, r2.len()).iter().copied().collect()))
    }

    /// One pass of the reduced elimination, no refinement.
    fn eliminate(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let f = self.f;
        // z = W⁻²(Gx - r3)  ⇒  (GᵀW⁻²G) x + Aᵀy = r1 + GᵀW⁻² r3,  Ax = r2.
        let g_r3 = f.gt_mul(&self.w2inv(r3));
        let rr1: Vec<f64> = r1.iter().zip(&g_r3).map(|(a, b)| a + b).collect();
        let (x, y) = self.reduced_solve(&rr1, r2)?;
        let gx = f.g_mul(&x);
        let diff: Vec<f64> = gx.iter().zip(r3).map(|(a, b)| a - b).collect();
        let z = self.w2inv(&diff);
        Some((x, y, z))
    }

    /// Solves `[0 Aᵀ Gᵀ; A 0 0; G 0 -W²] (x, y, z) = (r1, r2, r3)` with
    /// iterative refinement on the full system.
    fn solve(&self, r1: &[f64], r2: &[f64], r3: &[f64]) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let f = self.f;
        let l = &f.layout;
        let (mut x, mut y, mut z) = self.eliminate(r1, r2, r3)?;
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let scale = inf(r1).max(inf(r2)).max(inf(r3)).max(1e-300);
        for _ in 0..self.refine {
            let aty = f.at_mul(&y);
            let gtz = f.gt_mul(&z);
            let e1: Vec<f64> = (0..f.n).map(|i| r1[i] - aty[i] - gtz[i]).collect();
            let ax = f.a_mul(&x);
            let e2: Vec<f64> = r2.iter().zip(&ax).map(|(a, b)| a - b).collect();
            let gx = f.g_mul(&x);
            let w2z = self.w.apply(l, &self.w.apply(l, &z));
            let e3: Vec<f64> = (0..f.m()).map(|i| r3[i] - gx[i] + w2z[i]).collect();
            let err = inf(&e1).max(inf(&e2)).max(inf(&e3));
            if err <= 1e-15 * scale {
                break;
            }
            let (dx, dy, dz) = self.eliminate(&e1, &e2, &e3)?;
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
            z.iter_mut().zip(&dz).for_each(|(a, b)| *a += b);
        }
        if x.iter().chain(&y).chain(&z).any(|v| !v.is_finite()) {
            return None;
        }
        Some((x, y, z))
    }
}

/// Solves `problem` to the tolerances in `settings`.
pub fn solve(problem: &ConicProblem, settings: &Settings) -> Result<SolveReport, ConicError> {
    problem.validate()?;
    let start = Instant::now();
    let original = StandardForm::from_problem(problem);
    let (form, eq) = if settings.equilibrate {
        Equilibration::ruiz(&original, settings.ruiz_passes)
    } else {
        (original.clone(), Equilibration::identity(&original))
    };
    let mut solver = Solver {
        f: &form,
        orig: &original,
        eq: &eq,
        settings,
        start,
    };
    let mut report = solver.run();
    report.objective += problem.objective_offset;
    Ok(report)
}

struct Solver<'a> {
    f: &'a StandardForm,
    orig: &'a StandardForm,
    eq: &'a Equilibration,
    settings: &'a Settings,
    start: Instant,
}

impl Solver<'_> {
    fn layout(&self) -> &Layout {
        &self.f.layout
    }

    fn initial_point(&self) -> Option<Iterate> {
        let f = self.f;
        let l = self.layout();
        let ones = vec![1.0; f.m()];
        let id = NtScaling::identity(l, &ones)?;
        let kkt = Kkt::new(f, &id, self.settings.static_reg.max(1e-8), self.settings.refine_steps)?;
        // Primal: min ‖s‖ s.t. Gx + s = h, Ax = b.
        let zero_n = vec![0.0; f.n];
        let (x, _, zp) = kkt.solve(&zero_n, &f.b, &f.h)?;
        let mut s: Vec<f64> = zp.iter().map(|v| -v).collect();
        l.shift_inside(&mut s);
        // Dual: min ‖z‖ s.t. Gᵀz + Aᵀy + c = 0.
        let neg_c: Vec<f64> = f.c.iter().map(|v| -v).collect();
        let (_, y, mut z) = kkt.solve(&neg_c, &vec![0.0; f.p()], &vec![0.0; f.m()])?;
        l.shift_inside(&mut z);
        Some(Iterate {
            x,
            y,
            z,
            s,
            tau: 1.0,
            kappa: 1.0,
        })
    }

    fn metrics(&self, it: &Iterate) -> Metrics {
        let o = self.orig;
        let x = self.eq.unscale_x(&it.x);
        let y = self.eq.unscale_y(&it.y);
        let z = self.eq.unscale_z(&it.z);
        let s = self.eq.unscale_s(&it.s);
        let tau = it.tau;
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let ax = o.a_mul(&x);
        let r_eq: Vec<f64> = ax.iter().zip(&o.b).map(|(a, b)| a / tau - b).collect();
        let gx = o.g_mul(&x);
        let r_in: Vec<f64> = (0..o.m()).map(|i| (gx[i] + s[i]) / tau - o.h[i]).collect();
        let pres = (inf(&r_eq) / (1.0 + inf(&o.b))).max(inf(&r_in) / (1.0 + inf(&o.h)));
        let aty = o.at_mul(&y);
        let gtz = o.gt_mul(&z);
        let r_d: Vec<f64> = (0..o.n).map(|i| (aty[i] + gtz[i]) / tau + o.c[i]).collect();
        let dres = inf(&r_d) / (1.0 + inf(&o.c));
        let pcost = dot(&o.c, &x) / tau;
        let dcost = -(dot(&o.b, &y) + dot(&o.h, &z)) / tau;
        let gap = dot(&s, &z) / (tau * tau);
        let denom = pcost.abs().min(dcost.abs());
        let rel_gap = if denom > 1e-12 { gap / denom } else { f64::INFINITY };
        Metrics {
            pres,
            dres,
            gap: gap.abs(),
            rel_gap,
        }
    }

    /// Certificates of infeasibility from the unscaled ray.
    fn certificate(&self, it: &Iterate) -> Option<SolveStatus> {
        let o = self.orig;
        let tol = self.settings.feas_tol;
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let y = self.eq.unscale_y(&it.y);
        let z = self.eq.unscale_z(&it.z);
        let hz_by = dot(&o.h, &z) + dot(&o.b, &y);
        if hz_by < 0.0 {
            let aty = o.at_mul(&y);
            let gtz = o.gt_mul(&z);
            let r: Vec<f64> = aty.iter().zip(&gtz).map(|(a, b)| a + b).collect();
            if inf(&r) / (-hz_by) < tol {
                return Some(SolveStatus::Infeasible);
            }
        }
        let x = self.eq.unscale_x(&it.x);
        let s = self.eq.unscale_s(&it.s);
        let cx = dot(&o.c, &x);
        if cx < 0.0 {
            let ax = o.a_mul(&x);
            let gx = o.g_mul(&x);
            let r_in: Vec<f64> = gx.iter().zip(&s).map(|(a, b)| a + b).collect();
            if inf(&ax).max(inf(&r_in)) / (-cx) < tol {
                return Some(SolveStatus::Unbounded);
            }
        }
        None
    }

    fn report(&self, status: SolveStatus, it: &Iterate, m: Metrics, iterations: usize, message: Option<String>) -> SolveReport {
        let scale = |v: Vec<f64>| v.into_iter().map(|a| a / it.tau).collect::<Vec<_>>();
        let (x, y, z) = match status {
            // Rays are reported unnormalised.
            SolveStatus::Infeasible | SolveStatus::Unbounded => (
                self.eq.unscale_x(&it.x),
                self.eq.unscale_y(&it.y),
                self.eq.unscale_z(&it.z),
            ),
            _ => (
                scale(self.eq.unscale_x(&it.x)),
                scale(self.eq.unscale_y(&it.y)),
                scale(self.eq.unscale_z(&it.z)),
            ),
        };
        let timed_out = message.as_deref() == Some("time limit reached");
        SolveReport {
            status,
            objective: dot(&self.orig.c, &x),
            x,
            y,
            z,
            primal_residual: m.pres,
            dual_residual: m.dres,
            gap: m.gap,
            iterations,
            solve_time: self.start.elapsed(),
            timed_out,
            message,
        }
    }

    fn run(&mut self) -> SolveReport {
        let settings = self.settings;
        let Some(mut it) = self.initial_point() else {
            let empty = Iterate {
                x: vec![0.0; self.f.n],
                y: vec![0.0; self.f.p()],
                z: vec![0.0; self.f.m()],
                s: vec![0.0; self.f.m()],
                tau: 1.0,
                kappa: 1.0,
            };
            let m = self.metrics(&empty);
            return self.report(
                SolveStatus::NumericalFailure,
                &empty,
                m,
                0,
                Some("could not factor the initial KKT system".into()),
            );
        };
        let mut best: Option<(f64, Iterate, Metrics)> = None;
        let mut failure: Option<String> = None;

        for k in 0..=settings.max_iters {
            let m = self.metrics(&it);
            if settings.verbose {
                eprintln!(
                    "{k:3} pres {:.2e} dres {:.2e} gap {:.2e} rel {:.2e} tau {:.2e} kappa {:.2e}",
                    m.pres, m.dres, m.gap, m.rel_gap, it.tau, it.kappa
                );
            }
            let converged = m.pres < settings.feas_tol
                && m.dres < settings.feas_tol
                && (m.gap < settings.abs_gap_tol || m.rel_gap < settings.rel_gap_tol);
            if converged {
                return self.report(SolveStatus::Optimal, &it, m, k, None);
            }
            if let Some(status) = self.certificate(&it) {
                return self.report(status, &it, m, k, None);
            }
            if best.as_ref().is_none_or(|(b, _, _)| m.merit() < *b) {
                best = Some((m.merit(), clone_iterate(&it), m));
            }
            if k == settings.max_iters {
                failure = Some("iteration limit reached".into());
                break;
            }
            if settings.time_limit.is_some_and(|t| self.start.elapsed() > t) {
                failure = Some("time limit reached".into());
                break;
            }
            match self.step(&it) {
                Some(next) => it = next,
                None => {
                    failure = Some("search direction could not be computed".into());
                    break;
                }
            }
        }
        let (_, bit, bm) = best.expect("at least one iterate evaluated");
        self.report(SolveStatus::NumericalFailure, &bit, bm, settings.max_iters, failure)
    }

    fn step(&self, it: &Iterate) -> Option<Iterate> {
        let f = self.f;
        let l = self.layout();
        let w = NtScaling::new(l, &it.s, &it.z)?;
        let kkt = Kkt::new(f, &w, self.settings.static_reg, self.settings.refine_steps)?;

        let deg = l.degree() as f64;
        let mu = (dot(&it.s, &it.z) + it.tau * it.kappa) / (deg + 1.0);

        // Residuals of the embedding.
        let aty = f.at_mul(&it.y);
        let gtz = f.gt_mul(&it.z);
        let r1: Vec<f64> = (0..f.n).map(|i| aty[i] + gtz[i] + f.c[i] * it.tau).collect();
        let ax = f.a_mul(&it.x);
        let r2: Vec<f64> = (0..f.p()).map(|i| -ax[i] + f.b[i] * it.tau).collect();
        let gx = f.g_mul(&it.x);
        let r3: Vec<f64> = (0..f.m()).map(|i| -gx[i] + f.h[i] * it.tau - it.s[i]).collect();
        let r4 = -dot(&f.c, &it.x) - dot(&f.b, &it.y) - dot(&f.h, &it.z) - it.kappa;

        // Direction for the dτ coefficient, shared by both solves.
        let neg_c: Vec<f64> = f.c.iter().map(|v| -v).collect();
        let (u1x, u1y, u1z) = kkt.solve(&neg_c, &f.b, &f.h)?;
        let denom_base = -(dot(&f.c, &u1x) + dot(&f.b, &u1y) + dot(&f.h, &u1z));

        let lambda = &w.lambda;
        let lam_sq = l.circ(lambda, lambda);

        let direction = |eta: f64, rc: &[f64], rk: f64| -> Option<Direction> {
            let xi = l.circ_solve(lambda, rc);
            let w_xi = w.apply(l, &xi);
            let b1: Vec<f64> = r1.iter().map(|v| -eta * v).collect();
            let b2: Vec<f64> = r2.iter().map(|v| eta * v).collect();
            let b3: Vec<f64> = r3.iter().zip(&w_xi).map(|(v, wx)| eta * v - wx).collect();
            let (u0x, u0y, u0z) = kkt.solve(&b1, &b2, &b3)?;
            let num = -eta * r4 + rk / it.tau + dot(&f.c, &u0x) + dot(&f.b, &u0y) + dot(&f.h, &u0z);
            let den = it.kappa / it.tau + denom_base;
            let dtau = num / den;
            if !dtau.is_finite() {
                return None;
            }
            let dx: Vec<f64> = u0x.iter().zip(&u1x).map(|(a, b)| a + dtau * b).collect();
            let dy: Vec<f64> = u0y.iter().zip(&u1y).map(|(a, b)| a + dtau * b).collect();
            let dz: Vec<f64> = u0z.iter().zip(&u1z).map(|(a, b)| a + dtau * b).collect();
            // ds = W(ξ - W dz)
            let w_dz = w.apply(l, &dz);
            let inner: Vec<f64> = xi.iter().zip(&w_dz).map(|(a, b)| a - b).collect();
            let ds = w.apply(l, &inner);
            let dkappa = (rk - it.kappa * dtau) / it.tau;
            Some(Direction {
                x: dx,
                y: dy,
                z: dz,
                s: ds,
                tau: dtau,
                kappa: dkappa,
            })
        };

        let max_step = |d: &Direction, cap: f64| -> f64 {
            let mut a = l.max_step(&it.s, &d.s, cap).min(l.max_step(&it.z, &d.z, cap));
            if d.tau < 0.0 {
                a = a.min(-it.tau / d.tau);
            }
            if d.kappa < 0.0 {
                a = a.min(-it.kappa / d.kappa);
            }
            a
        };

        // Predictor.
        let rc_aff: Vec<f64> = lam_sq.iter().map(|v| -v).collect();
        let aff = direction(1.0, &rc_aff, -it.tau * it.kappa)?;
        let alpha_aff = max_step(&aff, 1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector with second-order term.
        let ws_aff = w.apply_inv(l, &aff.s);
        let wz_aff = w.apply(l, &aff.z);
        let cross = l.circ(&ws_aff, &wz_aff);
        let mut rc: Vec<f64> = lam_sq.iter().zip(&cross).map(|(a, b)| -a - b).collect();
        let mut e = vec![0.0; rc.len()];
        l.add_identity(&mut e, sigma * mu);
        rc.iter_mut().zip(&e).for_each(|(a, b)| *a += b);
        let rk = -it.tau * it.kappa - aff.tau * aff.kappa + sigma * mu;
        let dir = direction(1.0 - sigma, &rc, rk)?;
        let alpha = (self.settings.step_fraction * max_step(&dir, 1.0 / self.settings.step_fraction)).min(1.0);
        if !(alpha > 1e-12) {
            return None;
        }

        let upd = |u: &[f64], du: &[f64]| -> Vec<f64> { u.iter().zip(du).map(|(a, b)| a + alpha * b).collect() };
        Some(Iterate {
            x: upd(&it.x, &dir.x),
            y: upd(&it.y, &dir.y),
            z: upd(&it.z, &dir.z),
            s: upd(&it.s, &dir.s),
            tau: it.tau + alpha * dir.tau,
            kappa: it.kappa + alpha * dir.kappa,
        })
    }
}

fn clone_iterate(it: &Iterate) -> Iterate {
    Iterate {
        x: it.x.clone(),
        y: it.y.clone(),
        z: it.z.clone(),
        s: it.s.clone(),
        tau: it.tau,
        kappa: it.kappa,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ConvexQcqp, LinearForm, LinearRow, QcqpConstraint, QuadAtom};

    fn row(terms: &[(usize, f64)], rhs: f64) -> LinearRow {
        LinearRow {
            form: LinearForm::from_terms(terms.iter().copied()),
            rhs,
        }
    }

    #[test]
    fn bound_constrained_lp() {
        // min x  s.t.  x >= 1
        let mut p = ConicProblem::new(1);
        p.objective[0] = 1.0;
        p.inequalities.push(row(&[(0, -1.0)], -1.0));
        let r = solve(&p, &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut p = ConicProblem::new(1);
        p.objective[0] = 1.0;
        p.inequalities.push(row(&[(0, 1.0)], 0.0));
        p.inequalities.push(row(&[(0, -1.0)], -1.0));
        let r = solve(&p, &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible, "{r:?}");
    }

    #[test]
    fn unbounded_lp_detected() {
        // min x  s.t.  x <= 1
        let mut p = ConicProblem::new(1);
        p.objective[0] = 1.0;
        p.inequalities.push(row(&[(0, 1.0)], 1.0));
        let r = solve(&p, &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded, "{r:?}");
    }

    #[test]
    fn epigraph_of_square() {
        // min t  s.t.  x² <= t, x >= 3
        let mut q = ConvexQcqp::new(2);
        q.objective = LinearForm::from_terms([(1, 1.0)]);
        q.push(QcqpConstraint::le(LinearForm::from_terms([(1, -1.0)]), 0.0, vec![QuadAtom::square(1.0, 0)]));
        q.bound(0, Some(3.0), None);
        let r = solve(&q.to_conic().unwrap(), &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal, "{r:?}");
        assert!((r.objective - 9.0).abs() < 1e-6, "{r:?}");
        assert!((r.x[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn disc_minimum() {
        // min x s.t. x² <= 4
        let mut q = ConvexQcqp::new(1);
        q.objective = LinearForm::from_terms([(0, 1.0)]);
        q.push(QcqpConstraint::le(LinearForm::new(), -4.0, vec![QuadAtom::square(1.0, 0)]));
        let r = solve(&q.to_conic().unwrap(), &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[0] + 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn equality_constrained_simplex() {
        // min -x0 - 2x1 s.t. x0 + x1 = 1, x >= 0  →  (0, 1)
        let mut p = ConicProblem::new(2);
        p.objective = vec![-1.0, -2.0];
        p.equalities.push(row(&[(0, 1.0), (1, 1.0)], 1.0));
        p.inequalities.push(row(&[(0, -1.0)], 0.0));
        p.inequalities.push(row(&[(1, -1.0)], 0.0));
        let r = solve(&p, &Settings::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.x[1] - 1.0).abs() < 1e-7 && r.x[0].abs() < 1e-7, "{r:?}");
        assert!((r.objective + 2.0).abs() < 1e-7);
    }
}
