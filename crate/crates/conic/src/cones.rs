//! Cone arithmetic for the product `R₊^l × Q^{d₁} × … × Q^{d_k}`: Jordan
//! products, Nesterov-Todd scaling and maximal step lengths.

/// Slack/dual vectors store the `lp` orthant coordinates first, then each
/// second-order cone block contiguously.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub lp: usize,
    pub soc: Vec<usize>,
}

impl Layout {
    pub fn dim(&self) -> usize {
        self.lp + self.soc.iter().sum::<usize>()
    }

    /// Barrier degree: one per orthant coordinate, one per cone block.
    pub fn degree(&self) -> usize {
        self.lp + self.soc.len()
    }

    /// `(offset, dim)` of each cone block.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.soc.iter().scan(self.lp, |off, &d| {
            let start = *off;
            *off += d;
            Some((start, d))
        })
    }

    /// Minimal "eigenvalue" over all cones: `min uᵢ` and `u₀ - ‖u₁‖`.
    pub fn min_eig(&self, u: &[f64]) -> f64 {
        let lp = u[..self.lp].iter().copied().fold(f64::INFINITY, f64::min);
        self.blocks()
            .map(|(o, d)| u[o] - norm(&u[o + 1..o + d]))
            .fold(lp, f64::min)
    }

    /// `u + shift·e` where `e` is the cone identity.
    pub fn add_identity(&self, u: &mut [f64], shift: f64) {
        for v in &mut u[..self.lp] {
            *v += shift;
        }
        for (o, _) in self.blocks() {
            u[o] += shift;
        }
    }

    /// Pushes `u` strictly inside the cone if it is not already.
    pub fn shift_inside(&self, u: &mut [f64]) {
        let m = self.min_eig(u);
        if m <= 1e-8 {
            self.add_identity(u, 1.0 - m);
        }
    }

    /// Jordan product `u ∘ v`.
    pub fn circ(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for i in 0..self.lp {
            out[i] = u[i] * v[i];
        }
        for (o, d) in self.blocks() {
            out[o] = dot(&u[o..o + d], &v[o..o + d]);
            for i in 1..d {
                out[o + i] = u[o] * v[o + i] + v[o] * u[o + i];
            }
        }
        out
    }

    /// Solves `λ ∘ x = r` for `x`, with `λ` strictly inside the cone.
    pub fn circ_solve(&self, lambda: &[f64], r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; r.len()];
        for i in 0..self.lp {
            out[i] = r[i] / lambda[i];
        }
        for (o, d) in self.blocks() {
            let l = &lambda[o..o + d];
            let rr = &r[o..o + d];
            let det = l[0] * l[0] - dot(&l[1..], &l[1..]);
            let x0 = (l[0] * rr[0] - dot(&l[1..], &rr[1..])) / det;
            out[o] = x0;
            for i in 1..d {
                out[o + i] = (rr[i] - x0 * l[i]) / l[0];
            }
        }
        out
    }

    /// Largest `α >= 0` with `u + α·du` in the cone (capped at `cap`).
    pub fn max_step(&self, u: &[f64], du: &[f64], cap: f64) -> f64 {
        let mut alpha = cap;
        for i in 0..self.lp {
            if du[i] < 0.0 {
                alpha = alpha.min(-u[i] / du[i]);
            }
        }
        for (o, d) in self.blocks() {
            alpha = alpha.min(soc_step(&u[o..o + d], &du[o..o + d], cap));
        }
        alpha.max(0.0)
    }
}

/// Exit point of the ray `u + α·d` from the second-order cone, for `u` inside.
fn soc_step(u: &[f64], d: &[f64], cap: f64) -> f64 {
    // f(α) = (u₀+αd₀)² - ‖u₁+αd₁‖² = a α² + 2b α + c
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = u[0] * d[0] - dot(&u[1..], &d[1..]);
    let c = (u[0] * u[0] - dot(&u[1..], &u[1..])).max(0.0);
    let mut best = cap;
    if u[0] + cap * d[0] < 0.0 {
        best = best.min(-u[0] / d[0]);
    }
    let scale = a.abs().max(b.abs()).max(c);
    if scale == 0.0 {
        return best;
    }
    if a.abs() <= 1e-14 * scale {
        if b < 0.0 {
            best = best.min(-c / (2.0 * b));
        }
        return best;
    }
    let disc = b * b - a * c;
    if disc < 0.0 {
        // f keeps the sign of c > 0 everywhere.
        return best;
    }
    let sq = disc.sqrt();
    // Numerically stable roots of a α² + 2b α + c.
    let q = -(b + b.signum() * sq);
    let roots = [q / a, if q != 0.0 { c / q } else { f64::INFINITY }];
    for r in roots {
        if r > 0.0 && r.is_finite() {
            best = best.min(r);
        }
    }
    best
}

/// Nesterov-Todd scaling `W` with `W z = W⁻¹ s = λ`.
#[derive(Clone, Debug)]
pub(crate) struct NtScaling {
    /// Orthant part: `W = diag(√(s/z))`.
    lp_d: Vec<f64>,
    /// Per cone block: `W = η (2 v vᵀ - J)` with `vᵀ J v = 1`.
    soc: Vec<(f64, Vec<f64>)>,
    pub lambda: Vec<f64>,
}

impl NtScaling {
    pub fn new(layout: &Layout, s: &[f64], z: &[f64]) -> Option<Self> {
        let mut lp_d = Vec::with_capacity(layout.lp);
        for i in 0..layout.lp {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            lp_d.push((s[i] / z[i]).sqrt());
        }
        let mut soc = Vec::with_capacity(layout.soc.len());
        for (o, d) in layout.blocks() {
            let sb = &s[o..o + d];
            let zb = &z[o..o + d];
            let sn = jnorm(sb)?;
            let zn = jnorm(zb)?;
            let eta = (sn / zn).sqrt();
            let s_bar: Vec<f64> = sb.iter().map(|v| v / sn).collect();
            let z_bar: Vec<f64> = zb.iter().map(|v| v / zn).collect();
            let gamma = ((1.0 + dot(&s_bar, &z_bar)) / 2.0).sqrt();
            let mut w: Vec<f64> = (0..d)
                .map(|i| {
                    let jz = if i == 0 { z_bar[0] } else { -z_bar[i] };
                    (s_bar[i] + jz) / (2.0 * gamma)
                })
                .collect();
            // Re-normalise so that wᵀ J w = 1 exactly.
            let wn = jnorm(&w)?;
            for v in &mut w {
                *v /= wn;
            }
            // Hyperbolic reflection vector v = (w + e)/√(2(w₀ + 1)); W = η(2vvᵀ - J).
            let denom = (2.0 * (w[0] + 1.0)).sqrt();
            w[0] += 1.0;
            for v in &mut w {
                *v /= denom;
            }
            soc.push((eta, w));
        }
        let mut scaling = Self {
            lp_d,
            soc,
            lambda: Vec::new(),
        };
        scaling.lambda = scaling.apply(layout, z);
        Some(scaling)
    }

    /// `W = I`, used to compute the starting point.
    pub fn identity(layout: &Layout, z: &[f64]) -> Option<Self> {
        let soc = layout
            .soc
            .iter()
            .map(|&d| {
                let mut w = vec![0.0; d];
                w[0] = 1.0;
                (1.0, w)
            })
            .collect();
        Some(Self {
            lp_d: vec![1.0; layout.lp],
            soc,
            lambda: z.to_vec(),
        })
    }

    /// `W v`
    pub fn apply(&self, layout: &Layout, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..layout.lp {
            out[i] = self.lp_d[i] * v[i];
        }
        for ((o, d), (eta, w)) in layout.blocks().zip(&self.soc) {
            let vb = &v[o..o + d];
            let wv = dot(w, vb);
            for i in 0..d {
                let jv = if i == 0 { vb[0] } else { -vb[i] };
                out[o + i] = eta * (2.0 * w[i] * wv - jv);
            }
        }
        out
    }

    /// `W⁻¹ v`
    pub fn apply_inv(&self, layout: &Layout, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..layout.lp {
            out[i] = v[i] / self.lp_d[i];
        }
        for ((o, d), (eta, w)) in layout.blocks().zip(&self.soc) {
            self.soc_inv(o, d, *eta, w, v, &mut out);
        }
        out
    }

    fn soc_inv(&self, o: usize, d: usize, eta: f64, w: &[f64], v: &[f64], out: &mut [f64]) {
        let vb = &v[o..o + d];
        // J w and wᵀ J v
        let wjv = w[0] * vb[0] - dot(&w[1..], &vb[1..]);
        for i in 0..d {
            let jw = if i == 0 { w[0] } else { -w[i] };
            let jv = if i == 0 { vb[0] } else { -vb[i] };
            out[o + i] = (2.0 * jw * wjv - jv) / eta;
        }
    }

    /// `W⁻¹` applied to a vector living only on cone block `k` (local coordinates).
    pub fn block_inv(&self, k: usize, v: &[f64]) -> Vec<f64> {
        let (eta, w) = &self.soc[k];
        let mut out = vec![0.0; v.len()];
        self.soc_inv(0, v.len(), *eta, w, v, &mut out);
        out
    }

    pub fn lp_weight(&self, i: usize) -> f64 {
        self.lp_d[i]
    }
}

fn jnorm(u: &[f64]) -> Option<f64> {
    let q = u[0] * u[0] - dot(&u[1..], &u[1..]);
    if u[0] > 0.0 && q > 0.0 {
        Some(q.sqrt())
    } else {
        None
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
