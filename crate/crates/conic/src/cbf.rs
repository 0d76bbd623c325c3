//! Conic Benchmark Format (CBF, version 3) export and import.
//!
//! Only the subset needed by [`ConicProblem`] is supported: one free variable
//! domain, minimisation, and the constraint cones `L=`, `L-`, `L+`, `F` and
//! `Q`. Each constraint row has the form `Σⱼ aᵢⱼ xⱼ + bᵢ ∈ K`; equalities are
//! written as `a'x - rhs ∈ L=`, inequalities as `a'x - rhs ∈ L-`, and every
//! cone block as its own `Q` chunk with all matrix entries (zeros included) so
//! that the block's column order survives a round trip.
//!
//! ```text
//! VER
//! 3
//!
//! OBJSENSE
//! MIN
//!
//! VAR
//! 2 1
//! F 2
//!
//! CON
//! 4 2
//! L- 1
//! Q 3
//! ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::problem::{ConeBlock, ConicProblem, LinearForm, LinearRow};
use crate::ConicError;

pub fn write(p: &ConicProblem) -> String {
    let mut out = String::new();
    let mut chunks: Vec<(&str, usize)> = Vec::new();
    if !p.equalities.is_empty() {
        chunks.push(("L=", p.equalities.len()));
    }
    if !p.inequalities.is_empty() {
        chunks.push(("L-", p.inequalities.len()));
    }
    for c in &p.cones {
        chunks.push(("Q", c.dim()));
    }
    let rows: usize = chunks.iter().map(|c| c.1).sum();

    let _ = writeln!(out, "VER\n3\n\nOBJSENSE\nMIN\n\nVAR\n{} 1\nF {}\n", p.num_vars, p.num_vars);
    let _ = writeln!(out, "CON\n{} {}", rows, chunks.len());
    for (kind, n) in &chunks {
        let _ = writeln!(out, "{kind} {n}");
    }
    out.push('\n');

    let obj: Vec<(usize, f64)> = p
        .objective
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| (j, *v))
        .collect();
    if !obj.is_empty() {
        let _ = writeln!(out, "OBJACOORD\n{}", obj.len());
        for (j, v) in obj {
            let _ = writeln!(out, "{j} {v:?}");
        }
        out.push('\n');
    }
    if p.objective_offset != 0.0 {
        let _ = writeln!(out, "OBJBCOORD\n{:?}\n", p.objective_offset);
    }

    let mut a: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<(usize, f64)> = Vec::new();
    let mut row = 0;
    for r in p.equalities.iter().chain(&p.inequalities) {
        for &(j, v) in &r.form.terms {
            a.push((row, j, v));
        }
        if r.rhs != 0.0 {
            b.push((row, -r.rhs));
        }
        row += 1;
    }
    for c in &p.cones {
        for (mrow, &g) in c.matrix.iter().zip(&c.offset) {
            for (&j, &v) in c.cols.iter().zip(mrow) {
                a.push((row, j, v));
            }
            if g != 0.0 {
                b.push((row, g));
            }
            row += 1;
        }
    }
    if !a.is_empty() {
        let _ = writeln!(out, "ACOORD\n{}", a.len());
        for (i, j, v) in a {
            let _ = writeln!(out, "{i} {j} {v:?}");
        }
        out.push('\n');
    }
    if !b.is_empty() {
        let _ = writeln!(out, "BCOORD\n{}", b.len());
        for (i, v) in b {
            let _ = writeln!(out, "{i} {v:?}");
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Self { inner: it.peekable() }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), ConicError> {
        self.inner.next().ok_or_else(|| ConicError::Parse {
            line: 0,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }

    fn fields<const N: usize>(&mut self, what: &str) -> Result<(usize, [&'a str; N]), ConicError> {
        let (line, text) = self.next_line(what)?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != N {
            return Err(ConicError::Parse {
                line,
                msg: format!("expected {N} fields for {what}, found {}", parts.len()),
            });
        }
        Ok((line, parts.try_into().expect("length checked")))
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, ConicError> {
    s.parse().map_err(|_| ConicError::Parse {
        line,
        msg: format!("invalid number `{s}`"),
    })
}

pub fn read(text: &str) -> Result<ConicProblem, ConicError> {
    let mut lines = Lines::new(text);
    let mut num_vars = None;
    let mut chunks: Vec<(String, usize)> = Vec::new();
    let mut objective: BTreeMap<usize, f64> = BTreeMap::new();
    let mut offset = 0.0;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut consts: BTreeMap<usize, f64> = BTreeMap::new();

    while let Some((line, key)) = lines.inner.next() {
        match key {
            "VER" => {
                let (l, [v]) = lines.fields::<1>("version")?;
                if num::<u32>(l, v)? > 3 {
                    return Err(ConicError::Parse {
                        line: l,
                        msg: format!("unsupported version {v}"),
                    });
                }
            }
            "OBJSENSE" => {
                let (l, [s]) = lines.fields::<1>("objective sense")?;
                if s != "MIN" {
                    return Err(ConicError::Parse {
                        line: l,
                        msg: "only MIN is supported".into(),
                    });
                }
            }
            "VAR" => {
                let (l, [n, k]) = lines.fields::<2>("variable header")?;
                let n: usize = num(l, n)?;
                let k: usize = num(l, k)?;
                for _ in 0..k {
                    let (l, [kind, _]) = lines.fields::<2>("variable domain")?;
                    if kind != "F" {
                        return Err(ConicError::Parse {
                            line: l,
                            msg: format!("unsupported variable domain `{kind}`"),
                        });
                    }
                }
                num_vars = Some(n);
            }
            "CON" => {
                let (l, [_, k]) = lines.fields::<2>("constraint header")?;
                for _ in 0..num::<usize>(l, k)? {
                    let (l, [kind, n]) = lines.fields::<2>("constraint cone")?;
                    chunks.push((kind.to_string(), num(l, n)?));
                }
            }
            "OBJACOORD" => {
                let (l, [n]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(l, n)? {
                    let (l, [j, v]) = lines.fields::<2>("objective entry")?;
                    *objective.entry(num(l, j)?).or_insert(0.0) += num::<f64>(l, v)?;
                }
            }
            "OBJBCOORD" => {
                let (l, [v]) = lines.fields::<1>("objective constant")?;
                offset = num(l, v)?;
            }
            "ACOORD" => {
                let (l, [n]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(l, n)? {
                    let (l, [i, j, v]) = lines.fields::<3>("matrix entry")?;
                    entries.push((num(l, i)?, num(l, j)?, num(l, v)?));
                }
            }
            "BCOORD" => {
                let (l, [n]) = lines.fields::<1>("entry count")?;
                for _ in 0..num::<usize>(l, n)? {
                    let (l, [i, v]) = lines.fields::<2>("constant entry")?;
                    *consts.entry(num(l, i)?).or_insert(0.0) += num::<f64>(l, v)?;
                }
            }
            other => {
                return Err(ConicError::Parse {
                    line,
                    msg: format!("unsupported section `{other}`"),
                })
            }
        }
    }

    let num_vars = num_vars.ok_or(ConicError::Parse {
        line: 0,
        msg: "missing VAR section".into(),
    })?;
    let mut p = ConicProblem::new(num_vars);
    p.objective_offset = offset;
    for (j, v) in objective {
        if j >= num_vars {
            return Err(ConicError::VariableOutOfRange { index: j, num_vars });
        }
        p.objective[j] = v;
    }

    let total: usize = chunks.iter().map(|c| c.1).sum();
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
    for (i, j, v) in entries {
        if i >= total {
            return Err(ConicError::Malformed(format!("row {i} outside {total} constraint rows")));
        }
        by_row[i].push((j, v));
    }
    let constant = |i: usize| consts.get(&i).copied().unwrap_or(0.0);

    let mut row = 0;
    for (kind, n) in chunks {
        match kind.as_str() {
            "L=" | "L-" | "L+" => {
                for i in row..row + n {
                    let sign = if kind == "L+" { -1.0 } else { 1.0 };
                    let r = LinearRow {
                        form: LinearForm {
                            terms: by_row[i].iter().map(|&(j, v)| (j, sign * v)).collect(),
                        },
                        rhs: -sign * constant(i),
                    };
                    if kind == "L=" {
                        p.equalities.push(r);
                    } else {
                        p.inequalities.push(r);
                    }
                }
            }
            "F" => {}
            "Q" => {
                let mut cols: Vec<usize> = Vec::new();
                for i in row..row + n {
                    for &(j, _) in &by_row[i] {
                        if !cols.contains(&j) {
                            cols.push(j);
                        }
                    }
                }
                let mut matrix = vec![vec![0.0; cols.len()]; n];
                for (r, i) in (row..row + n).enumerate() {
                    for &(j, v) in &by_row[i] {
                        let c = cols.iter().position(|&k| k == j).expect("collected above");
                        matrix[r][c] += v;
                    }
                }
                let offset = (row..row + n).map(constant).collect();
                p.cones.push(ConeBlock { cols, matrix, offset });
            }
            other => {
                return Err(ConicError::Malformed(format!("unsupported constraint cone `{other}`")));
            }
        }
        row += n;
    }
    p.validate()?;
    Ok(p)
}
