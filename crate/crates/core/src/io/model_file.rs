//! Line-oriented text format for interval POMDPs.
//!
//! ```text
//! # comment
//! states 3
//! actions 1
//! observations 1
//! init 0
//! obs 0 0
//! trans 0 0 1 0.3 0.7      # state action successor lower upper
//! cost 0 0 1.5             # state action cost (default 0)
//! target 1
//! goal 1
//! ```
//!
//! Records are whitespace separated and may appear in any order. Every state
//! needs an `obs` record and every state-action pair at least one `trans`
//! record.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Interval, IntervalPomdp, DIST_TOL};

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

fn parse_err(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.line,
        column: pos.column,
        msg: msg.into(),
    }
}

struct Token<'a> {
    text: &'a str,
    pos: Pos,
}

impl Token<'_> {
    fn index(&self, what: &str, bound: Option<(usize, &str)>) -> Result<usize> {
        let v: usize = self
            .text
            .parse()
            .map_err(|_| parse_err(self.pos, format!("expected {what} index, found `{}`", self.text)))?;
        if let Some((n, header)) = bound {
            if v >= n {
                return Err(parse_err(self.pos, format!("{what} {v} out of range (`{header} {n}`)")));
            }
        }
        Ok(v)
    }

    fn number(&self, what: &str) -> Result<f64> {
        let v: f64 = self
            .text
            .parse()
            .map_err(|_| parse_err(self.pos, format!("expected {what}, found `{}`", self.text)))?;
        if !v.is_finite() {
            return Err(parse_err(self.pos, format!("{what} must be finite")));
        }
        Ok(v)
    }
}

fn tokenize(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let content = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices().chain(std::iter::once((content.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(b)) => {
                out.push(Token {
                    text: &content[b..i],
                    pos: Pos {
                        line: line_no,
                        column: content[..b].chars().count() + 1,
                    },
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

struct Record<'a> {
    keyword: Token<'a>,
    args: Vec<Token<'a>>,
}

/// Parses a model file and validates the resulting model. Syntax errors carry
/// line and column; semantic errors name the offending record.
pub fn parse_model(text: &str) -> Result<IntervalPomdp> {
    let mut records = Vec::new();
    let mut header: BTreeMap<&str, (usize, Pos)> = BTreeMap::new();
    let mut last_line = 0;
    for (i, line) in text.lines().enumerate() {
        last_line = i + 1;
        let mut tokens = tokenize(line, i + 1).into_iter();
        let Some(keyword) = tokens.next() else { continue };
        let args: Vec<Token> = tokens.collect();
        let arity = match keyword.text {
            "states" | "actions" | "observations" | "init" | "target" | "goal" => 1,
            "obs" => 2,
            "cost" => 3,
            "trans" => 5,
            other => return Err(parse_err(keyword.pos, format!("unknown record `{other}`"))),
        };
        if args.len() != arity {
            let pos = args.get(arity).map_or(keyword.pos, |t| t.pos);
            return Err(parse_err(
                pos,
                format!("`{}` takes {arity} field(s), found {}", keyword.text, args.len()),
            ));
        }
        if matches!(keyword.text, "states" | "actions" | "observations") {
            let n = args[0].index("count", None)?;
            if n == 0 {
                return Err(parse_err(args[0].pos, format!("`{}` must be positive", keyword.text)));
            }
            if header.insert(keyword.text, (n, keyword.pos)).is_some() {
                return Err(parse_err(keyword.pos, format!("`{}` declared twice", keyword.text)));
            }
        } else {
            records.push(Record { keyword, args });
        }
    }
    let eof = Pos {
        line: last_line + 1,
        column: 1,
    };
    let count = |name: &str| {
        header
            .get(name)
            .map(|h| h.0)
            .ok_or_else(|| parse_err(eof, format!("missing `{name}` record")))
    };
    let (ns, na, nz) = (count("states")?, count("actions")?, count("observations")?);
    let s_of = |t: &Token| t.index("state", Some((ns, "states")));
    let a_of = |t: &Token| t.index("action", Some((na, "actions")));

    let mut initial: Option<(usize, Pos)> = None;
    let mut observation: Vec<Option<usize>> = vec![None; ns];
    let mut transitions = vec![vec![Vec::new(); na]; ns];
    let mut first_trans: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut cost = vec![vec![0.0; na]; ns];
    let mut cost_seen = BTreeSet::new();
    let mut targets = BTreeSet::new();
    let mut goals = BTreeSet::new();
    for rec in &records {
        let args = &rec.args;
        let at = rec.keyword.pos;
        match rec.keyword.text {
            "init" => {
                if initial.is_some() {
                    return Err(parse_err(at, "`init` declared twice"));
                }
                initial = Some((s_of(&args[0])?, at));
            }
            "obs" => {
                let s = s_of(&args[0])?;
                let z = args[1].index("observation", Some((nz, "observations")))?;
                if observation[s].replace(z).is_some() {
                    return Err(parse_err(at, format!("state {s} has two `obs` records")));
                }
            }
            "trans" => {
                let (s, a, t) = (s_of(&args[0])?, a_of(&args[1])?, s_of(&args[2])?);
                let (lo, hi) = (args[3].number("lower bound")?, args[4].number("upper bound")?);
                if !(lo > 0.0) {
                    return Err(Error::GraphPreservation(format!(
                        "line {}: lower bound {lo} of `trans {s} {a} {t}` must be strictly positive",
                        at.line
                    )));
                }
                if lo > hi || hi > 1.0 {
                    return Err(parse_err(
                        args[3].pos,
                        format!("interval [{lo}, {hi}] is not a sub-interval of (0, 1]"),
                    ));
                }
                if transitions[s][a].iter().any(|&(u, _)| u == t) {
                    return Err(parse_err(at, format!("duplicate `trans {s} {a} {t}`")));
                }
                first_trans.entry((s, a)).or_insert(at.line);
                transitions[s][a].push((t, Interval::new(lo, hi)));
            }
            "cost" => {
                let (s, a) = (s_of(&args[0])?, a_of(&args[1])?);
                let r = args[2].number("cost")?;
                if r < 0.0 {
                    return Err(parse_err(args[2].pos, format!("cost {r} must be >= 0")));
                }
                if !cost_seen.insert((s, a)) {
                    return Err(parse_err(at, format!("duplicate `cost {s} {a}`")));
                }
                cost[s][a] = r;
            }
            "target" => {
                targets.insert(s_of(&args[0])?);
            }
            "goal" => {
                goals.insert(s_of(&args[0])?);
            }
            _ => unreachable!("keywords are checked while tokenizing"),
        }
    }

    let initial = initial.ok_or_else(|| parse_err(eof, "missing `init` record"))?.0;
    let observation = observation
        .into_iter()
        .enumerate()
        .map(|(s, z)| z.ok_or_else(|| parse_err(eof, format!("state {s} has no `obs` record"))))
        .collect::<Result<Vec<_>>>()?;
    for s in 0..ns {
        for a in 0..na {
            let succ = &mut transitions[s][a];
            if succ.is_empty() {
                return Err(parse_err(eof, format!("no `trans` record for state {s}, action {a}")));
            }
            succ.sort_by_key(|&(t, _)| t);
            let lo: f64 = succ.iter().map(|(_, iv)| iv.lo).sum();
            let hi: f64 = succ.iter().map(|(_, iv)| iv.hi).sum();
            if lo > 1.0 + DIST_TOL || hi < 1.0 - DIST_TOL {
                return Err(Error::InfeasibleUncertainty {
                    context: format!("`trans {s} {a} …` records from line {}", first_trans[&(s, a)]),
                    lower_sum: lo,
                    upper_sum: hi,
                });
            }
        }
    }
    let model = IntervalPomdp {
        num_states: ns,
        num_actions: na,
        num_observations: nz,
        initial,
        transitions,
        cost,
        observation,
        targets,
        goals,
    };
    model.validate()?;
    Ok(model)
}

/// Writes a model in the text format; `parse_model` reads it back unchanged
/// (successors sorted by index, zero costs omitted).
pub fn serialize_model(model: &IntervalPomdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {}", model.num_states);
    let _ = writeln!(out, "actions {}", model.num_actions);
    let _ = writeln!(out, "observations {}", model.num_observations);
    let _ = writeln!(out, "init {}", model.initial);
    for (s, z) in model.observation.iter().enumerate() {
        let _ = writeln!(out, "obs {s} {z}");
    }
    for (s, row) in model.transitions.iter().enumerate() {
        for (a, succ) in row.iter().enumerate() {
            let mut succ = succ.clone();
            succ.sort_by_key(|&(t, _)| t);
            for (t, iv) in succ {
                let _ = writeln!(out, "trans {s} {a} {t} {:?} {:?}", iv.lo, iv.hi);
            }
        }
    }
    for (s, row) in model.cost.iter().enumerate() {
        for (a, &r) in row.iter().enumerate() {
            if r != 0.0 {
                let _ = writeln!(out, "cost {s} {a} {r:?}");
            }
        }
    }
    for t in &model.targets {
        let _ = writeln!(out, "target {t}");
    }
    for g in &model.goals {
        let _ = writeln!(out, "goal {g}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH: &str = "states 2\nactions 1\nobservations 1\ninit 0\nobs 0 0\nobs 1 0\ntrans 0 0 1 1.0 1.0\ntrans 1 0 1 1 1\ntarget 1\n";

    #[test]
    fn single_path() {
        let m = parse_model(PATH).unwrap();
        assert_eq!(m.transitions[0][0], vec![(1, Interval::point(1.0))]);
        assert_eq!(m.targets, [1].into());
        assert_eq!(parse_model(&serialize_model(&m)).unwrap(), m);
    }

    #[test]
    fn zero_lower_bound_breaks_graph_preservation() {
        let text = PATH.replace("trans 0 0 1 1.0 1.0", "trans 0 0 1 0.0 0.5\ntrans 0 0 0 0.5 1");
        assert!(matches!(parse_model(&text), Err(Error::GraphPreservation(m)) if m.contains("line 7")));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let text = PATH.replace("obs 1 0", "obs 1 x");
        assert!(matches!(
            parse_model(&text),
            Err(Error::Parse { line: 6, column: 7, .. })
        ));
        let text = PATH.replace("obs 1 0", "  bogus 1");
        assert!(matches!(
            parse_model(&text),
            Err(Error::Parse { line: 6, column: 3, .. })
        ));
    }

    #[test]
    fn inadmissible_sums_name_the_record() {
        let text = PATH.replace("trans 0 0 1 1.0 1.0", "trans 0 0 1 0.2 0.3\ntrans 0 0 0 0.2 0.3");
        match parse_model(&text) {
            Err(Error::InfeasibleUncertainty { context, .. }) => assert!(context.contains("line 7")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_observation() {
        let text = PATH.replace("obs 1 0\n", "");
        assert!(matches!(parse_model(&text), Err(Error::Parse { msg, .. }) if msg.contains("state 1")));
    }
}
