//! `reach>=λ@SET` and `cost<=κ@SET`, where `SET` is `target`, `goal` or a
//! comma-separated list of state indices.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{IntervalPomdp, SpecKind, Specification};

/// Parses and validates one specification against `model`.
pub fn parse_spec(text: &str, model: &IntervalPomdp) -> Result<Specification> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |msg: &str| Error::InvalidSpec(format!("`{text}`: {msg}"));
    let (kind, rest) = if let Some(r) = compact.strip_prefix("reach>=") {
        (SpecKind::ReachAtLeast, r)
    } else if let Some(r) = compact.strip_prefix("cost<=") {
        (SpecKind::ExpCostAtMost, r)
    } else {
        return Err(bad("expected `reach>=λ@SET` or `cost<=κ@SET`"));
    };
    let (threshold, set) = rest.split_once('@').ok_or_else(|| bad("missing `@SET`"))?;
    let threshold: f64 = threshold.parse().map_err(|_| bad("threshold is not a number"))?;
    let targets: BTreeSet<usize> = match set {
        "target" => model.targets.clone(),
        "goal" => model.goals.clone(),
        list => list
            .split(',')
            .map(|s| s.parse::<usize>().map_err(|_| bad(&format!("`{s}` is not a state index"))))
            .collect::<Result<_>>()?,
    };
    let spec = Specification {
        kind,
        threshold,
        targets,
    };
    spec.validate(model.num_states)?;
    Ok(spec)
}

/// Inverse of [`parse_spec`] using explicit state lists.
pub fn format_spec(spec: &Specification) -> String {
    let set: Vec<String> = spec.targets.iter().map(|t| t.to_string()).collect();
    match spec.kind {
        SpecKind::ReachAtLeast => format!("reach>={}@{}", spec.threshold, set.join(",")),
        SpecKind::ExpCostAtMost => format!("cost<={}@{}", spec.threshold, set.join(",")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::gen_default_grid;
    use crate::model::Interval;

    #[test]
    fn named_and_listed_sets() {
        let m = gen_default_grid(Interval::point(0.98)).unwrap();
        let s = parse_spec("reach>=0.84@target", &m).unwrap();
        assert_eq!(s.kind, SpecKind::ReachAtLeast);
        assert_eq!(s.targets, m.targets);
        let c = parse_spec(" cost <= 12.5 @ 3,5 ", &m).unwrap();
        assert_eq!((c.kind, c.threshold), (SpecKind::ExpCostAtMost, 12.5));
        assert_eq!(c.targets, [3, 5].into());
        assert_eq!(parse_spec(&format_spec(&c), &m).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        let m = gen_default_grid(Interval::point(0.98)).unwrap();
        for text in ["reach>=1.01@target", "reach>0.5@target", "cost<=-1@goal", "reach>=0.5", "reach>=0.5@99", "reach>=x@goal"] {
            assert!(matches!(parse_spec(text, &m), Err(Error::InvalidSpec(_))), "{text}");
        }
    }
}
