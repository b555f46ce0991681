//! User guidance for induction: seed rules, preferred and forbidden
//! conditions, and enforced rule counts.
//!
//! [`ExpertSpec`] is the textual form read from TOML files; it is resolved
//! against a dataset schema into an [`ExpertKnowledge`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::rule::{Condition, Interval, Premise, Relation};

/// Matches either one exact condition or any condition on an attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionPattern {
    Exact(Condition),
    Attribute(usize),
}

impl ConditionPattern {
    pub fn matches(&self, cond: &Condition) -> bool {
        match self {
            ConditionPattern::Exact(c) => c == cond,
            ConditionPattern::Attribute(a) => cond.attribute == *a,
        }
    }

    fn overlaps(&self, other: &ConditionPattern) -> bool {
        match (self, other) {
            (ConditionPattern::Exact(a), ConditionPattern::Exact(b)) => a == b,
            (ConditionPattern::Attribute(a), ConditionPattern::Attribute(b)) => a == b,
            (ConditionPattern::Exact(c), ConditionPattern::Attribute(a))
            | (ConditionPattern::Attribute(a), ConditionPattern::Exact(c)) => c.attribute == *a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialRule {
    /// Target class; `None` for regression and survival.
    pub class: Option<u32>,
    pub premise: Premise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferredCondition {
    pub pattern: ConditionPattern,
    /// Number of times the preference may be used across the rule set.
    pub budget: usize,
    /// Restricts the preference to one class.
    pub class: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpertKnowledge {
    pub initial_rules: Vec<InitialRule>,
    pub preferred: Vec<PreferredCondition>,
    pub forbidden: Vec<ConditionPattern>,
    /// Rule count per class; the `None` key applies to every class without
    /// its own entry, and to regression/survival.
    pub desired_rule_count: BTreeMap<Option<u32>, usize>,
}

impl ExpertKnowledge {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.preferred.iter().find(|p| p.budget == 0) {
            return Err(Error::InvalidArgument(format!("preferred condition {:?} has a zero budget", p.pattern)));
        }
        if self.desired_rule_count.values().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("desired rule counts must be at least 1".into()));
        }
        for p in &self.preferred {
            if self.forbidden.iter().any(|f| f.overlaps(&p.pattern)) {
                return Err(Error::InvalidArgument(format!(
                    "preferred condition {:?} is also forbidden",
                    p.pattern
                )));
            }
        }
        Ok(())
    }

    pub fn is_forbidden(&self, cond: &Condition) -> bool {
        self.forbidden.iter().any(|f| f.matches(cond))
    }

    pub fn desired_count(&self, class: Option<u32>) -> Option<usize> {
        self.desired_rule_count
            .get(&class)
            .or_else(|| self.desired_rule_count.get(&None))
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpertSpec {
    pub initial_rules: Vec<InitialRuleSpec>,
    pub preferred: Vec<PreferredSpec>,
    pub forbidden: Vec<PatternSpec>,
    /// Class symbol (or `*` for all) to rule count.
    pub desired_rule_count: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialRuleSpec {
    #[serde(default)]
    pub class: Option<String>,
    pub conditions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferredSpec {
    #[serde(flatten)]
    pub pattern: PatternSpec,
    #[serde(default = "one")]
    pub budget: usize,
    #[serde(default)]
    pub class: Option<String>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternSpec {
    Condition(String),
    Attribute(String),
}

impl ExpertSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("expert knowledge: {e}")))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Resolves names and condition texts against the schema of `ds`.
    pub fn resolve(&self, ds: &DataSet) -> Result<ExpertKnowledge> {
        let class_index = |name: &str| -> Result<u32> {
            let label = ds
                .label_index()
                .ok_or_else(|| Error::Role("dataset has no label".into()))?;
            ds.attribute(label)
                .symbol_index(name)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown class {name:?}")))
        };
        let pattern = |p: &PatternSpec| -> Result<ConditionPattern> {
            Ok(match p {
                PatternSpec::Condition(text) => ConditionPattern::Exact(parse_condition(text, ds)?),
                PatternSpec::Attribute(name) => ConditionPattern::Attribute(attribute(ds, name)?),
            })
        };

        let mut initial_rules = Vec::new();
        for r in &self.initial_rules {
            let conds = r
                .conditions
                .iter()
                .map(|c| parse_condition(c, ds))
                .collect::<Result<Vec<_>>>()?;
            let premise = Premise::from_conditions(conds)
                .ok_or_else(|| Error::InvalidArgument("initial rule premise is contradictory".into()))?;
            initial_rules.push(InitialRule {
                class: r.class.as_deref().map(class_index).transpose()?,
                premise,
            });
        }
        let preferred = self
            .preferred
            .iter()
            .map(|p| {
                Ok(PreferredCondition {
                    pattern: pattern(&p.pattern)?,
                    budget: p.budget,
                    class: p.class.as_deref().map(class_index).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let forbidden = self.forbidden.iter().map(pattern).collect::<Result<Vec<_>>>()?;
        let mut desired_rule_count = BTreeMap::new();
        for (k, &v) in &self.desired_rule_count {
            let key = if k == "*" { None } else { Some(class_index(k)?) };
            desired_rule_count.insert(key, v);
        }
        let ek = ExpertKnowledge {
            initial_rules,
            preferred,
            forbidden,
            desired_rule_count,
        };
        ek.validate()?;
        Ok(ek)
    }
}

fn attribute(ds: &DataSet, name: &str) -> Result<usize> {
    let idx = ds
        .attribute_index(name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown attribute {name:?}")))?;
    if ds.regular_attributes().all(|a| a != idx) {
        return Err(Error::InvalidArgument(format!("{name} is not a regular attribute")));
    }
    Ok(idx)
}

fn parse_number(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "∞" => Ok(f64::INFINITY),
        "-inf" | "-∞" => Ok(f64::NEG_INFINITY),
        t => t
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{t:?} is not a number"))),
    }
}

/// Parses `attr = sym`, `attr <= x`, `attr < x`, `attr > x`, `attr >= x`
/// (also `≤`/`≥`) or `attr in [a, b)` / `attr ∈ (a, b]`.
pub fn parse_condition(text: &str, ds: &DataSet) -> Result<Condition> {
    const OPS: [&str; 9] = [" in ", "∈", "<=", ">=", "≤", "≥", "<", ">", "="];
    let (pos, op) = OPS
        .iter()
        .filter_map(|op| text.find(op).map(|p| (p, *op)))
        .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
        .ok_or_else(|| Error::InvalidArgument(format!("no operator in condition {text:?}")))?;
    let name = text[..pos].trim();
    let rhs = text[pos + op.len()..].trim();
    let attr = attribute(ds, name)?;
    let meta = ds.attribute(attr);

    let cond = if !meta.is_numeric() {
        if op != "=" {
            return Err(Error::InvalidArgument(format!("nominal attribute {name} only supports '='")));
        }
        let symbol = rhs.trim_matches(|c| c == '\'' || c == '"');
        let idx = meta
            .symbol_index(symbol)
            .ok_or_else(|| Error::InvalidArgument(format!("{symbol:?} is not in the domain of {name}")))?;
        Condition::equals(attr, idx)
    } else {
        let iv = match op {
            "<=" | "≤" => Interval::at_most(parse_number(rhs)?),
            "<" => Interval::less_than(parse_number(rhs)?),
            ">" => Interval::greater_than(parse_number(rhs)?),
            ">=" | "≥" => Interval::at_least(parse_number(rhs)?),
            "=" => {
                let x = parse_number(rhs)?;
                Interval {
                    lower: Some(x),
                    lower_closed: true,
                    upper: Some(x),
                    upper_closed: true,
                }
            }
            _ => parse_interval(rhs)?,
        };
        Condition::interval(attr, iv)
    };
    match cond.relation {
        Relation::InInterval(iv) if !iv.is_valid() => {
            Err(Error::InvalidArgument(format!("empty interval in condition {text:?}")))
        }
        _ => Ok(cond),
    }
}

fn parse_interval(s: &str) -> Result<Interval> {
    let bad = || Error::InvalidArgument(format!("malformed interval {s:?}"));
    let lower_closed = match s.chars().next() {
        Some('[') => true,
        Some('(') => false,
        _ => return Err(bad()),
    };
    let upper_closed = match s.chars().last() {
        Some(']') => true,
        Some(')') => false,
        _ => return Err(bad()),
    };
    let (l, u) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
    let (l, u) = (parse_number(l)?, parse_number(u)?);
    let bound = |x: f64, closed: bool| if x.is_finite() { (Some(x), closed) } else { (None, false) };
    let (lower, lower_closed) = bound(l, lower_closed);
    let (upper, upper_closed) = bound(u, upper_closed);
    Ok(Interval {
        lower,
        lower_closed,
        upper,
        upper_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttributeMeta, Column, Role};

    fn ds() -> DataSet {
        DataSet::new(
            "t",
            vec![
                AttributeMeta::nominal("a", ["x", "y"]),
                AttributeMeta::numeric("v"),
                AttributeMeta::nominal("cls", ["c1", "c2"]),
            ],
            vec![
                Column::Nominal(vec![Some(0), Some(1)]),
                Column::Numeric(vec![1.0, 2.0]),
                Column::Nominal(vec![Some(0), Some(1)]),
            ],
        )
        .unwrap()
        .with_role("cls", Role::Label)
        .unwrap()
    }

    #[test]
    fn parses_condition_forms() {
        let d = ds();
        assert_eq!(parse_condition("a = y", &d).unwrap(), Condition::equals(0, 1));
        assert_eq!(
            parse_condition("v <= 2.5", &d).unwrap(),
            Condition::interval(1, Interval::at_most(2.5))
        );
        assert_eq!(
            parse_condition("v ≥ 1", &d).unwrap(),
            Condition::interval(1, Interval::at_least(1.0))
        );
        let c = parse_condition("v in (1, 3]", &d).unwrap();
        let Relation::InInterval(iv) = c.relation else { panic!() };
        assert!(!iv.contains(1.0) && iv.contains(3.0));
        let c = parse_condition("v ∈ [1, inf)", &d).unwrap();
        assert_eq!(c, Condition::interval(1, Interval::at_least(1.0)));
    }

    #[test]
    fn rejects_bad_conditions() {
        let d = ds();
        assert!(parse_condition("a < 3", &d).is_err());
        assert!(parse_condition("a = z", &d).is_err());
        assert!(parse_condition("cls = c1", &d).is_err(), "label is not a regular attribute");
        assert!(parse_condition("v in (3, 1)", &d).is_err());
    }

    #[test]
    fn resolves_toml() {
        let spec = ExpertSpec::from_toml(
            r#"
            [[initial_rules]]
            class = "c1"
            conditions = ["a = x"]

            [[preferred]]
            attribute = "v"
            budget = 2

            [[forbidden]]
            condition = "a = y"

            [desired_rule_count]
            c2 = 3
            "*" = 1
            "#,
        )
        .unwrap();
        let ek = spec.resolve(&ds()).unwrap();
        assert_eq!(ek.initial_rules[0].class, Some(0));
        assert_eq!(ek.preferred[0].pattern, ConditionPattern::Attribute(1));
        assert!(ek.is_forbidden(&Condition::equals(0, 1)));
        assert!(!ek.is_forbidden(&Condition::equals(0, 0)));
        assert_eq!(ek.desired_count(Some(1)), Some(3));
        assert_eq!(ek.desired_count(Some(0)), Some(1));
    }

    #[test]
    fn preferred_and_forbidden_must_be_disjoint() {
        let spec = ExpertSpec::from_toml(
            r#"
            [[preferred]]
            condition = "v <= 1.5"
            [[forbidden]]
            attribute = "v"
            "#,
        )
        .unwrap();
        assert!(spec.resolve(&ds()).is_err());
    }
}
