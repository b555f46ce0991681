use std::fmt::Write as _;

use super::{Condition, Consequence, Relation, Rule};
use crate::dataset::{AttributeMeta, Role};

/// Formats like C's `%g` with 6 significant digits.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // round to 6 significant digits first so the exponent is the final one
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_condition(cond: &Condition, schema: &[AttributeMeta]) -> String {
    let meta = &schema[cond.attribute];
    let name = &meta.name;
    match cond.relation {
        Relation::Equals(s) => format!("{name} = {}", meta.domain()[s as usize]),
        Relation::InInterval(iv) => match (iv.lower, iv.upper) {
            (None, None) => format!("{name} ∈ (-inf, inf)"),
            (Some(l), None) => format!("{name} {} {}", if iv.lower_closed { "≥" } else { ">" }, fmt_g6(l)),
            (None, Some(u)) => format!("{name} {} {}", if iv.upper_closed { "≤" } else { "<" }, fmt_g6(u)),
            (Some(l), Some(u)) if l == u => format!("{name} = {}", fmt_g6(l)),
            (Some(l), Some(u)) => format!(
                "{name} ∈ {}{}, {}{}",
                if iv.lower_closed { '[' } else { '(' },
                fmt_g6(l),
                fmt_g6(u),
                if iv.upper_closed { ']' } else { ')' }
            ),
        },
    }
}

/// Canonical one-line rendering:
/// `IF <cond> AND <cond> THEN <consequence> (p=.., n=.., P=.., N=.., pval=..)`.
pub fn format_rule(rule: &Rule, schema: &[AttributeMeta]) -> String {
    let mut out = String::from("IF ");
    if rule.premise.is_empty() {
        out.push_str("TRUE");
    } else {
        let conds: Vec<String> = rule
            .premise
            .conditions()
            .iter()
            .map(|c| format_condition(c, schema))
            .collect();
        out.push_str(&conds.join(" AND "));
    }
    out.push_str(" THEN ");
    let label = schema
        .iter()
        .find(|a| a.role == Role::Label)
        .map_or("label", |a| a.name.as_str());
    match &rule.consequence {
        Consequence::Class(c) => {
            let symbol = schema
                .iter()
                .find(|a| a.role == Role::Label)
                .and_then(|a| a.domain().get(*c as usize))
                .map_or_else(|| c.to_string(), Clone::clone);
            let _ = write!(out, "{label} = {symbol}");
        }
        Consequence::Value { mean, sigma } => {
            let _ = write!(out, "{label} = {} ± {}", fmt_g6(*mean), fmt_g6(*sigma));
        }
        Consequence::Survival(km) => {
            let _ = write!(out, "survival = KM({} steps)", km.times().len());
        }
    }
    let c = &rule.covering;
    let _ = write!(
        out,
        " (p={}, n={}, P={}, N={}, pval={})",
        c.p,
        c.n,
        c.total_pos,
        c.total_neg,
        fmt_g6(rule.p_value)
    );
    out
}
