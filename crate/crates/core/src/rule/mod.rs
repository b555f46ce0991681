//! Conditions, rules, rule sets and coverage statistics.

mod condition;
mod covering;
mod format;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeMeta, DataSet, Task};
use crate::error::{Error, Result};
use crate::induction::InductionParams;
use crate::quality::{KaplanMeier, StatAccumulator};

pub use self::condition::{covers, Condition, Interval, Premise, Relation};
pub use self::covering::{Covering, CoveringKind};
pub use self::format::{fmt_g6, format_condition, format_rule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consequence {
    Class(u32),
    Value { mean: f64, sigma: f64 },
    Survival(KaplanMeier),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub premise: Premise,
    pub consequence: Consequence,
    pub covering: Covering,
    pub voting_weight: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultModel {
    /// Most frequent training class plus training class counts (used to
    /// break voting ties).
    Majority { class: u32, class_counts: Vec<usize> },
    Mean { mean: f64 },
    Survival(KaplanMeier),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSet {
    pub task: Task,
    pub schema: Vec<AttributeMeta>,
    pub rules: Vec<Rule>,
    pub default_model: DefaultModel,
    pub params: InductionParams,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Canonical text of every rule, in order.
    pub fn rule_texts(&self) -> Vec<String> {
        self.rules.iter().map(|r| format_rule(r, &self.schema)).collect()
    }
}

/// Slack added to `sigma` when testing `|y - mean| <= sigma`, so values on
/// the window edge survive the rounding of incremental statistics.
const WINDOW_SLACK: f64 = 1e-9;

/// Closed label window `[mean - sigma, mean + sigma]` used to split covered
/// regression examples into positives and negatives.
pub(crate) fn sigma_window(mean: f64, sigma: f64) -> (f64, f64) {
    let half = sigma + WINDOW_SLACK * (1.0 + mean.abs() + sigma);
    (mean - half, mean + half)
}

/// Regression covering from window counts: `in_window_covered` of the
/// `covered` examples and `in_window_all` of all `total` examples have
/// labels inside the rule's sigma window.
pub(crate) fn regression_covering(
    covered: usize,
    in_window_covered: usize,
    in_window_all: usize,
    total: usize,
) -> Covering {
    Covering::new(in_window_covered, covered - in_window_covered, in_window_all, total - in_window_all)
}

/// Recomputes a rule's covering on `ds`, optionally restricted to `scope`.
pub fn covering_stats(rule: &Rule, ds: &DataSet, scope: Option<&[usize]>) -> Result<Covering> {
    rule.premise.validate(ds)?;
    let rows: Vec<usize> = match scope {
        Some(s) => s.to_vec(),
        None => (0..ds.len()).collect(),
    };
    let covered = rule.premise.filter_rows(ds, &rows);
    match (&rule.consequence, ds.require_task()?) {
        (Consequence::Class(target), Task::Classification) => {
            let labels = ds.class_labels()?;
            let total_pos = rows.iter().filter(|&&r| labels[r] == *target).count();
            let p = covered.iter().filter(|&&r| labels[r] == *target).count();
            Ok(Covering::new(p, covered.len() - p, total_pos, rows.len() - total_pos))
        }
        (Consequence::Value { .. }, Task::Regression) => {
            let labels = ds.numeric_labels()?;
            if covered.is_empty() {
                return Ok(Covering::new(0, 0, 0, rows.len()));
            }
            let acc: StatAccumulator = covered.iter().map(|&r| labels[r]).collect();
            let (lo, hi) = sigma_window(acc.mean(), acc.std_dev());
            let inside = |r: &&usize| (lo..=hi).contains(&labels[**r]);
            let p = covered.iter().filter(inside).count();
            let all = rows.iter().filter(inside).count();
            Ok(regression_covering(covered.len(), p, all, rows.len()))
        }
        (Consequence::Survival(_), Task::Survival) => Ok(Covering::survival(covered.len(), rows.len())),
        (_, task) => Err(Error::Schema(format!("rule consequence does not match a {task} dataset"))),
    }
}
