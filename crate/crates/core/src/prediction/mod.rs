//! Applying rule sets, task metrics and cross-validation.

mod cv;
mod metrics;

use serde::{Deserialize, Serialize};

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::quality::KaplanMeier;
use crate::rule::{Consequence, DefaultModel, RuleSet};

pub use self::cv::{cross_validate, fold_assignment, Aggregate, CVReport, FoldReport};
pub use self::metrics::{
    balanced_accuracy, confusion_matrix, evaluate, integrated_brier_score, rrse, EvaluationReport, RuleSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Class(u32),
    Value(f64),
    Survival(KaplanMeier),
}

impl Prediction {
    pub fn class(&self) -> Option<u32> {
        match self {
            Prediction::Class(c) => Some(*c),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Prediction::Value(v) => Some(*v),
            _ => None,
        }
    }

    pub fn survival(&self) -> Option<&KaplanMeier> {
        match self {
            Prediction::Survival(km) => Some(km),
            _ => None,
        }
    }
}

/// Predicts every example of `ds`, which is first aligned with the rule
/// set's schema.
pub fn predict(rs: &RuleSet, ds: &DataSet) -> Result<Vec<Prediction>> {
    let ds = ds.conform_to(&rs.schema)?;
    for rule in &rs.rules {
        rule.premise.validate(&ds)?;
    }
    Ok((0..ds.len()).map(|row| predict_row(rs, &ds, row)).collect())
}

/// Summed votes per class; ties go to the larger training prior, then to
/// the earlier class.
fn vote(rs: &RuleSet, ds: &DataSet, row: usize, class_counts: &[usize]) -> Option<u32> {
    let mut score = vec![0.0f64; class_counts.len()];
    let mut voted = vec![false; class_counts.len()];
    for rule in &rs.rules {
        if let Consequence::Class(c) = rule.consequence {
            if rule.premise.covers(ds, row) {
                score[c as usize] += rule.voting_weight;
                voted[c as usize] = true;
            }
        }
    }
    let mut best: Option<usize> = None;
    for c in (0..score.len()).filter(|&c| voted[c]) {
        best = match best {
            Some(b) if score[c] > score[b] || (score[c] == score[b] && class_counts[c] > class_counts[b]) => Some(c),
            Some(b) => Some(b),
            None => Some(c),
        };
    }
    best.map(|c| c as u32)
}

fn predict_row(rs: &RuleSet, ds: &DataSet, row: usize) -> Prediction {
    match &rs.default_model {
        DefaultModel::Majority { class, class_counts } => {
            Prediction::Class(vote(rs, ds, row, class_counts).unwrap_or(*class))
        }
        DefaultModel::Mean { mean } => {
            let (mut weighted, mut weights, mut plain, mut count) = (0.0, 0.0, 0.0, 0usize);
            for rule in rs.rules.iter().filter(|r| r.premise.covers(ds, row)) {
                if let Consequence::Value { mean, .. } = rule.consequence {
                    weighted += rule.voting_weight * mean;
                    weights += rule.voting_weight;
                    plain += mean;
                    count += 1;
                }
            }
            Prediction::Value(match count {
                0 => *mean,
                _ if weights > 0.0 => weighted / weights,
                _ => plain / count as f64,
            })
        }
        DefaultModel::Survival(default) => {
            let covering: Vec<&KaplanMeier> = rs
                .rules
                .iter()
                .filter(|r| r.premise.covers(ds, row))
                .filter_map(|r| match &r.consequence {
                    Consequence::Survival(km) => Some(km),
                    _ => None,
                })
                .collect();
            Prediction::Survival(if covering.is_empty() {
                default.clone()
            } else {
                KaplanMeier::average(&covering)
            })
        }
    }
}

pub(crate) fn check_task(rs: &RuleSet, ds: &DataSet) -> Result<()> {
    let task = ds.conform_to(&rs.schema)?.require_task()?;
    if task != rs.task {
        return Err(Error::Schema(format!("model is for {} but data is {task}", rs.task)));
    }
    Ok(())
}
