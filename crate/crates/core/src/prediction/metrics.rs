use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, Task};
use crate::error::{Error, Result};
use crate::quality::KaplanMeier;
use crate::rule::{format_rule, Covering, RuleSet};

use super::{predict, Prediction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSummary {
    pub text: String,
    pub covering: Covering,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balanced_accuracy: Option<f64>,
    /// `confusion_matrix[actual][predicted]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion_matrix: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ibs: Option<f64>,
    pub rule_count: usize,
    pub rules: Vec<RuleSummary>,
}

impl EvaluationReport {
    /// Name and value of the task's headline metric.
    pub fn headline(&self) -> (&'static str, f64) {
        match self.task {
            Task::Classification => ("BAcc", self.balanced_accuracy.unwrap_or(f64::NAN)),
            Task::Regression => ("RRSE", self.rrse.unwrap_or(f64::NAN)),
            Task::Survival => ("IBS", self.ibs.unwrap_or(f64::NAN)),
        }
    }
}

pub fn confusion_matrix(actual: &[u32], predicted: &[u32], classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; classes]; classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        m[a as usize][p as usize] += 1;
    }
    m
}

/// Mean recall over the classes present in `actual`.
pub fn balanced_accuracy(actual: &[u32], predicted: &[u32], classes: usize) -> Result<f64> {
    if actual.is_empty() {
        return Err(Error::Empty("test set".into()));
    }
    let m = confusion_matrix(actual, predicted, classes);
    let recalls: Vec<f64> = m
        .iter()
        .enumerate()
        .filter_map(|(c, row)| {
            let n: usize = row.iter().sum();
            (n > 0).then(|| row[c] as f64 / n as f64)
        })
        .collect();
    Ok(recalls.iter().sum::<f64>() / recalls.len() as f64)
}

/// Root relative squared error against predicting the mean of `actual`.
pub fn rrse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.is_empty() {
        return Err(Error::Empty("test set".into()));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let num: f64 = actual.iter().zip(predicted).map(|(y, p)| (p - y) * (p - y)).sum();
    let den: f64 = actual.iter().map(|y| (mean - y) * (mean - y)).sum();
    if den == 0.0 {
        return Err(Error::UndefinedMetric("RRSE is undefined for constant test labels".into()));
    }
    Ok((num / den).sqrt())
}

/// Integrated Brier score with inverse-probability-of-censoring weights.
///
/// The censoring distribution `G` is the product-limit estimate with the
/// roles of events and censorings swapped. A subject with an event at
/// `T <= t` is weighted by `1 / G(T-)`, a subject still at risk after `t`
/// by `1 / G(t)`; weights with `G = 0` are zero. The score is integrated
/// exactly over `[0, t_max]`, `t_max` being the largest event time.
pub fn integrated_brier_score(times: &[f64], events: &[bool], predictions: &[KaplanMeier]) -> Result<f64> {
    let n = times.len();
    if n == 0 {
        return Err(Error::Empty("test set".into()));
    }
    if events.len() != n || predictions.len() != n {
        return Err(Error::InvalidArgument("times, events and predictions differ in length".into()));
    }
    let t_max = times
        .iter()
        .zip(events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(t_max > 0.0) {
        return Err(Error::UndefinedMetric("IBS needs an event at a positive time".into()));
    }
    let censored: Vec<bool> = events.iter().map(|e| !e).collect();
    let g = KaplanMeier::estimate(times, &censored)?;
    let event_weight: Vec<f64> = times
        .iter()
        .map(|&t| {
            let gt = g.probability_before(t);
            if gt > 0.0 {
                1.0 / gt
            } else {
                0.0
            }
        })
        .collect();

    let mut grid: Vec<f64> = std::iter::once(0.0)
        .chain(times.iter().copied())
        .chain(predictions.iter().flat_map(|p| p.times().iter().copied()))
        .filter(|&t| (0.0..t_max).contains(&t))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.push(t_max);

    let mut area = 0.0;
    for w in grid.windows(2) {
        let t = w[0];
        let gt = g.probability_at(t);
        let at_risk_weight = if gt > 0.0 { 1.0 / gt } else { 0.0 };
        let mut bs = 0.0;
        for i in 0..n {
            let s = predictions[i].probability_at(t);
            if times[i] <= t {
                if events[i] {
                    bs += s * s * event_weight[i];
                }
            } else {
                bs += (1.0 - s) * (1.0 - s) * at_risk_weight;
            }
        }
        area += bs / n as f64 * (w[1] - w[0]);
    }
    Ok(area / t_max)
}

/// Predicts `test` and scores the predictions with the task's metric.
pub fn evaluate(rs: &RuleSet, test: &DataSet) -> Result<EvaluationReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set".into()));
    }
    super::check_task(rs, test)?;
    let predictions = predict(rs, test)?;
    let test = test.conform_to(&rs.schema)?;
    let mut report = EvaluationReport {
        task: rs.task,
        balanced_accuracy: None,
        confusion_matrix: None,
        rrse: None,
        ibs: None,
        rule_count: rs.len(),
        rules: rs
            .rules
            .iter()
            .map(|r| RuleSummary {
                text: format_rule(r, &rs.schema),
                covering: r.covering,
                p_value: r.p_value,
            })
            .collect(),
    };
    match rs.task {
        Task::Classification => {
            let actual = test.class_labels()?;
            let predicted: Vec<u32> = predictions.iter().filter_map(Prediction::class).collect();
            let label = test.label_index().expect("label");
            let classes = test.attribute(label).domain().len();
            report.balanced_accuracy = Some(balanced_accuracy(&actual, &predicted, classes)?);
            report.confusion_matrix = Some(confusion_matrix(&actual, &predicted, classes));
        }
        Task::Regression => {
            let actual = test.numeric_labels()?;
            if actual.iter().any(|y| y.is_nan()) {
                return Err(Error::Role("missing label value".into()));
            }
            let predicted: Vec<f64> = predictions.iter().filter_map(Prediction::value).collect();
            report.rrse = Some(rrse(actual, &predicted)?);
        }
        Task::Survival => {
            let times = test.survival_times()?;
            if times.iter().any(|t| t.is_nan()) {
                return Err(Error::Role("missing survival time".into()));
            }
            let events = test.events()?;
            let curves: Vec<KaplanMeier> = predictions
                .into_iter()
                .filter_map(|p| match p {
                    Prediction::Survival(km) => Some(km),
                    _ => None,
                })
                .collect();
            report.ibs = Some(integrated_brier_score(times, &events, &curves)?);
        }
    }
    Ok(report)
}
