use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DataSet, Task};
use crate::error::{Error, Result};
use crate::induction::{induce_ruleset, ExpertKnowledge, InductionParams};

use super::{evaluate, EvaluationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub report: EvaluationReport,
}

/// Means of the fold metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balanced_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rrse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ibs: Option<f64>,
    pub rule_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVReport {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<FoldReport>,
    pub aggregate: Aggregate,
    /// Wall-clock induction time summed over folds. Not serialized, so
    /// reports stay reproducible.
    #[serde(skip)]
    pub induction_seconds: f64,
}

/// Fold index of every example: a seeded shuffle, stratified by class for
/// classification, dealt round-robin so fold sizes differ by at most one.
pub fn fold_assignment(ds: &DataSet, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
    }
    if k > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "{k} folds requested for {} examples",
            ds.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.shuffle(&mut rng);
    if ds.task() == Some(Task::Classification) {
        let labels = ds.class_labels()?;
        // stable sort keeps the shuffled order within each class
        order.sort_by_key(|&r| labels[r]);
    }
    let mut folds = vec![0; ds.len()];
    for (pos, &r) in order.iter().enumerate() {
        folds[r] = pos % k;
    }
    Ok(folds)
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// k-fold cross-validation. Folds run in parallel; reports are merged in
/// fold order.
pub fn cross_validate(
    ds: &DataSet,
    k: usize,
    params: &InductionParams,
    expert: Option<&ExpertKnowledge>,
    seed: u64,
) -> Result<CVReport> {
    params.validate()?;
    ds.require_task()?;
    let assignment = fold_assignment(ds, k, seed)?;
    let results: Vec<Result<(FoldReport, f64)>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&r| assignment[r] == fold);
            let train_ds = ds.subset(&train);
            let test_ds = ds.subset(&test);
            let start = Instant::now();
            let rs = induce_ruleset(&train_ds, params, expert)?;
            let elapsed = start.elapsed().as_secs_f64();
            Ok((
                FoldReport {
                    fold,
                    train_size: train.len(),
                    test_size: test.len(),
                    report: evaluate(&rs, &test_ds)?,
                },
                elapsed,
            ))
        })
        .collect();
    let mut folds = Vec::with_capacity(k);
    let mut induction_seconds = 0.0;
    for r in results {
        let (f, secs) = r?;
        folds.push(f);
        induction_seconds += secs;
    }
    let aggregate = Aggregate {
        balanced_accuracy: mean(folds.iter().map(|f| f.report.balanced_accuracy)),
        rrse: mean(folds.iter().map(|f| f.report.rrse)),
        ibs: mean(folds.iter().map(|f| f.report.ibs)),
        rule_count: folds.iter().map(|f| f.report.rule_count as f64).sum::<f64>() / k as f64,
    };
    Ok(CVReport {
        k,
        seed,
        folds,
        aggregate,
        induction_seconds,
    })
}
