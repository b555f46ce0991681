//! The separate-and-conquer covering loop.

mod expert;
mod fenwick;
mod grow;
mod params;
mod scorer;

use crate::dataset::{DataSet, Task};
use crate::error::{Error, Result};
use crate::quality::{KaplanMeier, StatAccumulator};
use crate::rule::{Condition, DefaultModel, Premise, Rule, RuleSet};

pub use self::expert::{
    parse_condition, ConditionPattern, ExpertKnowledge, ExpertSpec, InitialRule, InitialRuleSpec, PatternSpec,
    PreferredCondition, PreferredSpec,
};
pub use self::params::{InductionParams, RegressionVariant};
pub use self::scorer::OpCounts;

use self::grow::Grower;
use self::scorer::{enumerate_candidates, Scorer, TaskData};

/// Candidate conditions over the `covered` examples, in canonical order
/// (attribute index, then value), with forbidden conditions removed.
pub fn candidate_conditions(ds: &DataSet, covered: &[usize], expert: Option<&ExpertKnowledge>) -> Vec<Condition> {
    ds.regular_attributes()
        .flat_map(|a| enumerate_candidates(ds, a, covered))
        .filter(|c| !expert.is_some_and(|e| e.is_forbidden(c)))
        .collect()
}

/// A grown rule with the conditions in the order they were added.
#[derive(Debug, Clone)]
pub struct GrowOutcome {
    pub rule: Rule,
    pub steps: Vec<Condition>,
    pub ops: OpCounts,
}

fn positives(ds: &DataSet, data: &TaskData, target: Option<u32>) -> Vec<usize> {
    match (data, target) {
        (TaskData::Class { labels }, Some(t)) => (0..ds.len()).filter(|&r| labels[r] == t).collect(),
        _ => (0..ds.len()).collect(),
    }
}

fn check_target(ds: &DataSet, target: Option<u32>) -> Result<()> {
    match (ds.require_task()?, target) {
        (Task::Classification, Some(t)) => {
            let label = ds.label_index().expect("classification has a label");
            if (t as usize) < ds.attribute(label).domain().len() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("class index {t} out of range")))
            }
        }
        (Task::Classification, None) => Err(Error::InvalidArgument("classification needs a target class".into())),
        (_, Some(_)) => Err(Error::InvalidArgument("only classification takes a target class".into())),
        (_, None) => Ok(()),
    }
}

/// Grows one rule from the empty premise. `uncovered` lists the positives
/// not yet covered by earlier rules. `Ok(None)` signals that no rule
/// satisfying `minsupp_new` could be grown.
pub fn grow_rule(
    ds: &DataSet,
    target: Option<u32>,
    uncovered: &[usize],
    params: &InductionParams,
    expert: Option<&ExpertKnowledge>,
) -> Result<Option<GrowOutcome>> {
    params.validate()?;
    check_target(ds, target)?;
    let data = TaskData::new(ds)?;
    let pos = positives(ds, &data, target);
    let mut mask = vec![false; ds.len()];
    for &r in uncovered {
        mask[r] = true;
    }
    let scorer = Scorer {
        ds,
        data: &data,
        target,
        total_pos: pos.len(),
        uncovered: mask,
    };
    if uncovered.iter().any(|&r| !scorer.is_positive(r)) {
        return Err(Error::InvalidArgument("uncovered set contains a negative example".into()));
    }
    let grower = Grower { scorer: &scorer, params, expert };
    let mut budgets: Vec<usize> = expert.map_or_else(Vec::new, |e| e.preferred.iter().map(|p| p.budget).collect());
    let mut ops = OpCounts::default();
    Ok(match grower.grow(Premise::new(), &mut budgets, &mut ops) {
        Some((premise, steps)) if !premise.is_empty() => Some(GrowOutcome {
            rule: grower.build_rule(premise),
            steps,
            ops,
        }),
        _ => None,
    })
}

fn rule_target(rule: &Rule) -> Option<u32> {
    match rule.consequence {
        crate::rule::Consequence::Class(c) => Some(c),
        _ => None,
    }
}

/// Prunes a rule on `ds` and refits its consequence. Identity when
/// pruning is disabled.
pub fn prune_rule(rule: &Rule, ds: &DataSet, params: &InductionParams) -> Result<Rule> {
    params.validate()?;
    if !params.pruning_enabled {
        return Ok(rule.clone());
    }
    rule.premise.validate(ds)?;
    let target = rule_target(rule);
    check_target(ds, target)?;
    let data = TaskData::new(ds)?;
    let pos = positives(ds, &data, target);
    let scorer = Scorer {
        ds,
        data: &data,
        target,
        total_pos: pos.len(),
        uncovered: vec![false; ds.len()],
    };
    let grower = Grower {
        scorer: &scorer,
        params,
        expert: None,
    };
    let (premise, _, _) = grower.prune(rule.premise.clone(), &[], &mut OpCounts::default());
    Ok(grower.build_rule(premise))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopExit {
    /// Uncovered positives dropped to the allowed fraction.
    CoverageReached,
    /// The desired rule count was reached.
    DesiredCount,
    /// No further rule satisfied `minsupp_new`.
    GrowthFailure,
    /// The class had fewer positives than `minsupp_new`.
    TooFewPositives,
}

/// What happened while inducing one rule.
#[derive(Debug, Clone)]
pub struct RuleRecord {
    pub target: Option<u32>,
    pub grown: Premise,
    pub pruned: Premise,
    /// Previously uncovered positives covered by the final rule.
    pub new_positives: usize,
    pub pruning_quality_before: f64,
    pub pruning_quality_after: f64,
    pub from_initial_rule: bool,
}

/// How the loop for one target ended.
#[derive(Debug, Clone)]
pub struct TargetSummary {
    pub target: Option<u32>,
    pub total_positives: usize,
    pub uncovered: usize,
    pub exit: LoopExit,
}

#[derive(Debug, Clone, Default)]
pub struct InductionTrace {
    pub rules: Vec<RuleRecord>,
    pub targets: Vec<TargetSummary>,
    pub ops: OpCounts,
}

pub fn induce_ruleset(ds: &DataSet, params: &InductionParams, expert: Option<&ExpertKnowledge>) -> Result<RuleSet> {
    induce_with_trace(ds, params, expert).map(|(rs, _)| rs)
}

/// Induces a rule set and records per-rule and per-target bookkeeping.
pub fn induce_with_trace(
    ds: &DataSet,
    params: &InductionParams,
    expert: Option<&ExpertKnowledge>,
) -> Result<(RuleSet, InductionTrace)> {
    params.validate()?;
    if let Some(e) = expert {
        e.validate()?;
        for c in e.initial_rules.iter().flat_map(|r| r.premise.conditions()) {
            c.validate(ds)?;
        }
    }
    let task = ds.require_task()?;
    if ds.is_empty() {
        return Err(Error::Empty("training set".into()));
    }
    let data = TaskData::new(ds)?;
    let targets: Vec<Option<u32>> = match task {
        Task::Classification => {
            let label = ds.label_index().expect("classification has a label");
            (0..ds.attribute(label).domain().len() as u32).map(Some).collect()
        }
        _ => vec![None],
    };

    let mut budgets: Vec<usize> = expert.map_or_else(Vec::new, |e| e.preferred.iter().map(|p| p.budget).collect());
    let mut rules = Vec::new();
    let mut warnings = Vec::new();
    let mut trace = InductionTrace::default();
    for target in targets {
        let target_name = target.map_or_else(|| "all examples".to_string(), |t| {
            let label = ds.label_index().expect("label");
            format!("class {}", ds.attribute(label).domain()[t as usize])
        });
        let pos = positives(ds, &data, target);
        if pos.len() < params.minsupp_new {
            warnings.push(format!(
                "{target_name} has {} examples, fewer than minsupp_new = {}; no rules induced",
                pos.len(),
                params.minsupp_new
            ));
            trace.targets.push(TargetSummary {
                target,
                total_positives: pos.len(),
                uncovered: pos.len(),
                exit: LoopExit::TooFewPositives,
            });
            continue;
        }
        let mut scorer = Scorer {
            ds,
            data: &data,
            target,
            total_pos: pos.len(),
            uncovered: vec![false; ds.len()],
        };
        for &r in &pos {
            scorer.uncovered[r] = true;
        }
        let mut remaining = pos.len();
        let desired = expert.and_then(|e| e.desired_count(target));
        let allowed_uncovered = params.max_uncovered_fraction * pos.len() as f64;
        let mut count = 0usize;

        let seeds: Vec<&Premise> = expert.map_or_else(Vec::new, |e| {
            e.initial_rules
                .iter()
                .filter(|r| r.class == target)
                .map(|r| &r.premise)
                .collect()
        });
        let mut seeds = seeds.into_iter();
        let exit = loop {
            match desired {
                Some(d) if count >= d => break LoopExit::DesiredCount,
                None if remaining as f64 <= allowed_uncovered => break LoopExit::CoverageReached,
                _ => {}
            }
            let (start, from_initial_rule) = match seeds.next() {
                Some(p) => (p.clone(), true),
                None => (Premise::new(), false),
            };
            let protected: Vec<usize> = start.conditions().iter().map(|c| c.attribute).collect();
            let grower = Grower {
                scorer: &scorer,
                params,
                expert,
            };
            let grown = grower.grow(start.clone(), &mut budgets, &mut trace.ops);
            let grown = match grown {
                Some((premise, _)) if !premise.is_empty() => premise,
                _ if from_initial_rule => {
                    warnings.push(format!(
                        "initial rule for {target_name} covers fewer than minsupp_new uncovered positives; skipped"
                    ));
                    continue;
                }
                _ => break LoopExit::GrowthFailure,
            };
            let (pruned, before, after) = grower.prune(grown.clone(), &protected, &mut trace.ops);
            let rule = grower.build_rule(pruned.clone());
            let newly: Vec<usize> = pruned
                .covered_rows(ds, None)
                .into_iter()
                .filter(|&r| scorer.uncovered[r])
                .collect();
            for &r in &newly {
                scorer.uncovered[r] = false;
            }
            remaining -= newly.len();
            trace.rules.push(RuleRecord {
                target,
                grown,
                pruned,
                new_positives: newly.len(),
                pruning_quality_before: before,
                pruning_quality_after: after,
                from_initial_rule,
            });
            rules.push(rule);
            count += 1;
        };
        trace.targets.push(TargetSummary {
            target,
            total_positives: pos.len(),
            uncovered: remaining,
            exit,
        });
    }

    if params.significance_filter {
        let before = rules.len();
        rules.retain(|r| r.p_value <= params.significance_level);
        if rules.len() < before {
            warnings.push(format!(
                "{} rules dropped with p-value above {}",
                before - rules.len(),
                params.significance_level
            ));
        }
    }

    let default_model = fit_default_model(ds, &data)?;
    Ok((
        RuleSet {
            task,
            schema: ds.attributes().to_vec(),
            rules,
            default_model,
            params: params.clone(),
            warnings,
        },
        trace,
    ))
}

fn fit_default_model(ds: &DataSet, data: &TaskData) -> Result<DefaultModel> {
    Ok(match data {
        TaskData::Class { labels } => {
            let label = ds.label_index().expect("label");
            let mut class_counts = vec![0usize; ds.attribute(label).domain().len()];
            for &l in labels {
                class_counts[l as usize] += 1;
            }
            let mut class = 0;
            for (c, &n) in class_counts.iter().enumerate() {
                if n > class_counts[class] {
                    class = c;
                }
            }
            DefaultModel::Majority {
                class: class as u32,
                class_counts,
            }
        }
        TaskData::Regression { labels, .. } => DefaultModel::Mean {
            mean: labels.iter().copied().collect::<StatAccumulator>().mean(),
        },
        TaskData::Survival { times, events, order } => {
            DefaultModel::Survival(KaplanMeier::from_sorted(order.iter().map(|&i| (times[i], events[i]))))
        }
    })
}
