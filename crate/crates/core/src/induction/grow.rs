//! Greedy rule growing, pruning and consequence fitting.

use rayon::prelude::*;

use crate::quality::{hypergeometric_pvalue, log_rank_sorted, raw_value, KaplanMeier, StatAccumulator, TestResult};
use crate::rule::{Condition, Consequence, Covering, Premise, Rule};

use super::expert::{ConditionPattern, ExpertKnowledge};
use super::scorer::{beats, Evaluation, OpCounts, Scorer, TaskData};
use super::InductionParams;

type Scored = (Condition, Evaluation);

/// Best entry in canonical order; earlier entries win ties.
fn best_of(candidates: impl IntoIterator<Item = Scored>) -> Option<Scored> {
    let mut best: Option<Scored> = None;
    for cand in candidates {
        if best.as_ref().map_or(true, |b| beats(&cand.1, &b.1)) {
            best = Some(cand);
        }
    }
    best
}

fn strictly_better(candidate: &Evaluation, current: &Evaluation) -> bool {
    !candidate.quality.is_nan() && (current.quality.is_nan() || candidate.quality > current.quality)
}

pub(crate) struct Grower<'s, 'a> {
    pub scorer: &'s Scorer<'a>,
    pub params: &'s InductionParams,
    pub expert: Option<&'s ExpertKnowledge>,
}

impl Grower<'_, '_> {
    fn allowed(&self, cond: &Condition, eval: &Evaluation) -> bool {
        eval.new_positives >= self.params.minsupp_new && !self.expert.is_some_and(|e| e.is_forbidden(cond))
    }

    fn skips(&self, premise: &Premise, attr: usize) -> bool {
        !self.scorer.ds.attribute(attr).is_numeric() && premise.condition_on(attr).is_some()
    }

    /// Best admissible candidate over the open pool, scanning attributes in
    /// parallel and reducing in attribute order.
    fn best_open(&self, premise: &Premise, covered: &[usize], ops: &mut OpCounts) -> Option<Scored> {
        let attrs: Vec<usize> = self
            .scorer
            .ds
            .regular_attributes()
            .filter(|&a| !self.skips(premise, a))
            .collect();
        let per_attr: Vec<(Option<Scored>, OpCounts)> = attrs
            .par_iter()
            .map(|&a| {
                let mut local = OpCounts::default();
                let scored = self.scorer.scan_attribute(a, covered, self.params.induction_measure, &mut local);
                (best_of(scored.into_iter().filter(|(c, e)| self.allowed(c, e))), local)
            })
            .collect();
        let mut winners = Vec::new();
        for (best, local) in per_attr {
            *ops += local;
            winners.extend(best);
        }
        best_of(winners)
    }

    /// Best admissible preferred candidate with budget left, with the index
    /// of the preference that produced it.
    fn best_preferred(
        &self,
        premise: &Premise,
        covered: &[usize],
        budgets: &[usize],
        ops: &mut OpCounts,
    ) -> Option<(Scored, usize)> {
        let expert = self.expert?;
        let measure = self.params.induction_measure;
        let mut best: Option<(Scored, usize)> = None;
        for (i, pref) in expert.preferred.iter().enumerate() {
            if budgets[i] == 0 || pref.class.is_some_and(|c| Some(c) != self.scorer.target) {
                continue;
            }
            let scored: Vec<Scored> = match &pref.pattern {
                ConditionPattern::Exact(cond) => {
                    if premise.and(*cond).is_none() {
                        continue;
                    }
                    let rows: Vec<usize> = covered
                        .iter()
                        .copied()
                        .filter(|&r| cond.holds(self.scorer.ds, r))
                        .collect();
                    self.scorer
                        .evaluate_rows(&rows, measure, ops)
                        .map(|e| (*cond, e))
                        .into_iter()
                        .collect()
                }
                ConditionPattern::Attribute(a) => {
                    if self.skips(premise, *a) {
                        continue;
                    }
                    self.scorer.scan_attribute(*a, covered, measure, ops)
                }
            };
            if let Some(cand) = best_of(scored.into_iter().filter(|(c, e)| self.allowed(c, e))) {
                if best.as_ref().map_or(true, |(b, _)| beats(&cand.1, &b.1)) {
                    best = Some((cand, i));
                }
            }
        }
        best
    }

    /// Extends `premise` greedily. Returns the final premise and the
    /// conditions added, or `None` when the starting premise already
    /// violates `minsupp_new`.
    pub fn grow(
        &self,
        start: Premise,
        budgets: &mut [usize],
        ops: &mut OpCounts,
    ) -> Option<(Premise, Vec<Condition>)> {
        let ds = self.scorer.ds;
        let mut premise = start;
        let mut covered = premise.covered_rows(ds, None);
        let mut current = self
            .scorer
            .evaluate_rows(&covered, self.params.induction_measure, ops)?;
        if current.new_positives < self.params.minsupp_new {
            return None;
        }
        let mut steps = Vec::new();
        loop {
            if self.params.max_growing_conditions.is_some_and(|m| steps.len() >= m) {
                break;
            }
            let preferred = self
                .best_preferred(&premise, &covered, budgets, ops)
                .filter(|((_, e), _)| strictly_better(e, &current));
            let (chosen, used) = match preferred {
                Some((cand, i)) => (cand, Some(i)),
                None => match self.best_open(&premise, &covered, ops) {
                    Some(cand) if strictly_better(&cand.1, &current) => (cand, None),
                    _ => break,
                },
            };
            let (cond, eval) = chosen;
            let Some(next) = premise.and(cond) else { break };
            if let Some(i) = used {
                budgets[i] -= 1;
            }
            covered.retain(|&r| cond.holds(ds, r));
            premise = next;
            current = eval;
            steps.push(cond);
        }
        Some((premise, steps))
    }

    /// Removes conditions while the pruning measure does not decrease.
    /// Conditions on `protected` attributes are kept.
    pub fn prune(&self, mut premise: Premise, protected: &[usize], ops: &mut OpCounts) -> (Premise, f64, f64) {
        let ds = self.scorer.ds;
        let measure = self.params.pruning_measure;
        let score = |p: &Premise, ops: &mut OpCounts| {
            self.scorer
                .evaluate_rows(&p.covered_rows(ds, None), measure, ops)
                .map_or(f64::NEG_INFINITY, |e| if e.quality.is_nan() { f64::NEG_INFINITY } else { e.quality })
        };
        let before = score(&premise, ops);
        let mut current = before;
        if !self.params.pruning_enabled {
            return (premise, before, current);
        }
        while premise.len() > 1 {
            let mut best: Option<(usize, f64)> = None;
            for (i, cond) in premise.conditions().iter().enumerate() {
                if protected.contains(&cond.attribute) {
                    continue;
                }
                let q = score(&premise.without(i), ops);
                if best.map_or(true, |(_, b)| q > b) {
                    best = Some((i, q));
                }
            }
            match best {
                Some((i, q)) if q >= current => {
                    premise = premise.without(i);
                    current = q;
                }
                _ => break,
            }
        }
        (premise, before, current)
    }

    /// Fits consequence, covering, p-value and voting weight for `premise`.
    pub fn build_rule(&self, premise: Premise) -> Rule {
        let s = self.scorer;
        let rows = premise.covered_rows(s.ds, None);
        let total = s.ds.len();
        match s.data {
            TaskData::Class { .. } => {
                let p = rows.iter().filter(|&&r| s.is_positive(r)).count();
                let covering = Covering::new(p, rows.len() - p, s.total_pos, total - s.total_pos);
                Rule {
                    premise,
                    consequence: Consequence::Class(s.target.expect("classification target")),
                    voting_weight: raw_value(self.params.voting_measure, &covering),
                    p_value: hypergeometric_pvalue(&covering),
                    covering,
                }
            }
            TaskData::Regression { labels, .. } => {
                let acc: StatAccumulator = rows.iter().map(|&r| labels[r]).collect();
                let mut ops = OpCounts::default();
                let covering = s
                    .evaluate_rows(&rows, self.params.voting_measure, &mut ops)
                    .map_or(Covering::new(0, 0, 0, total), |e| e.covering);
                Rule {
                    premise,
                    consequence: Consequence::Value {
                        mean: acc.mean(),
                        sigma: acc.std_dev(),
                    },
                    voting_weight: raw_value(self.params.voting_measure, &covering),
                    p_value: hypergeometric_pvalue(&covering),
                    covering,
                }
            }
            TaskData::Survival { times, events, order } => {
                let mut member = vec![false; total];
                for &r in &rows {
                    member[r] = true;
                }
                let km = KaplanMeier::from_sorted(order.iter().filter(|&&i| member[i]).map(|&i| (times[i], events[i])));
                let test: TestResult =
                    log_rank_sorted(order.iter().map(|&i| (times[i], events[i], member[i])), total, rows.len());
                Rule {
                    premise,
                    consequence: Consequence::Survival(km),
                    covering: Covering::survival(rows.len(), total),
                    voting_weight: 1.0 - test.p_value,
                    p_value: test.p_value,
                }
            }
        }
    }
}
