//! Task-specific evaluation of candidate premises.
//!
//! Numeric attributes are scored in one sweep over the covered examples
//! sorted by attribute value, so every threshold is evaluated from running
//! statistics instead of a fresh scan of the covered set.

use crate::dataset::{Column, DataSet, Task};
use crate::error::Result;
use crate::quality::{log_rank_sorted, raw_value, MeasureId, StatAccumulator};
use crate::rule::{regression_covering, sigma_window, Condition, Covering, Interval};

use super::fenwick::Fenwick;

/// Operation counters used to check evaluation cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    /// Candidate conditions scored.
    pub candidates: u64,
    /// Reads of covered examples' labels while scoring.
    pub label_reads: u64,
}

impl std::ops::AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.candidates += rhs.candidates;
        self.label_reads += rhs.label_reads;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Evaluation {
    pub quality: f64,
    pub covering: Covering,
    /// Previously uncovered positives among the covered examples.
    pub new_positives: usize,
}

/// Per-dataset label data shared by every scorer built on it.
pub(crate) enum TaskData<'a> {
    Class {
        labels: Vec<u32>,
    },
    Regression {
        labels: &'a [f64],
        /// All labels ascending.
        sorted: Vec<f64>,
        /// Position of every example in `sorted`.
        rank: Vec<usize>,
    },
    Survival {
        times: &'a [f64],
        events: Vec<bool>,
        /// Example indices ordered by time.
        order: Vec<usize>,
    },
}

impl<'a> TaskData<'a> {
    pub fn new(ds: &'a DataSet) -> Result<Self> {
        Ok(match ds.require_task()? {
            Task::Classification => TaskData::Class {
                labels: ds.class_labels()?,
            },
            Task::Regression => {
                let labels = ds.numeric_labels()?;
                let mut order: Vec<usize> = (0..labels.len()).collect();
                order.sort_by(|&a, &b| labels[a].total_cmp(&labels[b]).then(a.cmp(&b)));
                let mut rank = vec![0; labels.len()];
                for (pos, &i) in order.iter().enumerate() {
                    rank[i] = pos;
                }
                TaskData::Regression {
                    labels,
                    sorted: order.iter().map(|&i| labels[i]).collect(),
                    rank,
                }
            }
            Task::Survival => {
                let times = ds.survival_times()?;
                let mut order: Vec<usize> = (0..times.len()).collect();
                order.sort_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
                TaskData::Survival {
                    times,
                    events: ds.events()?,
                    order,
                }
            }
        })
    }
}

/// Scores premises for one target (a class, or all examples for
/// regression and survival) given the current uncovered positives.
pub(crate) struct Scorer<'a> {
    pub ds: &'a DataSet,
    pub data: &'a TaskData<'a>,
    pub target: Option<u32>,
    pub total_pos: usize,
    pub uncovered: Vec<bool>,
}

/// Orders evaluations: higher quality, then larger `p`.
pub(crate) fn beats(a: &Evaluation, b: &Evaluation) -> bool {
    let (qa, qb) = (sanitize(a.quality), sanitize(b.quality));
    qa > qb || (qa == qb && a.covering.p > b.covering.p)
}

fn sanitize(q: f64) -> f64 {
    if q.is_nan() {
        f64::NEG_INFINITY
    } else {
        q
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi || m < lo {
        lo
    } else {
        m
    }
}

/// Covered examples with a value on `attr`, sorted by value then index.
fn sorted_values(col: &[f64], covered: &[usize]) -> Vec<(f64, usize)> {
    let mut items: Vec<(f64, usize)> = covered
        .iter()
        .filter(|&&r| !col[r].is_nan())
        .map(|&r| (col[r], r))
        .collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    items
}

/// Nominal symbols present among the covered examples, in domain order,
/// with the covered rows holding each.
fn symbol_groups(col: &[Option<u32>], covered: &[usize], domain_len: usize) -> Vec<(u32, Vec<usize>)> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); domain_len];
    for &r in covered {
        if let Some(s) = col[r] {
            groups[s as usize].push(r);
        }
    }
    groups
        .into_iter()
        .enumerate()
        .filter(|(_, rows)| !rows.is_empty())
        .map(|(s, rows)| (s as u32, rows))
        .collect()
}

/// Threshold conditions between consecutive distinct covered values, as
/// `(index of last prefix element, threshold)`.
fn boundaries(items: &[(f64, usize)]) -> impl Iterator<Item = (usize, f64)> + '_ {
    items
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].0 < w[1].0)
        .map(|(j, w)| (j, midpoint(w[0].0, w[1].0)))
}

/// Candidate conditions over `covered`, in canonical order: attribute
/// index, then value; for numeric thresholds `≤ m` precedes `> m`.
pub(crate) fn enumerate_candidates(ds: &DataSet, attr: usize, covered: &[usize]) -> Vec<Condition> {
    match ds.column(attr) {
        Column::Nominal(col) => symbol_groups(col, covered, ds.attribute(attr).domain().len())
            .into_iter()
            .map(|(s, _)| Condition::equals(attr, s))
            .collect(),
        Column::Numeric(col) => boundaries(&sorted_values(col, covered))
            .flat_map(|(_, m)| {
                [
                    Condition::interval(attr, Interval::at_most(m)),
                    Condition::interval(attr, Interval::greater_than(m)),
                ]
            })
            .collect(),
    }
}

impl<'a> Scorer<'a> {
    pub fn is_positive(&self, row: usize) -> bool {
        match (self.data, self.target) {
            (TaskData::Class { labels }, Some(t)) => labels[row] == t,
            _ => true,
        }
    }

    fn total(&self) -> usize {
        self.ds.len()
    }

    fn contingency(&self, p: usize, n: usize, new_positives: usize, measure: MeasureId) -> Evaluation {
        let covering = Covering::new(p, n, self.total_pos, self.total() - self.total_pos);
        Evaluation {
            quality: raw_value(measure, &covering),
            covering,
            new_positives,
        }
    }

    fn survival(&self, in_group: impl Fn(usize) -> bool, size: usize, new_positives: usize) -> Evaluation {
        let TaskData::Survival { times, events, order } = self.data else {
            unreachable!("survival scorer without survival data")
        };
        let test = log_rank_sorted(
            order.iter().map(|&i| (times[i], events[i], in_group(i))),
            order.len(),
            size,
        );
        Evaluation {
            // ranks like 1 - p but keeps separating candidates once p underflows
            quality: test.statistic,
            covering: Covering::survival(size, order.len()),
            new_positives,
        }
    }

    fn regression(&self, stats: &StatAccumulator, in_window: impl Fn(usize, usize) -> usize, new_positives: usize, measure: MeasureId) -> Evaluation {
        let TaskData::Regression { sorted, .. } = self.data else {
            unreachable!("regression scorer without regression data")
        };
        let (lo, hi) = sigma_window(stats.mean(), stats.std_dev());
        let start = sorted.partition_point(|&y| y < lo);
        let end = sorted.partition_point(|&y| y <= hi);
        let covering = regression_covering(stats.count(), in_window(start, end), end - start, self.total());
        Evaluation {
            quality: raw_value(measure, &covering),
            covering,
            new_positives,
        }
    }

    /// Scores an arbitrary covered set; `None` when it is empty.
    pub fn evaluate_rows(&self, rows: &[usize], measure: MeasureId, ops: &mut OpCounts) -> Option<Evaluation> {
        if rows.is_empty() {
            return None;
        }
        ops.candidates += 1;
        let new_positives = rows.iter().filter(|&&r| self.uncovered[r]).count();
        Some(match self.data {
            TaskData::Class { .. } => {
                let p = rows.iter().filter(|&&r| self.is_positive(r)).count();
                self.contingency(p, rows.len() - p, new_positives, measure)
            }
            TaskData::Regression { labels, rank, .. } => {
                ops.label_reads += rows.len() as u64;
                let stats: StatAccumulator = rows.iter().map(|&r| labels[r]).collect();
                let mut ranks: Vec<usize> = rows.iter().map(|&r| rank[r]).collect();
                ranks.sort_unstable();
                let in_window = |start: usize, end: usize| {
                    ranks.partition_point(|&k| k < end) - ranks.partition_point(|&k| k < start)
                };
                self.regression(&stats, in_window, new_positives, measure)
            }
            TaskData::Survival { .. } => {
                let mut member = vec![false; self.total()];
                for &r in rows {
                    member[r] = true;
                }
                self.survival(|i| member[i], rows.len(), new_positives)
            }
        })
    }

    /// Scores every candidate condition on `attr` over the covered set, in
    /// the order produced by [`enumerate_candidates`].
    pub fn scan_attribute(
        &self,
        attr: usize,
        covered: &[usize],
        measure: MeasureId,
        ops: &mut OpCounts,
    ) -> Vec<(Condition, Evaluation)> {
        match self.ds.column(attr) {
            Column::Nominal(col) => {
                let groups = symbol_groups(col, covered, self.ds.attribute(attr).domain().len());
                groups
                    .into_iter()
                    .filter_map(|(s, rows)| {
                        self.evaluate_rows(&rows, measure, ops)
                            .map(|e| (Condition::equals(attr, s), e))
                    })
                    .collect()
            }
            Column::Numeric(col) => {
                let items = sorted_values(col, covered);
                if items.len() < 2 {
                    return Vec::new();
                }
                match self.data {
                    TaskData::Class { .. } => self.sweep_class(attr, &items, measure, ops),
                    TaskData::Regression { .. } => self.sweep_regression(attr, col, covered, &items, measure, ops),
                    TaskData::Survival { .. } => self.sweep_survival(attr, &items, ops),
                }
            }
        }
    }

    fn sweep_class(&self, attr: usize, items: &[(f64, usize)], measure: MeasureId, ops: &mut OpCounts) -> Vec<(Condition, Evaluation)> {
        let (mut pos_all, mut new_all) = (0usize, 0usize);
        for &(_, r) in items {
            pos_all += usize::from(self.is_positive(r));
            new_all += usize::from(self.uncovered[r]);
        }
        let neg_all = items.len() - pos_all;
        let mut prefix_pos = vec![0usize; items.len()];
        let mut prefix_new = vec![0usize; items.len()];
        let (mut pos, mut new) = (0usize, 0usize);
        for (j, &(_, r)) in items.iter().enumerate() {
            pos += usize::from(self.is_positive(r));
            new += usize::from(self.uncovered[r]);
            prefix_pos[j] = pos;
            prefix_new[j] = new;
        }
        let mut out = Vec::new();
        for (j, m) in boundaries(items) {
            ops.candidates += 2;
            let (p, n, nw) = (prefix_pos[j], j + 1 - prefix_pos[j], prefix_new[j]);
            out.push((
                Condition::interval(attr, Interval::at_most(m)),
                self.contingency(p, n, nw, measure),
            ));
            out.push((
                Condition::interval(attr, Interval::greater_than(m)),
                self.contingency(pos_all - p, neg_all - n, new_all - nw, measure),
            ));
        }
        out
    }

    fn sweep_regression(
        &self,
        attr: usize,
        col: &[f64],
        covered: &[usize],
        items: &[(f64, usize)],
        measure: MeasureId,
        ops: &mut OpCounts,
    ) -> Vec<(Condition, Evaluation)> {
        let TaskData::Regression { labels, rank, .. } = self.data else {
            unreachable!()
        };
        let n = self.total();
        let mut covered_flags = vec![false; n];
        for &r in covered {
            covered_flags[rank[r]] = true;
        }
        let covered_tree = Fenwick::from_flags(&covered_flags);
        // covered examples without a value on this attribute, by label rank
        let mut missing_ranks: Vec<usize> = covered.iter().filter(|&&r| col[r].is_nan()).map(|&r| rank[r]).collect();
        missing_ranks.sort_unstable();
        let missing_in = |start: usize, end: usize| {
            missing_ranks.partition_point(|&k| k < end) - missing_ranks.partition_point(|&k| k < start)
        };

        let mut suffix = StatAccumulator::new();
        let mut new_all = 0usize;
        for &(_, r) in items {
            suffix.push(labels[r]);
            new_all += usize::from(self.uncovered[r]);
        }
        ops.label_reads += items.len() as u64;

        let mut prefix = StatAccumulator::new();
        let mut prefix_tree = Fenwick::new(n);
        let mut prefix_new = 0usize;
        let mut out = Vec::new();
        for (j, &(value, r)) in items.iter().enumerate() {
            let y = labels[r];
            ops.label_reads += 1;
            prefix.push(y);
            suffix.remove(y).expect("suffix holds every pushed label");
            prefix_tree.add(rank[r]);
            prefix_new += usize::from(self.uncovered[r]);

            let Some(&(next, _)) = items.get(j + 1) else { break };
            if !(value < next) {
                continue;
            }
            let m = midpoint(value, next);
            ops.candidates += 2;
            let left = self.regression(&prefix, |s, e| prefix_tree.range(s, e), prefix_new, measure);
            let right = self.regression(
                &suffix,
                |s, e| covered_tree.range(s, e) - missing_in(s, e) - prefix_tree.range(s, e),
                new_all - prefix_new,
                measure,
            );
            out.push((Condition::interval(attr, Interval::at_most(m)), left));
            out.push((Condition::interval(attr, Interval::greater_than(m)), right));
        }
        out
    }

    fn sweep_survival(&self, attr: usize, items: &[(f64, usize)], ops: &mut OpCounts) -> Vec<(Condition, Evaluation)> {
        let n = self.total();
        let mut valued = vec![false; n];
        let mut new_all = 0usize;
        for &(_, r) in items {
            valued[r] = true;
            new_all += usize::from(self.uncovered[r]);
        }
        let mut prefix = vec![false; n];
        let mut prefix_new = 0usize;
        let mut out = Vec::new();
        for (j, &(value, r)) in items.iter().enumerate() {
            prefix[r] = true;
            prefix_new += usize::from(self.uncovered[r]);
            let Some(&(next, _)) = items.get(j + 1) else { break };
            if !(value < next) {
                continue;
            }
            let m = midpoint(value, next);
            ops.candidates += 2;
            let left = self.survival(|i| prefix[i], j + 1, prefix_new);
            let right = self.survival(|i| valued[i] && !prefix[i], items.len() - j - 1, new_all - prefix_new);
            out.push((Condition::interval(attr, Interval::at_most(m)), left));
            out.push((Condition::interval(attr, Interval::greater_than(m)), right));
        }
        out
    }
}
