//! Random dataset generators and slow, independent reference
//! implementations the library is checked against.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use ruleforge::dataset::{AttributeMeta, Column, DataSet, Role, Task};
use ruleforge::induction::InductionParams;
use ruleforge::quality::{log_rank, measure_value, MeasureId, TestResult};
use ruleforge::rule::{Condition, Covering, Interval, Premise};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

// ---------------------------------------------------------------------------
// generators

/// Small mixed-type dataset. Numeric attributes take integer values so
/// every threshold midpoint is exactly representable.
pub fn random_dataset(rng: &mut ChaCha8Rng, task: Task, rows: usize, attrs: usize) -> DataSet {
    let mut metas = Vec::new();
    let mut cols = Vec::new();
    let mut signal = vec![0.0f64; rows];
    for a in 0..attrs {
        let name = format!("a{a}");
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(2..=3u32);
            let v: Vec<Option<u32>> = (0..rows)
                .map(|_| (!rng.gen_bool(0.05)).then(|| rng.gen_range(0..k)))
                .collect();
            for (s, x) in signal.iter_mut().zip(&v) {
                *s += x.map_or(0.0, f64::from);
            }
            metas.push(AttributeMeta::nominal(name, (0..k).map(|i| format!("v{i}"))));
            cols.push(Column::Nominal(v));
        } else {
            let top = rng.gen_range(2..=8);
            let v: Vec<f64> = (0..rows)
                .map(|_| if rng.gen_bool(0.05) { f64::NAN } else { f64::from(rng.gen_range(0..top)) })
                .collect();
            for (s, x) in signal.iter_mut().zip(&v) {
                if !x.is_nan() {
                    *s += x / f64::from(top) * 3.0;
                }
            }
            metas.push(AttributeMeta::numeric(name));
            cols.push(Column::Numeric(v));
        }
    }
    let noisy = |rng: &mut ChaCha8Rng, s: f64| s + rng.gen_range(-1.5..1.5);
    let ds = match task {
        Task::Classification => {
            let k = rng.gen_range(2..=3u32);
            let labels = signal
                .iter()
                .map(|&s| Some((noisy(rng, s).max(0.0) as u32) % k))
                .collect();
            metas.push(AttributeMeta::nominal("class", (0..k).map(|i| format!("c{i}"))));
            cols.push(Column::Nominal(labels));
            DataSet::new("random", metas, cols).unwrap().with_role("class", Role::Label)
        }
        Task::Regression => {
            let y = signal.iter().map(|&s| noisy(rng, 2.0 * s).round()).collect();
            metas.push(AttributeMeta::numeric("y"));
            cols.push(Column::Numeric(y));
            DataSet::new("random", metas, cols).unwrap().with_role("y", Role::Label)
        }
        Task::Survival => {
            let t = signal.iter().map(|&s| (noisy(rng, 2.0 * s).round() + 4.0).max(1.0)).collect();
            let e = (0..rows).map(|_| Some(u32::from(rng.gen_bool(0.7)))).collect();
            metas.push(AttributeMeta::numeric("time"));
            metas.push(AttributeMeta::nominal("status", ["0", "1"]));
            cols.push(Column::Numeric(t));
            cols.push(Column::Nominal(e));
            DataSet::new("random", metas, cols)
                .unwrap()
                .with_role("status", Role::Label)
                .unwrap()
                .with_role("time", Role::SurvivalTime)
        }
    };
    ds.unwrap()
}

/// Regression data whose label is a step function of one numeric
/// attribute plus small noise; the remaining attributes are noise.
pub fn piecewise_constant(rng: &mut ChaCha8Rng, rows: usize, attrs: usize) -> DataSet {
    let pieces = rng.gen_range(2..=4);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.15..0.85)).collect();
    cuts.sort_by(f64::total_cmp);
    let levels: Vec<f64> = (0..pieces).map(|i| 10.0 * i as f64 + rng.gen_range(-2.0..2.0)).collect();
    let mut metas = Vec::new();
    let mut cols = Vec::new();
    let informative = rng.gen_range(0..attrs);
    let mut y = vec![0.0; rows];
    for a in 0..attrs {
        let x: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..1.0)).collect();
        if a == informative {
            for (yi, &xi) in y.iter_mut().zip(&x) {
                *yi = levels[cuts.partition_point(|&c| c <= xi)] + rng.gen_range(-0.5..0.5);
            }
        }
        metas.push(AttributeMeta::numeric(format!("x{a}")));
        cols.push(Column::Numeric(x));
    }
    metas.push(AttributeMeta::numeric("y"));
    cols.push(Column::Numeric(y));
    DataSet::new("steps", metas, cols).unwrap().with_role("y", Role::Label).unwrap()
}

pub fn random_params(rng: &mut ChaCha8Rng) -> InductionParams {
    InductionParams {
        minsupp_new: rng.gen_range(1..=3),
        max_uncovered_fraction: *[0.0, 0.0, 0.1, 0.3].choose(rng).unwrap(),
        induction_measure: *MeasureId::ALL.choose(rng).unwrap(),
        pruning_measure: *MeasureId::ALL.choose(rng).unwrap(),
        voting_measure: *MeasureId::ALL.choose(rng).unwrap(),
        ..InductionParams::default()
    }
}

// ---------------------------------------------------------------------------
// statistical oracles

/// Product-limit estimate recomputed from scratch at every distinct event
/// time: `(time, S(time))`.
pub fn naive_km(times: &[f64], events: &[bool]) -> Vec<(f64, f64)> {
    let mut event_times: Vec<f64> = times.iter().zip(events).filter(|(_, &e)| e).map(|(&t, _)| t).collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    event_times
        .iter()
        .map(|&t| {
            let s = event_times
                .iter()
                .filter(|&&u| u <= t)
                .map(|&u| {
                    let d = times.iter().zip(events).filter(|(&x, &e)| e && x == u).count() as f64;
                    let n = times.iter().filter(|&&x| x >= u).count() as f64;
                    1.0 - d / n
                })
                .product();
            (t, s)
        })
        .collect()
}

/// `S(t)` from a naive step list, right-continuous.
pub fn step_at(steps: &[(f64, f64)], t: f64) -> f64 {
    steps.iter().rev().find(|(u, _)| *u <= t).map_or(1.0, |s| s.1)
}

/// Left limit `S(t-)` from a naive step list.
pub fn step_before(steps: &[(f64, f64)], t: f64) -> f64 {
    steps.iter().rev().find(|(u, _)| *u < t).map_or(1.0, |s| s.1)
}

/// Textbook log-rank: observed minus expected events of group `a` and the
/// hypergeometric variance, summed over the pooled distinct event times.
pub fn naive_log_rank(a: (&[f64], &[bool]), b: (&[f64], &[bool])) -> (f64, f64) {
    let pooled: Vec<(f64, bool, bool)> = a
        .0
        .iter()
        .zip(a.1)
        .map(|(&t, &e)| (t, e, true))
        .chain(b.0.iter().zip(b.1).map(|(&t, &e)| (t, e, false)))
        .collect();
    let mut event_times: Vec<f64> = pooled.iter().filter(|x| x.1).map(|x| x.0).collect();
    event_times.sort_by(f64::total_cmp);
    event_times.dedup();
    let (mut o_minus_e, mut var) = (0.0, 0.0);
    for &t in &event_times {
        let n = pooled.iter().filter(|x| x.0 >= t).count() as f64;
        let na = pooled.iter().filter(|x| x.0 >= t && x.2).count() as f64;
        let d = pooled.iter().filter(|x| x.0 == t && x.1).count() as f64;
        let oa = pooled.iter().filter(|x| x.0 == t && x.1 && x.2).count() as f64;
        o_minus_e += oa - d * na / n;
        if n > 1.0 {
            var += d * (na / n) * (1.0 - na / n) * (n - d) / (n - 1.0);
        }
    }
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let stat = o_minus_e * o_minus_e / var;
    (stat, ChiSquared::new(1.0).unwrap().sf(stat))
}

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

/// `P(X >= p)` for `X ~ Hypergeometric(P+N, P, p+n)` by exact integer
/// enumeration of the tail.
pub fn exact_hypergeometric_tail(p: u64, n: u64, pp: u64, nn: u64) -> f64 {
    let draws = p + n;
    let num: u128 = (p..=draws.min(pp)).map(|k| choose(pp, k) * choose(nn, draws - k)).sum();
    let den = choose(pp + nn, draws);
    num as f64 / den as f64
}

/// Mean and population variance by two passes.
pub fn two_pass(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Integrated Brier score with inverse-probability-of-censoring weights,
/// evaluating the score at the midpoint of every interval between
/// consecutive breakpoints. Curves are naive step lists.
pub fn naive_ibs(times: &[f64], events: &[bool], curves: &[Vec<(f64, f64)>]) -> f64 {
    let n = times.len();
    let t_max = times.iter().zip(events).filter(|(_, &e)| e).map(|(&t, _)| t).fold(f64::MIN, f64::max);
    let censored: Vec<bool> = events.iter().map(|e| !e).collect();
    let g = naive_km(times, &censored);
    let mut points: Vec<f64> = std::iter::once(0.0)
        .chain(times.iter().copied())
        .chain(curves.iter().flat_map(|c| c.iter().map(|s| s.0)))
        .chain(std::iter::once(t_max))
        .filter(|&t| t <= t_max)
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut area = 0.0;
    for w in points.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        let mut bs = 0.0;
        for i in 0..n {
            let s = step_at(&curves[i], t);
            if times[i] <= t && events[i] {
                let gi = step_before(&g, times[i]);
                if gi > 0.0 {
                    bs += s * s / gi;
                }
            } else if times[i] > t {
                let gt = step_at(&g, t);
                if gt > 0.0 {
                    bs += (1.0 - s) * (1.0 - s) / gt;
                }
            }
        }
        area += bs / n as f64 * (w[1] - w[0]);
    }
    area / t_max
}

// ---------------------------------------------------------------------------
// induction oracles

/// Candidate conditions enumerated directly from the covered rows.
pub fn oracle_candidates(ds: &DataSet, covered: &[usize]) -> Vec<Condition> {
    let mut out = Vec::new();
    for a in ds.regular_attributes() {
        match ds.column(a) {
            Column::Nominal(col) => {
                for s in 0..ds.attribute(a).domain().len() as u32 {
                    if covered.iter().any(|&r| col[r] == Some(s)) {
                        out.push(Condition::equals(a, s));
                    }
                }
            }
            Column::Numeric(col) => {
                let mut v: Vec<f64> = covered.iter().map(|&r| col[r]).filter(|x| !x.is_nan()).collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                for w in v.windows(2) {
                    let m = (w[0] + w[1]) / 2.0;
                    out.push(Condition::interval(a, Interval::at_most(m)));
                    out.push(Condition::interval(a, Interval::greater_than(m)));
                }
            }
        }
    }
    out
}

pub fn rows_where(ds: &DataSet, rows: &[usize], cond: &Condition) -> Vec<usize> {
    rows.iter().copied().filter(|&r| cond.holds(ds, r)).collect()
}

pub fn premise_rows(ds: &DataSet, premise: &Premise) -> Vec<usize> {
    (0..ds.len())
        .filter(|&r| premise.conditions().iter().all(|c| c.holds(ds, r)))
        .collect()
}

/// Covering of a covered row set, recomputed from labels: class
/// positives, or labels inside the sigma window of the covered mean.
pub fn oracle_covering(ds: &DataSet, target: Option<u32>, rows: &[usize]) -> Covering {
    match ds.task().unwrap() {
        Task::Classification => {
            let labels = ds.class_labels().unwrap();
            let t = target.unwrap();
            let total_pos = labels.iter().filter(|&&l| l == t).count();
            let p = rows.iter().filter(|&&r| labels[r] == t).count();
            Covering::new(p, rows.len() - p, total_pos, ds.len() - total_pos)
        }
        Task::Regression => {
            let y = ds.numeric_labels().unwrap();
            let (mean, var) = two_pass(&rows.iter().map(|&r| y[r]).collect::<Vec<_>>());
            let sigma = var.sqrt();
            let half = sigma + 1e-9 * (1.0 + mean.abs() + sigma);
            let inside = |v: f64| (v - mean).abs() <= half;
            let p = rows.iter().filter(|&&r| inside(y[r])).count();
            let all = y.iter().filter(|&&v| inside(v)).count();
            Covering::new(p, rows.len() - p, all, ds.len() - all)
        }
        Task::Survival => Covering::survival(rows.len(), ds.len()),
    }
}

/// Quality of a covered row set: the measure on its covering, or for
/// survival the log-rank statistic against the uncovered rows.
pub fn oracle_quality(ds: &DataSet, target: Option<u32>, rows: &[usize], measure: MeasureId) -> f64 {
    if ds.task() == Some(Task::Survival) {
        if rows.len() == ds.len() {
            return TestResult::NULL.statistic;
        }
        let times = ds.survival_times().unwrap();
        let events = ds.events().unwrap();
        let mut inside = vec![false; ds.len()];
        for &r in rows {
            inside[r] = true;
        }
        let pick = |want: bool| -> (Vec<f64>, Vec<bool>) {
            (0..ds.len()).filter(|&r| inside[r] == want).map(|r| (times[r], events[r])).unzip()
        };
        let (ta, ea) = pick(true);
        let (tb, eb) = pick(false);
        return log_rank((&ta, &ea), (&tb, &eb)).unwrap().statistic;
    }
    measure_value(measure, &oracle_covering(ds, target, rows)).unwrap()
}

fn key(q: f64) -> f64 {
    if q.is_nan() {
        f64::NEG_INFINITY
    } else {
        q
    }
}

/// First condition greedy growing should add: the admissible candidate
/// with the highest quality, then the larger `p`, then the earlier
/// position, provided it strictly beats the empty premise.
pub fn exhaustive_first_step(
    ds: &DataSet,
    target: Option<u32>,
    uncovered: &[usize],
    params: &InductionParams,
) -> Option<Condition> {
    let all: Vec<usize> = (0..ds.len()).collect();
    let measure = params.induction_measure;
    let base = key(oracle_quality(ds, target, &all, measure));
    let mut best: Option<(Condition, f64, usize)> = None;
    for cond in oracle_candidates(ds, &all) {
        let rows = rows_where(ds, &all, &cond);
        if rows.is_empty() || rows.iter().filter(|r| uncovered.contains(r)).count() < params.minsupp_new {
            continue;
        }
        let q = key(oracle_quality(ds, target, &rows, measure));
        let p = oracle_covering(ds, target, &rows).p;
        if best.as_ref().map_or(true, |&(_, bq, bp)| q > bq || (q == bq && p > bp)) {
            best = Some((cond, q, p));
        }
    }
    best.filter(|&(_, q, _)| q > base).map(|(c, _, _)| c)
}

/// Label reads a median-based regression scorer spends on one growth step
/// from the empty premise: every candidate gathers and sorts the labels it
/// covers. Returns `(candidates, label_reads)`.
pub fn median_step_cost(ds: &DataSet) -> (u64, u64) {
    let y = ds.numeric_labels().unwrap();
    let all: Vec<usize> = (0..ds.len()).collect();
    let (mut candidates, mut reads) = (0u64, 0u64);
    for cond in oracle_candidates(ds, &all) {
        let mut labels: Vec<f64> = rows_where(ds, &all, &cond).iter().map(|&r| y[r]).collect();
        reads += labels.len() as u64;
        labels.sort_by(f64::total_cmp);
        std::hint::black_box(labels.get(labels.len() / 2));
        candidates += 1;
    }
    (candidates, reads)
}

// ---------------------------------------------------------------------------
// checkers shared by the oracle tests and the acceptance run

pub const TASKS: [Task; 3] = [Task::Classification, Task::Regression, Task::Survival];

/// Grows one rule on a random dataset and compares its first condition
/// with the exhaustive argmax.
pub fn check_greedy_step(seed: u64) -> Result<(), String> {
    use ruleforge::induction::{candidate_conditions, grow_rule};
    let mut rng = rng(seed);
    let task = TASKS[(seed % 3) as usize];
    let rows = rng.gen_range(8..=30);
    let attrs = rng.gen_range(1..=4);
    let ds = random_dataset(&mut rng, task, rows, attrs);
    let params = random_params(&mut rng);
    let target = match task {
        Task::Classification => {
            let label = ds.label_index().unwrap();
            Some(rng.gen_range(0..ds.attribute(label).domain().len() as u32))
        }
        _ => None,
    };
    let positives: Vec<usize> = match target {
        Some(t) => {
            let labels = ds.class_labels().unwrap();
            (0..ds.len()).filter(|&r| labels[r] == t).collect()
        }
        None => (0..ds.len()).collect(),
    };
    let uncovered: Vec<usize> = positives.into_iter().filter(|_| rng.gen_bool(0.8)).collect();

    let all: Vec<usize> = (0..ds.len()).collect();
    if candidate_conditions(&ds, &all, None) != oracle_candidates(&ds, &all) {
        return Err(format!("seed {seed}: candidate lists differ"));
    }
    let expected = exhaustive_first_step(&ds, target, &uncovered, &params);
    let got = grow_rule(&ds, target, &uncovered, &params, None)
        .map_err(|e| format!("seed {seed}: {e}"))?
        .map(|o| o.steps[0]);
    if got != expected {
        return Err(format!("seed {seed} ({task}): grew {got:?}, oracle {expected:?}"));
    }
    Ok(())
}

/// Replays an induction trace and checks the covering-loop invariants
/// against independently recomputed coverage.
pub fn check_loop_invariants(
    ds: &DataSet,
    params: &InductionParams,
) -> Result<ruleforge::rule::RuleSet, String> {
    use ruleforge::induction::{induce_with_trace, LoopExit};
    let (rs, trace) = induce_with_trace(ds, params, None).map_err(|e| e.to_string())?;
    if trace.rules.len() != rs.rules.len() {
        return Err("trace and rule set disagree on the rule count".into());
    }
    for summary in &trace.targets {
        let positives: Vec<usize> = match summary.target {
            Some(t) => {
                let labels = ds.class_labels().unwrap();
                (0..ds.len()).filter(|&r| labels[r] == t).collect()
            }
            None => (0..ds.len()).collect(),
        };
        let mut uncovered = vec![false; ds.len()];
        for &r in &positives {
            uncovered[r] = true;
        }
        let records = trace.rules.iter().zip(&rs.rules).filter(|(rec, _)| rec.target == summary.target);
        let mut count = 0;
        for (rec, rule) in records {
            count += 1;
            if rule.premise != rec.pruned {
                return Err("rule premise differs from the pruned premise".into());
            }
            if let Some(c) = rec.pruned.conditions().iter().find(|c| !rec.grown.conditions().contains(c)) {
                return Err(format!("pruned premise gained condition {c:?}"));
            }
            if !params.pruning_enabled && rec.pruned != rec.grown {
                return Err("pruning disabled but premise changed".into());
            }
            let rows = premise_rows(ds, &rec.pruned);
            let new = rows.iter().filter(|&&r| uncovered[r]).count();
            if new < params.minsupp_new || new != rec.new_positives {
                return Err(format!(
                    "rule covers {new} new positives (trace {}), minsupp_new {}",
                    rec.new_positives, params.minsupp_new
                ));
            }
            for r in rows {
                uncovered[r] = false;
            }
            let measure = params.pruning_measure;
            let before = key(oracle_quality(ds, summary.target, &premise_rows(ds, &rec.grown), measure));
            let after = key(oracle_quality(ds, summary.target, &premise_rows(ds, &rec.pruned), measure));
            if after < before {
                return Err(format!("pruning lowered {measure} from {before} to {after}"));
            }
        }
        let left = uncovered.iter().filter(|&&u| u).count();
        if left != summary.uncovered {
            return Err(format!("trace reports {} uncovered, recomputed {left}", summary.uncovered));
        }
        if count > positives.len() {
            return Err(format!("{count} rules for {} positives", positives.len()));
        }
        match summary.exit {
            LoopExit::CoverageReached => {
                if left as f64 > params.max_uncovered_fraction * positives.len() as f64 {
                    return Err(format!("clean exit with {left} of {} positives uncovered", positives.len()));
                }
            }
            LoopExit::TooFewPositives => {
                if positives.len() >= params.minsupp_new || count > 0 {
                    return Err("target skipped despite enough positives".into());
                }
            }
            LoopExit::GrowthFailure | LoopExit::DesiredCount => {}
        }
    }
    Ok(rs)
}
