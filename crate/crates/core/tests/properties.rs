//! Property tests over random inputs.

mod common;

use common::*;
use proptest::prelude::*;
use ruleforge::dataset::{parse_arff, write_arff, DataSet, Role, Task};
use ruleforge::induction::{induce_ruleset, InductionParams};
use ruleforge::prediction::{balanced_accuracy, fold_assignment, predict, rrse};
use ruleforge::quality::{hypergeometric_pvalue, log_rank, measure_value, KaplanMeier, MeasureId, StatAccumulator};
use ruleforge::rule::{Condition, Covering, Interval, Premise};

#[test]
fn measures_are_monotone_in_p_and_antitone_in_n() {
    for pp in 1..=20usize {
        for nn in 0..=20usize {
            for m in MeasureId::ALL {
                let value = |p, n| measure_value(m, &Covering::new(p, n, pp, nn)).unwrap();
                for p in 0..=pp {
                    for n in 0..=nn {
                        if p + n == 0 {
                            continue;
                        }
                        if p < pp {
                            assert!(value(p + 1, n) >= value(p, n) - 1e-12, "{m} not monotone in p at ({p},{n},{pp},{nn})");
                        }
                        // coverage grows with every covered example by definition
                        if n < nn && m != MeasureId::Coverage {
                            assert!(value(p, n + 1) <= value(p, n) + 1e-12, "{m} not antitone in n at ({p},{n},{pp},{nn})");
                        }
                    }
                }
            }
        }
    }
}

fn covering() -> impl Strategy<Value = Covering> {
    (1usize..40, 0usize..40)
        .prop_flat_map(|(pp, nn)| (0..=pp, 0..=nn, Just(pp), Just(nn)))
        .prop_filter("non-empty", |(p, n, _, _)| p + n > 0)
        .prop_map(|(p, n, pp, nn)| Covering::new(p, n, pp, nn))
}

fn sample() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    prop::collection::vec((1u32..30, any::<bool>()), 1..60)
        .prop_map(|v| v.into_iter().map(|(t, e)| (f64::from(t), e)).unzip())
}

proptest! {
    #[test]
    fn measures_stay_normalized(c in covering()) {
        let unit = 0.0..=1.0;
        prop_assert!(unit.contains(&measure_value(MeasureId::Precision, &c).unwrap()));
        prop_assert!(unit.contains(&measure_value(MeasureId::Coverage, &c).unwrap()));
        let r = measure_value(MeasureId::Correlation, &c).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
        prop_assert!(unit.contains(&hypergeometric_pvalue(&c)));
    }

    #[test]
    fn km_is_a_survival_function((t, e) in sample()) {
        let km = KaplanMeier::estimate(&t, &e).unwrap();
        let mut prev = 1.0;
        for w in km.times().windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        for &s in km.probabilities() {
            prop_assert!((0.0..=prev).contains(&s));
            prev = s;
        }
    }

    #[test]
    fn log_rank_is_symmetric(a in sample(), b in sample()) {
        let ab = log_rank((&a.0, &a.1), (&b.0, &b.1)).unwrap();
        let ba = log_rank((&b.0, &b.1), (&a.0, &a.1)).unwrap();
        prop_assert_eq!(ab.statistic, ba.statistic);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn accumulator_tracks_any_interleaving(ops in prop::collection::vec((any::<bool>(), -1e3f64..1e3), 1..2000)) {
        let mut acc = StatAccumulator::new();
        let mut live: Vec<f64> = Vec::new();
        for (push, y) in ops {
            if push || live.is_empty() {
                acc.push(y);
                live.push(y);
            } else {
                let idx = (y.abs() as usize) % live.len();
                acc.remove(live.swap_remove(idx)).unwrap();
            }
        }
        let (mean, var) = two_pass(&live);
        prop_assert_eq!(acc.count(), live.len());
        prop_assert!((acc.mean() - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
        prop_assert!((acc.variance() - var).abs() <= 1e-9 * (1.0 + var));
    }

    #[test]
    fn adding_a_condition_never_widens_coverage(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut rng = rng(seed);
        let ds = random_dataset(&mut rng, TASKS[(seed % 3) as usize], 25, 3);
        let all: Vec<usize> = (0..ds.len()).collect();
        let candidates = oracle_candidates(&ds, &all);
        prop_assume!(candidates.len() >= 2);
        let first = candidates[pick.index(candidates.len())];
        let base = Premise::from_conditions([first]).unwrap();
        let before = premise_rows(&ds, &base);
        for c in &candidates {
            if let Some(p) = base.and(*c) {
                let after = p.covered_rows(&ds, None);
                prop_assert!(after.iter().all(|r| before.contains(r)));
                prop_assert_eq!(after, rows_where(&ds, &before, c));
            }
        }
    }

    #[test]
    fn merged_intervals_cover_the_intersection(a in 0.0f64..10.0, b in 0.0f64..10.0, x in -1.0f64..11.0) {
        let p = Premise::from_conditions([Condition::interval(0, Interval::greater_than(a))]).unwrap();
        let merged = p.and(Condition::interval(0, Interval::at_most(b)));
        prop_assert_eq!(merged.is_some(), a < b);
        if let Some(m) = merged {
            prop_assert_eq!(m.len(), 1);
            let ruleforge::rule::Relation::InInterval(iv) = m.conditions()[0].relation else { panic!() };
            prop_assert_eq!(iv.contains(x), x > a && x <= b);
        }
    }

    #[test]
    fn arff_round_trips(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let task = TASKS[(seed % 3) as usize];
        let ds = random_dataset(&mut rng, task, 20, 4);
        let mut back: DataSet = parse_arff(&write_arff(&ds), "mem").unwrap();
        let label = ds.attribute(ds.label_index().unwrap()).name.clone();
        back = back.with_role(&label, Role::Label).unwrap();
        if task == Task::Survival {
            back = back.with_role("time", Role::SurvivalTime).unwrap();
        }
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn voting_ignores_weight_scale(seed in 0u64..400, k in -10i32..10) {
        let mut rng = rng(seed);
        let task = if seed % 2 == 0 { Task::Classification } else { Task::Regression };
        let ds = random_dataset(&mut rng, task, 30, 3);
        let params = InductionParams { minsupp_new: 1, ..random_params(&mut rng) };
        let rs = induce_ruleset(&ds, &params, None).unwrap();
        let mut scaled = rs.clone();
        // powers of two scale every weight and every partial sum exactly
        let c = 2f64.powi(k);
        for r in &mut scaled.rules {
            r.voting_weight *= c;
        }
        prop_assert_eq!(predict(&rs, &ds).unwrap(), predict(&scaled, &ds).unwrap());
    }

    #[test]
    fn survival_predictions_are_survival_functions(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ds = random_dataset(&mut rng, Task::Survival, 30, 3);
        let rs = induce_ruleset(&ds, &InductionParams { minsupp_new: 2, ..InductionParams::default() }, None).unwrap();
        for p in predict(&rs, &ds).unwrap() {
            let km = p.survival().unwrap();
            let mut prev = 1.0;
            for &s in km.probabilities() {
                prop_assert!((0.0..=prev).contains(&s));
                prev = s;
            }
        }
    }

    #[test]
    fn folds_partition_the_rows(seed in any::<u64>(), rows in 2usize..60, k in 2usize..12) {
        prop_assume!(k <= rows);
        let mut rng = rng(seed);
        let ds = random_dataset(&mut rng, TASKS[(seed % 3) as usize], rows, 2);
        let folds = fold_assignment(&ds, k, seed).unwrap();
        prop_assert_eq!(folds.len(), rows);
        let mut sizes = vec![0usize; k];
        for f in folds {
            sizes[f] += 1;
        }
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn metrics_stay_in_range(pairs in prop::collection::vec((0u32..4, 0u32..4, -50.0f64..50.0, -50.0f64..50.0), 2..80)) {
        let actual: Vec<u32> = pairs.iter().map(|p| p.0).collect();
        let predicted: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        let b = balanced_accuracy(&actual, &predicted, 4).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
        let yhat: Vec<f64> = pairs.iter().map(|p| p.3).collect();
        if let Ok(r) = rrse(&y, &yhat) {
            prop_assert!(r >= 0.0);
        }
    }
}
