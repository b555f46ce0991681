//! Human-readable rule and metric reports.

use std::fmt::Write as _;

use crate::prediction::{CVReport, EvaluationReport};
use crate::quality::KaplanMeier;
use crate::rule::{fmt_g6, format_rule, Consequence, DefaultModel, RuleSet};

fn survival_table(out: &mut String, km: &KaplanMeier, indent: &str) {
    let _ = writeln!(out, "{indent}time\tprobability");
    let _ = writeln!(out, "{indent}0\t1");
    for (t, s) in km.times().iter().zip(km.probabilities()) {
        let _ = writeln!(out, "{indent}{}\t{}", fmt_g6(*t), fmt_g6(*s));
    }
}

/// Rules with covering statistics, p-values and, for survival models, the
/// estimate behind every rule as `(time, probability)` rows.
pub fn rules_report(rs: &RuleSet, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {title}");
    let _ = writeln!(out, "task: {}", rs.task);
    let p = &rs.params;
    let _ = writeln!(
        out,
        "params: minsupp_new={} max_uncovered_fraction={} induction={} pruning={} voting={} pruning_enabled={}",
        p.minsupp_new,
        fmt_g6(p.max_uncovered_fraction),
        p.induction_measure,
        p.pruning_measure,
        p.voting_measure,
        p.pruning_enabled
    );
    let _ = writeln!(out, "rules: {}", rs.len());
    for w in &rs.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    for (i, rule) in rs.rules.iter().enumerate() {
        let c = &rule.covering;
        let _ = writeln!(out, "\n[{}] {}", i + 1, format_rule(rule, &rs.schema));
        let _ = writeln!(out, "    covering: p={} n={} P={} N={}", c.p, c.n, c.total_pos, c.total_neg);
        let _ = writeln!(out, "    p-value: {}", fmt_g6(rule.p_value));
        let _ = writeln!(out, "    voting weight: {}", fmt_g6(rule.voting_weight));
        if let Consequence::Survival(km) = &rule.consequence {
            let _ = writeln!(out, "    survival estimate:");
            survival_table(&mut out, km, "      ");
        }
    }
    let _ = writeln!(out);
    match &rs.default_model {
        DefaultModel::Majority { class, class_counts } => {
            let label = rs.schema.iter().find(|a| a.role == crate::dataset::Role::Label);
            let name = label.map_or_else(|| class.to_string(), |a| a.domain()[*class as usize].clone());
            let _ = writeln!(out, "default: {name} (class counts {class_counts:?})");
        }
        DefaultModel::Mean { mean } => {
            let _ = writeln!(out, "default: {}", fmt_g6(*mean));
        }
        DefaultModel::Survival(km) => {
            let _ = writeln!(out, "default: survival estimate of the training set");
            survival_table(&mut out, km, "  ");
        }
    }
    out
}

fn metric_lines(out: &mut String, report: &EvaluationReport, indent: &str) {
    let (name, value) = report.headline();
    let _ = writeln!(out, "{indent}{name}: {}", fmt_g6(value));
    let _ = writeln!(out, "{indent}rules: {}", report.rule_count);
    if let Some(m) = &report.confusion_matrix {
        let _ = writeln!(out, "{indent}confusion matrix (rows actual, columns predicted):");
        for row in m {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{indent}  {}", cells.join("\t"));
        }
    }
}

pub fn evaluation_text(report: &EvaluationReport, title: &str) -> String {
    let mut out = format!("# {title}\nevaluation: train/test\n");
    metric_lines(&mut out, report, "");
    out
}

pub fn cv_text(report: &CVReport, title: &str) -> String {
    let mut out = format!("# {title}\nevaluation: {}-fold cross-validation, seed {}\n", report.k, report.seed);
    for f in &report.folds {
        let _ = writeln!(out, "\nfold {} (train {}, test {})", f.fold + 1, f.train_size, f.test_size);
        metric_lines(&mut out, &f.report, "  ");
    }
    let a = &report.aggregate;
    let _ = writeln!(out, "\nmean over folds");
    for (name, value) in [("BAcc", a.balanced_accuracy), ("RRSE", a.rrse), ("IBS", a.ibs)] {
        if let Some(v) = value {
            let _ = writeln!(out, "  {name}: {}", fmt_g6(v));
        }
    }
    let _ = writeln!(out, "  rules: {}", fmt_g6(a.rule_count));
    out
}
