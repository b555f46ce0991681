//! Batch experiments: every dataset crossed with every parameter set.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::induction::{induce_ruleset, ExpertSpec, InductionParams};
use crate::prediction::{cross_validate, evaluate};

use super::report::{cv_text, evaluation_text, rules_report};
use super::{load_dataset, DataFormat};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub report_directory: PathBuf,
    /// Entries run concurrently up to this many at a time.
    #[serde(default)]
    pub jobs: Option<usize>,
    pub evaluation: EvaluationSpec,
    pub datasets: Vec<DatasetSpec>,
    pub parameter_sets: Vec<ParameterSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvaluationSpec {
    Cv {
        #[serde(default = "default_folds")]
        folds: usize,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    TrainTest,
}

fn default_folds() -> usize {
    10
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: PathBuf,
    #[serde(default)]
    pub test_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<DataFormat>,
    pub label: String,
    #[serde(default)]
    pub survival_time: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSet {
    pub name: String,
    #[serde(default)]
    pub params: InductionParams,
    #[serde(default)]
    pub expert_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates a config; relative paths are resolved against
    /// `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.report_directory);
        for d in &mut cfg.datasets {
            resolve(&mut d.path);
            if let Some(t) = &mut d.test_path {
                resolve(t);
            }
        }
        for p in &mut cfg.parameter_sets {
            if let Some(e) = &mut p.expert_file {
                resolve(e);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!("version: unsupported config version {}", self.version));
        }
        if self.datasets.is_empty() {
            return bad("datasets: at least one dataset is required".into());
        }
        if self.parameter_sets.is_empty() {
            return bad("parameter_sets: at least one parameter set is required".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs: must be at least 1".into());
        }
        if let EvaluationSpec::Cv { folds, .. } = self.evaluation {
            if folds < 2 {
                return bad("evaluation.folds: must be at least 2".into());
            }
        }
        let mut names = BTreeSet::new();
        for (i, d) in self.datasets.iter().enumerate() {
            if !safe_name(&d.name) || !names.insert(d.name.as_str()) {
                return bad(format!("datasets[{i}].name: {:?} is empty, unsafe or duplicated", d.name));
            }
            if self.evaluation == EvaluationSpec::TrainTest && d.test_path.is_none() {
                return bad(format!("datasets[{i}].test_path: required for train_test evaluation"));
            }
        }
        let mut names = BTreeSet::new();
        for (i, p) in self.parameter_sets.iter().enumerate() {
            if !safe_name(&p.name) || !names.insert(p.name.as_str()) {
                return bad(format!("parameter_sets[{i}].name: {:?} is empty, unsafe or duplicated", p.name));
            }
            p.params
                .validate()
                .or_else(|e| bad(format!("parameter_sets[{i}].params: {e}")))?;
        }
        Ok(())
    }
}

fn safe_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) && !name.starts_with('.')
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySummary {
    pub dataset: String,
    pub parameter_set: String,
    pub status: EntryStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Rules in the model trained on the full training data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub version: u32,
    pub evaluation: EvaluationSpec,
    pub entries: Vec<EntrySummary>,
}

impl ExperimentSummary {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.status == EntryStatus::Failed).count()
    }
}

struct EntryOutput {
    rules: String,
    metrics: String,
    metric: &'static str,
    value: f64,
    rule_count: usize,
}

fn run_entry(cfg: &ExperimentConfig, d: &DatasetSpec, p: &ParameterSet) -> Result<EntryOutput> {
    let title = format!("{} / {}", d.name, p.name);
    let train = load_dataset(&d.path, d.format, &d.label, d.survival_time.as_deref())?;
    let expert = match &p.expert_file {
        Some(path) => Some(ExpertSpec::load(path)?.resolve(&train)?),
        None => None,
    };
    let rs = induce_ruleset(&train, &p.params, expert.as_ref())?;
    let (metrics, metric, value) = match &cfg.evaluation {
        EvaluationSpec::Cv { folds, seed } => {
            let report = cross_validate(&train, *folds, &p.params, expert.as_ref(), *seed)?;
            let (name, _) = report.folds[0].report.headline();
            let value = match rs.task {
                crate::dataset::Task::Classification => report.aggregate.balanced_accuracy,
                crate::dataset::Task::Regression => report.aggregate.rrse,
                crate::dataset::Task::Survival => report.aggregate.ibs,
            };
            (cv_text(&report, &title), name, value.unwrap_or(f64::NAN))
        }
        EvaluationSpec::TrainTest => {
            let test_path = d.test_path.as_ref().expect("validated");
            let test = load_dataset(test_path, d.format, &d.label, d.survival_time.as_deref())?;
            let report = evaluate(&rs, &test)?;
            let (name, value) = report.headline();
            (evaluation_text(&report, &title), name, value)
        }
    };
    Ok(EntryOutput {
        rules: rules_report(&rs, &title),
        metrics,
        metric,
        value,
        rule_count: rs.len(),
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs every entry and writes `<dataset>__<params>.rules.txt`,
/// `<dataset>__<params>.metrics.txt` per successful entry plus one
/// `summary.json`. `jobs` overrides the config's concurrency bound.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let dir = &cfg.report_directory;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pairs: Vec<(&DatasetSpec, &ParameterSet)> = cfg
        .datasets
        .iter()
        .flat_map(|d| cfg.parameter_sets.iter().map(move |p| (d, p)))
        .collect();
    let run_all = || -> Vec<Result<EntryOutput>> { pairs.par_iter().map(|(d, p)| run_entry(cfg, d, p)).collect() };
    let results = match jobs.or(cfg.jobs) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("jobs: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut entries = Vec::with_capacity(pairs.len());
    for ((d, p), result) in pairs.iter().zip(results) {
        let mut entry = EntrySummary {
            dataset: d.name.clone(),
            parameter_set: p.name.clone(),
            status: EntryStatus::Ok,
            error: None,
            metric: None,
            value: None,
            rule_count: None,
            files: Vec::new(),
        };
        match result {
            Ok(out) => {
                let stem = format!("{}__{}", d.name, p.name);
                for (suffix, text) in [("rules.txt", &out.rules), ("metrics.txt", &out.metrics)] {
                    let name = format!("{stem}.{suffix}");
                    write(&dir.join(&name), text)?;
                    entry.files.push(name);
                }
                entry.metric = Some(out.metric.to_string());
                entry.value = out.value.is_finite().then_some(out.value);
                entry.rule_count = Some(out.rule_count);
            }
            Err(e) => {
                entry.status = EntryStatus::Failed;
                entry.error = Some(e.to_string());
            }
        }
        entries.push(entry);
    }
    let summary = ExperimentSummary {
        version: CONFIG_VERSION,
        evaluation: cfg.evaluation.clone(),
        entries,
    };
    let mut json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Model(e.to_string()))?;
    json.push('\n');
    write(&dir.join("summary.json"), &json)?;
    Ok(summary)
}
