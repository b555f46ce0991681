//! Command-line interface: single-shot commands and the experiment runner.

mod experiment;
mod model;
mod report;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dataset::{load_arff, load_csv, CsvOptions, DataSet, Role, Task};
use crate::error::{Error, Result};
use crate::induction::{induce_ruleset, ExpertKnowledge, ExpertSpec, InductionParams};
use crate::prediction::{cross_validate, evaluate, predict, Prediction};
use crate::quality::MeasureId;
use crate::rule::RuleSet;

pub use self::experiment::{
    run_experiment, DatasetSpec, EntryStatus, EntrySummary, EvaluationSpec, ExperimentConfig, ExperimentSummary,
    ParameterSet,
};
pub use self::model::{load_model, model_from_str, model_to_string, save_model, MODEL_FORMAT, MODEL_VERSION};
pub use self::report::{cv_text, evaluation_text, rules_report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Arff,
    Csv,
}

impl DataFormat {
    fn detect(path: &Path) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("tsv") => DataFormat::Csv,
            _ => DataFormat::Arff,
        }
    }
}

/// Loads a table without assigning roles.
pub fn load_table(path: &Path, format: Option<DataFormat>, csv: &CsvOptions) -> Result<DataSet> {
    match format.unwrap_or_else(|| DataFormat::detect(path)) {
        DataFormat::Arff => load_arff(path),
        DataFormat::Csv => load_csv(path, csv),
    }
}

/// Loads a table and assigns the label and optional survival-time roles.
pub fn load_dataset(path: &Path, format: Option<DataFormat>, label: &str, survival_time: Option<&str>) -> Result<DataSet> {
    let ds = load_table(path, format, &CsvOptions::default())?.with_role(label, Role::Label)?;
    match survival_time {
        Some(t) => ds.with_role(t, Role::SurvivalTime),
        None => Ok(ds),
    }
}

#[derive(Debug, Parser)]
#[command(name = "ruleforge", version, about = "Rule induction for classification, regression and survival data")]
pub struct Cli {
    /// Worker threads for candidate evaluation, folds and experiment entries.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce a rule set and save it.
    Train(TrainArgs),
    /// Apply a saved rule set and write per-example predictions.
    Predict(PredictArgs),
    /// Score a saved rule set on labelled data.
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation.
    Cv(CvArgs),
    /// Run a batch experiment described by a config file.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Classification,
    Regression,
    Survival,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Classification => Task::Classification,
            TaskArg::Regression => Task::Regression,
            TaskArg::Survival => Task::Survival,
        }
    }
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// CSV input has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl TableArgs {
    fn load(&self) -> Result<DataSet> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidArgument("delimiter must be an ASCII character".into()));
        }
        let csv = CsvOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
        };
        load_table(&self.data, self.format, &csv)
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[command(flatten)]
    pub table: TableArgs,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub survival_time: Option<String>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
}

fn parse_measure(s: &str) -> std::result::Result<MeasureId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct InductionArgs {
    #[arg(long)]
    pub minsupp_new: Option<usize>,
    /// Largest fraction of a class's positives that may stay uncovered.
    #[arg(long)]
    pub max_uncovered: Option<f64>,
    #[arg(long, value_parser = parse_measure)]
    pub measure_induction: Option<MeasureId>,
    #[arg(long, value_parser = parse_measure)]
    pub measure_pruning: Option<MeasureId>,
    #[arg(long, value_parser = parse_measure)]
    pub measure_voting: Option<MeasureId>,
    #[arg(long)]
    pub significance_level: Option<f64>,
    /// Drop rules whose p-value exceeds the significance level.
    #[arg(long)]
    pub filter_significant: bool,
    #[arg(long)]
    pub no_pruning: bool,
    #[arg(long)]
    pub max_conditions: Option<usize>,
    /// TOML file with initial rules, preferred/forbidden conditions and rule counts.
    #[arg(long)]
    pub expert_file: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl InductionArgs {
    pub fn params(&self) -> InductionParams {
        let mut p = InductionParams::default();
        if let Some(v) = self.minsupp_new {
            p.minsupp_new = v;
        }
        if let Some(v) = self.max_uncovered {
            p.max_uncovered_fraction = v;
        }
        if let Some(v) = self.measure_induction {
            p.induction_measure = v;
        }
        if let Some(v) = self.measure_pruning {
            p.pruning_measure = v;
        }
        if let Some(v) = self.measure_voting {
            p.voting_measure = v;
        }
        if let Some(v) = self.significance_level {
            p.significance_level = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        p.significance_filter = self.filter_significant;
        p.pruning_enabled = !self.no_pruning;
        p.max_growing_conditions = self.max_conditions;
        p
    }

    fn expert(&self, ds: &DataSet) -> Result<Option<ExpertKnowledge>> {
        self.expert_file
            .as_ref()
            .map(|path| ExpertSpec::load(path)?.resolve(ds))
            .transpose()
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub induction: InductionArgs,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Also write a human-readable rules report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model_in: PathBuf,
    #[command(flatten)]
    pub table: TableArgs,
    /// Predictions CSV; standard output when omitted.
    #[arg(long, visible_alias = "output")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model_in: PathBuf,
    #[command(flatten)]
    pub table: TableArgs,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub induction: InductionArgs,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Contradictory flags or an invalid config (exit code 2).
    Usage(String),
    /// Failure while running (exit code 1).
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => CliError::Usage(m),
            other => CliError::Run(other),
        }
    }
}

impl DataArgs {
    fn check(&self) -> std::result::Result<(), CliError> {
        match (self.task, &self.survival_time) {
            (Some(TaskArg::Survival), None) => Err(CliError::Usage("--task survival requires --survival-time".into())),
            (Some(t), Some(_)) if t != TaskArg::Survival => Err(CliError::Usage(
                "--survival-time is only valid with --task survival".into(),
            )),
            _ => Ok(()),
        }
    }

    fn load(&self) -> std::result::Result<DataSet, CliError> {
        self.check()?;
        let mut ds = self.table.load()?.with_role(&self.label, Role::Label)?;
        if let Some(t) = &self.survival_time {
            ds = ds.with_role(t, Role::SurvivalTime)?;
        }
        if let Some(expected) = self.task {
            let task = ds.require_task()?;
            if task != Task::from(expected) {
                return Err(CliError::Run(Error::Role(format!(
                    "--task {} but the data describe a {task} problem",
                    Task::from(expected)
                ))));
            }
        }
        Ok(ds)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Model(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Per-example predictions as CSV. Survival curves use one row per step,
/// starting with `(0, 1)`.
pub fn predictions_csv(rs: &RuleSet, predictions: &[Prediction]) -> Result<String> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let err = |e: ::csv::Error| Error::Model(e.to_string());
    let label = rs.schema.iter().find(|a| a.role == Role::Label);
    match rs.task {
        Task::Survival => w.write_record(["row", "time", "probability"]).map_err(err)?,
        _ => w.write_record(["row", "prediction"]).map_err(err)?,
    }
    for (i, p) in predictions.iter().enumerate() {
        let row = i.to_string();
        match p {
            Prediction::Class(c) => {
                let symbol = label.and_then(|a| a.domain().get(*c as usize)).cloned().unwrap_or_else(|| c.to_string());
                w.write_record([row.as_str(), symbol.as_str()]).map_err(err)?;
            }
            Prediction::Value(v) => w.write_record([row, v.to_string()]).map_err(err)?,
            Prediction::Survival(km) => {
                w.write_record([row.as_str(), "0", "1"]).map_err(err)?;
                for (t, s) in km.times().iter().zip(km.probabilities()) {
                    w.write_record([row.clone(), t.to_string(), s.to_string()]).map_err(err)?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Model(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Model(e.to_string()))
}

pub fn execute(cli: &Cli) -> std::result::Result<(), CliError> {
    match &cli.command {
        Command::Train(a) => {
            let ds = a.data.load()?;
            let params = a.induction.params();
            let expert = a.induction.expert(&ds)?;
            let rs = induce_ruleset(&ds, &params, expert.as_ref())?;
            save_model(&rs, &a.model_out)?;
            if let Some(r) = &a.report {
                write_output(Some(r), &rules_report(&rs, ds.relation()))?;
            }
            for w in &rs.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Predict(a) => {
            let rs = load_model(&a.model_in)?;
            let ds = a.table.load()?;
            let preds = predict(&rs, &ds)?;
            write_output(a.report.as_deref(), &predictions_csv(&rs, &preds)?)?;
        }
        Command::Evaluate(a) => {
            let rs = load_model(&a.model_in)?;
            let ds = a.table.load()?;
            write_output(a.report.as_deref(), &json(&evaluate(&rs, &ds)?)?)?;
        }
        Command::Cv(a) => {
            let ds = a.data.load()?;
            let params = a.induction.params();
            let expert = a.induction.expert(&ds)?;
            let report = cross_validate(&ds, a.folds, &params, expert.as_ref(), params.seed)?;
            write_output(a.report.as_deref(), &json(&report)?)?;
        }
        Command::Run(a) => {
            let cfg = ExperimentConfig::load(&a.config)?;
            let summary = run_experiment(&cfg, cli.jobs)?;
            for e in summary.entries.iter().filter(|e| e.status == EntryStatus::Failed) {
                eprintln!(
                    "failed: {} / {}: {}",
                    e.dataset,
                    e.parameter_set,
                    e.error.as_deref().unwrap_or("")
                );
            }
            if summary.failures() > 0 {
                return Err(CliError::Run(Error::InvalidArgument(format!(
                    "{} of {} entries failed",
                    summary.failures(),
                    summary.entries.len()
                ))));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("usage error: --jobs must be at least 1");
        return 2;
    }
    let outcome = match cli.jobs {
        // the experiment runner builds its own pool from --jobs
        Some(n) if !matches!(cli.command, Command::Run(_)) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(CliError::Run(Error::InvalidArgument(e.to_string()))),
        },
        _ => execute(&cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
