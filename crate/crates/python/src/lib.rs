//! Python bindings: a single estimator covering classification, regression
//! and survival, plus helpers for file-based use.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyString};

use ::ruleforge::cli::{load_dataset, model_from_str, model_to_string, predictions_csv, rules_report};
use ::ruleforge::dataset::{AttributeKind, AttributeMeta, Column, DataSet, Role};
use ::ruleforge::induction::{induce_ruleset, ExpertSpec, InductionParams};
use ::ruleforge::prediction::{predict, Prediction};
use ::ruleforge::quality::MeasureId;
use ::ruleforge::rule::RuleSet;

create_exception!(ruleforge, NotFittedError, PyRuntimeError);

fn value_error(e: ::ruleforge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn measure(name: Option<String>, default: MeasureId) -> PyResult<MeasureId> {
    name.map_or(Ok(default), |n| n.parse().map_err(value_error))
}

/// One cell as read from Python.
enum Raw {
    Missing,
    Number(f64),
    Text(String),
}

fn read_cell(obj: &Bound<'_, PyAny>) -> PyResult<Raw> {
    if obj.is_none() {
        return Ok(Raw::Missing);
    }
    if obj.is_instance_of::<PyString>() {
        return Ok(Raw::Text(obj.extract()?));
    }
    match obj.extract::<f64>() {
        Ok(v) if v.is_nan() => Ok(Raw::Missing),
        Ok(v) => Ok(Raw::Number(v)),
        Err(_) => Err(PyTypeError::new_err(format!("unsupported cell value {obj}"))),
    }
}

/// Builds a column; text anywhere makes it nominal with symbols in
/// first-seen order unless `domain` fixes the order.
fn build_column(name: &str, cells: Vec<Raw>, domain: Option<Vec<String>>) -> PyResult<(AttributeMeta, Column)> {
    let nominal = domain.is_some() || cells.iter().any(|c| matches!(c, Raw::Text(_)));
    if !nominal {
        let values = cells
            .into_iter()
            .map(|c| match c {
                Raw::Number(v) => v,
                _ => f64::NAN,
            })
            .collect();
        return Ok((AttributeMeta::numeric(name), Column::Numeric(values)));
    }
    let fixed = domain.is_some();
    let mut domain = domain.unwrap_or_default();
    let mut values = Vec::with_capacity(cells.len());
    for c in cells {
        let symbol = match c {
            Raw::Missing => {
                values.push(None);
                continue;
            }
            Raw::Text(s) => s,
            Raw::Number(_) => {
                return Err(PyTypeError::new_err(format!("column {name} mixes numbers and text")));
            }
        };
        let idx = match domain.iter().position(|d| *d == symbol) {
            Some(i) => i,
            None if fixed => return Err(PyValueError::new_err(format!("{symbol:?} is not in the domain of {name}"))),
            None => {
                domain.push(symbol);
                domain.len() - 1
            }
        };
        values.push(Some(idx as u32));
    }
    Ok((AttributeMeta::nominal(name, domain), Column::Nominal(values)))
}

fn rows_to_columns(x: &Bound<'_, PyAny>, width: Option<usize>) -> PyResult<Vec<Vec<Raw>>> {
    let mut columns: Vec<Vec<Raw>> = Vec::new();
    for (r, row) in x.try_iter()?.enumerate() {
        let row = row?;
        let cells: Vec<Raw> = row.try_iter()?.map(|c| read_cell(&c?)).collect::<PyResult<_>>()?;
        let expected = width.unwrap_or(if r == 0 { cells.len() } else { columns.len() });
        if cells.len() != expected {
            return Err(PyValueError::new_err(format!("row {r} has {} values, expected {expected}", cells.len())));
        }
        if columns.is_empty() {
            columns = (0..expected).map(|_| Vec::new()).collect();
        }
        for (col, cell) in columns.iter_mut().zip(cells) {
            col.push(cell);
        }
    }
    Ok(columns)
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Separate-and-conquer rule learner.
///
/// Every keyword left as `None` takes the library default, see
/// `default_params()`.
#[pyclass(module = "ruleforge")]
pub struct RuleLearner {
    params: InductionParams,
    expert: Option<String>,
    model: Option<RuleSet>,
}

impl RuleLearner {
    fn fitted(&self) -> PyResult<&RuleSet> {
        self.model
            .as_ref()
            .ok_or_else(|| NotFittedError::new_err("call fit() before using the model"))
    }

    fn train(&mut self, ds: &DataSet) -> PyResult<()> {
        let expert = match &self.expert {
            Some(text) => Some(ExpertSpec::from_toml(text).and_then(|s| s.resolve(ds)).map_err(value_error)?),
            None => None,
        };
        self.model = Some(induce_ruleset(ds, &self.params, expert.as_ref()).map_err(value_error)?);
        Ok(())
    }

    fn table(&self, x: &Bound<'_, PyAny>) -> PyResult<DataSet> {
        let rs = self.fitted()?;
        let schema: Vec<&AttributeMeta> = rs.schema.iter().filter(|a| a.role == Role::Regular).collect();
        let cells = rows_to_columns(x, Some(schema.len()))?;
        let (mut attributes, mut columns) = (Vec::new(), Vec::new());
        for (meta, raw) in schema.iter().zip(cells) {
            let (a, c) = match &meta.kind {
                AttributeKind::Numeric => build_column(&meta.name, raw, None)?,
                AttributeKind::Nominal { .. } => build_nominal_lenient(&meta.name, raw),
            };
            attributes.push(a);
            columns.push(c);
        }
        if attributes.is_empty() {
            return Err(PyValueError::new_err("the model has no input attributes"));
        }
        DataSet::new("predict", attributes, columns).map_err(value_error)
    }
}

/// Nominal column in first-seen symbol order. Schema alignment later turns
/// symbols the model never saw into missing values.
fn build_nominal_lenient(name: &str, cells: Vec<Raw>) -> (AttributeMeta, Column) {
    let mut domain: Vec<String> = Vec::new();
    let values = cells
        .into_iter()
        .map(|c| {
            let symbol = match c {
                Raw::Missing => return None,
                Raw::Text(s) if s.is_empty() => return None,
                Raw::Number(v) => v.to_string(),
                Raw::Text(s) => s,
            };
            let idx = domain.iter().position(|d| *d == symbol).unwrap_or_else(|| {
                domain.push(symbol);
                domain.len() - 1
            });
            Some(idx as u32)
        })
        .collect();
    (AttributeMeta::nominal(name, domain), Column::Nominal(values))
}

#[pymethods]
impl RuleLearner {
    #[new]
    #[pyo3(signature = (
        *,
        minsupp_new = None,
        max_uncovered_fraction = None,
        induction_measure = None,
        pruning_measure = None,
        voting_measure = None,
        pruning_enabled = None,
        max_growing_conditions = None,
        significance_level = None,
        significance_filter = None,
        seed = None,
        expert = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        minsupp_new: Option<usize>,
        max_uncovered_fraction: Option<f64>,
        induction_measure: Option<String>,
        pruning_measure: Option<String>,
        voting_measure: Option<String>,
        pruning_enabled: Option<bool>,
        max_growing_conditions: Option<usize>,
        significance_level: Option<f64>,
        significance_filter: Option<bool>,
        seed: Option<u64>,
        expert: Option<String>,
    ) -> PyResult<Self> {
        let d = InductionParams::default();
        let params = InductionParams {
            minsupp_new: minsupp_new.unwrap_or(d.minsupp_new),
            max_uncovered_fraction: max_uncovered_fraction.unwrap_or(d.max_uncovered_fraction),
            induction_measure: measure(induction_measure, d.induction_measure)?,
            pruning_measure: measure(pruning_measure, d.pruning_measure)?,
            voting_measure: measure(voting_measure, d.voting_measure)?,
            pruning_enabled: pruning_enabled.unwrap_or(d.pruning_enabled),
            max_growing_conditions: max_growing_conditions.or(d.max_growing_conditions),
            significance_level: significance_level.unwrap_or(d.significance_level),
            significance_filter: significance_filter.unwrap_or(d.significance_filter),
            seed: seed.unwrap_or(d.seed),
            ..d
        };
        params.validate().map_err(value_error)?;
        Ok(RuleLearner { params, expert, model: None })
    }

    /// Effective parameters of this learner as a dict.
    fn get_params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        params_dict(py, &self.params)
    }

    /// Fits on row-major `X`. Columns holding text are nominal. `y` holds
    /// class names, numeric targets, or event indicators when
    /// `survival_time` is given.
    #[pyo3(signature = (x, y, *, feature_names = None, survival_time = None, label = "label", domains = None))]
    fn fit<'py>(
        mut slf: PyRefMut<'py, Self>,
        x: &Bound<'py, PyAny>,
        y: &Bound<'py, PyAny>,
        feature_names: Option<Vec<String>>,
        survival_time: Option<&Bound<'py, PyAny>>,
        label: &str,
        domains: Option<&Bound<'py, PyDict>>,
    ) -> PyResult<PyRefMut<'py, Self>> {
        let cells = rows_to_columns(x, feature_names.as_ref().map(Vec::len))?;
        let names = feature_names.unwrap_or_else(|| default_names(cells.len()));
        let rows = cells.first().map_or(0, Vec::len);
        let domain_of = |name: &str| -> PyResult<Option<Vec<String>>> {
            match domains.map(|d| d.get_item(name)).transpose()?.flatten() {
                Some(v) => Ok(Some(v.extract()?)),
                None => Ok(None),
            }
        };
        let (mut attributes, mut columns) = (Vec::new(), Vec::new());
        for (name, raw) in names.iter().zip(cells) {
            let (a, c) = build_column(name, raw, domain_of(name)?)?;
            attributes.push(a);
            columns.push(c);
        }

        let targets: Vec<Raw> = y.try_iter()?.map(|c| read_cell(&c?)).collect::<PyResult<_>>()?;
        if targets.len() != rows {
            return Err(PyValueError::new_err(format!("X has {rows} rows but y has {}", targets.len())));
        }
        let (mut meta, col) = build_column(label, targets, domain_of(label)?)?;
        meta.role = Role::Label;
        attributes.push(meta);
        columns.push(col);

        if let Some(times) = survival_time {
            let times: Vec<Raw> = times.try_iter()?.map(|c| read_cell(&c?)).collect::<PyResult<_>>()?;
            if times.len() != rows {
                return Err(PyValueError::new_err(format!("X has {rows} rows but survival_time has {}", times.len())));
            }
            if times.iter().any(|t| matches!(t, Raw::Text(_))) {
                return Err(PyTypeError::new_err("survival_time must be numeric"));
            }
            let (mut meta, col) = build_column("survival_time", times, None)?;
            meta.role = Role::SurvivalTime;
            attributes.push(meta);
            columns.push(col);
        }
        let ds = DataSet::new("python", attributes, columns).map_err(value_error)?;
        slf.train(&ds)?;
        Ok(slf)
    }

    /// Fits on a CSV or ARFF file, exactly as the command-line trainer does.
    #[pyo3(signature = (path, label, *, survival_time = None))]
    fn fit_file<'py>(
        mut slf: PyRefMut<'py, Self>,
        path: std::path::PathBuf,
        label: &str,
        survival_time: Option<&str>,
    ) -> PyResult<PyRefMut<'py, Self>> {
        let ds = load_dataset(&path, None, label, survival_time).map_err(value_error)?;
        slf.train(&ds)?;
        Ok(slf)
    }

    /// Predictions for row-major `X` with the training column order: class
    /// names, numbers, or lists of `(time, probability)` steps.
    fn predict(&self, py: Python<'_>, x: &Bound<'_, PyAny>) -> PyResult<Vec<Py<PyAny>>> {
        let rs = self.fitted()?;
        let ds = self.table(x)?;
        let preds = predict(rs, &ds).map_err(value_error)?;
        preds.iter().map(|p| prediction_object(py, rs, p)).collect()
    }

    /// Predictions for a data file in the same CSV layout the
    /// command-line `predict` writes.
    fn predict_file(&self, path: std::path::PathBuf) -> PyResult<String> {
        let rs = self.fitted()?;
        let ds = ::ruleforge::cli::load_table(&path, None, &Default::default()).map_err(value_error)?;
        let preds = predict(rs, &ds).map_err(value_error)?;
        predictions_csv(rs, &preds).map_err(value_error)
    }

    /// Rule texts in induction order.
    fn get_rules(&self) -> PyResult<Vec<String>> {
        Ok(self.fitted()?.rule_texts())
    }

    /// Full text report, as written by `train --report`.
    #[pyo3(signature = (title = "model"))]
    fn report(&self, title: &str) -> PyResult<String> {
        Ok(rules_report(self.fitted()?, title))
    }

    /// Model in the JSON format used by the command-line tool.
    fn to_json(&self) -> PyResult<String> {
        model_to_string(self.fitted()?).map_err(value_error)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let model = model_from_str(text).map_err(value_error)?;
        Ok(RuleLearner { params: model.params.clone(), expert: None, model: Some(model) })
    }

    #[getter]
    fn is_fitted(&self) -> bool {
        self.model.is_some()
    }

    fn __repr__(&self) -> String {
        let state = match &self.model {
            Some(m) => format!("{} rules", m.len()),
            None => "unfitted".to_string(),
        };
        format!("RuleLearner(minsupp_new={}, {state})", self.params.minsupp_new)
    }
}

fn prediction_object(py: Python<'_>, rs: &RuleSet, p: &Prediction) -> PyResult<Py<PyAny>> {
    let obj = match p {
        Prediction::Class(c) => {
            let label = rs.schema.iter().find(|a| a.role == Role::Label);
            let symbol = label.and_then(|a| a.domain().get(*c as usize)).cloned().unwrap_or_else(|| c.to_string());
            symbol.into_pyobject(py)?.into_any().unbind()
        }
        Prediction::Value(v) => v.into_pyobject(py)?.into_any().unbind(),
        Prediction::Survival(km) => {
            let steps: Vec<(f64, f64)> = km.times().iter().copied().zip(km.probabilities().iter().copied()).collect();
            steps.into_pyobject(py)?.into_any().unbind()
        }
    };
    Ok(obj)
}

fn params_dict<'py>(py: Python<'py>, p: &InductionParams) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("minsupp_new", p.minsupp_new)?;
    d.set_item("max_uncovered_fraction", p.max_uncovered_fraction)?;
    d.set_item("induction_measure", p.induction_measure.name())?;
    d.set_item("pruning_measure", p.pruning_measure.name())?;
    d.set_item("voting_measure", p.voting_measure.name())?;
    d.set_item("pruning_enabled", p.pruning_enabled)?;
    d.set_item("max_growing_conditions", p.max_growing_conditions)?;
    d.set_item("significance_level", p.significance_level)?;
    d.set_item("significance_filter", p.significance_filter)?;
    d.set_item("seed", p.seed)?;
    Ok(d)
}

/// Library defaults shared with the command-line tool.
#[pyfunction]
fn default_params(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    params_dict(py, &InductionParams::default())
}

#[pymodule]
#[pyo3(name = "ruleforge")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RuleLearner>()?;
    m.add_function(wrap_pyfunction!(default_params, m)?)?;
    m.add("NotFittedError", m.py().get_type::<NotFittedError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &str) -> Raw {
        Raw::Text(s.to_string())
    }

    #[test]
    fn numbers_only_make_a_numeric_column() {
        let (meta, col) = build_column("a", vec![Raw::Number(1.0), Raw::Missing], None).unwrap();
        assert!(meta.is_numeric());
        assert!(col.is_missing(1));
    }

    #[test]
    fn text_makes_a_nominal_column_in_first_seen_order() {
        let (meta, col) = build_column("a", vec![text("b"), Raw::Missing, text("a"), text("b")], None).unwrap();
        assert_eq!(meta.domain(), ["b", "a"]);
        assert_eq!(col, Column::Nominal(vec![Some(0), None, Some(1), Some(0)]));
    }

    #[test]
    fn declared_domain_fixes_the_order() {
        let domain = Some(vec!["a".to_string(), "b".to_string()]);
        let (meta, col) = build_column("a", vec![text("b"), text("a")], domain).unwrap();
        assert_eq!(meta.domain(), ["a", "b"]);
        assert_eq!(col, Column::Nominal(vec![Some(1), Some(0)]));
    }

    #[test]
    fn lenient_columns_drop_empty_symbols() {
        let (meta, col) = build_nominal_lenient("a", vec![text(""), Raw::Number(2.0)]);
        assert_eq!(meta.domain(), ["2"]);
        assert_eq!(col, Column::Nominal(vec![None, Some(0)]));
    }
}
