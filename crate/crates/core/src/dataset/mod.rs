//! Columnar example tables with attribute metadata and role assignment.
//!
//! A [`DataSet`] is immutable once built: role changes return a new value.
//! Numeric cells store `NaN` for missing values, nominal cells store `None`.

mod arff;
mod csv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::arff::{load_arff, parse_arff, write_arff};
pub use self::csv::{load_csv, parse_csv, CsvOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum AttributeKind {
    Nominal { domain: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Regular,
    Label,
    SurvivalTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
    Survival,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
            Task::Survival => "survival",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeMeta {
    pub name: String,
    pub kind: AttributeKind,
    pub role: Role,
}

impl AttributeMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        AttributeMeta {
            name: name.into(),
            kind: AttributeKind::Numeric,
            role: Role::Regular,
        }
    }

    pub fn nominal<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        AttributeMeta {
            name: name.into(),
            kind: AttributeKind::Nominal {
                domain: domain.into_iter().map(Into::into).collect(),
            },
            role: Role::Regular,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Nominal domain, empty for numeric attributes.
    pub fn domain(&self) -> &[String] {
        match &self.kind {
            AttributeKind::Nominal { domain } => domain,
            AttributeKind::Numeric => &[],
        }
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<u32> {
        self.domain().iter().position(|s| s == symbol).map(|i| i as u32)
    }
}

#[derive(Debug, Clone)]
pub enum Column {
    /// `NaN` marks a missing value.
    Numeric(Vec<f64>),
    Nominal(Vec<Option<u32>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Nominal(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self, row: usize) -> Cell {
        match self {
            Column::Numeric(v) => {
                let x = v[row];
                if x.is_nan() {
                    Cell::Missing
                } else {
                    Cell::Numeric(x)
                }
            }
            Column::Nominal(v) => v[row].map_or(Cell::Missing, Cell::Nominal),
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        matches!(self.cell(row), Cell::Missing)
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Nominal(v) => Column::Nominal(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// Missing numeric cells compare equal to each other.
impl PartialEq for Column {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Column::Numeric(a), Column::Numeric(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
            }
            (Column::Nominal(a), Column::Nominal(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Numeric(f64),
    Nominal(u32),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    relation: String,
    attributes: Vec<AttributeMeta>,
    columns: Vec<Column>,
    rows: usize,
    task: Option<Task>,
}

impl DataSet {
    /// Builds a dataset, validating column shapes, nominal indices and roles.
    pub fn new(relation: impl Into<String>, attributes: Vec<AttributeMeta>, columns: Vec<Column>) -> Result<Self> {
        if attributes.len() != columns.len() {
            return Err(Error::Schema(format!(
                "{} attributes but {} columns",
                attributes.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Column::len);
        for (meta, col) in attributes.iter().zip(&columns) {
            if col.len() != rows {
                return Err(Error::Schema(format!("column {} has {} rows, expected {rows}", meta.name, col.len())));
            }
            match (&meta.kind, col) {
                (AttributeKind::Numeric, Column::Numeric(_)) => {}
                (AttributeKind::Nominal { domain }, Column::Nominal(values)) => {
                    validate_domain(&meta.name, domain)?;
                    if let Some(bad) = values.iter().flatten().find(|&&v| v as usize >= domain.len()) {
                        return Err(Error::Schema(format!(
                            "nominal index {bad} outside the domain of {}",
                            meta.name
                        )));
                    }
                }
                _ => return Err(Error::Schema(format!("column kind does not match attribute {}", meta.name))),
            }
        }
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Schema(format!("duplicate attribute name {}", a.name)));
            }
        }
        let mut ds = DataSet {
            relation: relation.into(),
            attributes,
            columns,
            rows,
            task: None,
        };
        ds.validate_roles()?;
        ds.task = ds.infer_task();
        Ok(ds)
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    /// Number of examples, |D|.
    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn attributes(&self) -> &[AttributeMeta] {
        &self.attributes
    }

    pub fn attribute(&self, index: usize) -> &AttributeMeta {
        &self.attributes[index]
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn column(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn cell(&self, row: usize, attribute: usize) -> Cell {
        self.columns[attribute].cell(row)
    }

    pub fn task(&self) -> Option<Task> {
        self.task
    }

    /// Task of a dataset that must have a label.
    pub fn require_task(&self) -> Result<Task> {
        self.task
            .ok_or_else(|| Error::Role("dataset has no label attribute".into()))
    }

    pub fn label_index(&self) -> Option<usize> {
        self.attributes.iter().position(|a| a.role == Role::Label)
    }

    pub fn survival_time_index(&self) -> Option<usize> {
        self.attributes.iter().position(|a| a.role == Role::SurvivalTime)
    }

    /// Indices of attributes usable in rule premises.
    pub fn regular_attributes(&self) -> impl Iterator<Item = usize> + '_ {
        self.attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == Role::Regular)
            .map(|(i, _)| i)
    }

    /// Class index of every example; classification datasets only.
    pub fn class_labels(&self) -> Result<Vec<u32>> {
        let label = self.label_index().ok_or_else(|| Error::Role("no label attribute".into()))?;
        match &self.columns[label] {
            Column::Nominal(v) => v
                .iter()
                .map(|c| c.ok_or_else(|| Error::Role("missing label value".into())))
                .collect(),
            Column::Numeric(_) => Err(Error::Role("label is not nominal".into())),
        }
    }

    /// Numeric label of every example; regression datasets only.
    pub fn numeric_labels(&self) -> Result<&[f64]> {
        let label = self.label_index().ok_or_else(|| Error::Role("no label attribute".into()))?;
        match &self.columns[label] {
            Column::Numeric(v) => Ok(v),
            Column::Nominal(_) => Err(Error::Role("label is not numeric".into())),
        }
    }

    pub fn survival_times(&self) -> Result<&[f64]> {
        let idx = self
            .survival_time_index()
            .ok_or_else(|| Error::Role("no survival_time attribute".into()))?;
        match &self.columns[idx] {
            Column::Numeric(v) => Ok(v),
            Column::Nominal(_) => Err(Error::Role("survival_time is not numeric".into())),
        }
    }

    /// Event indicators (`true` = event observed, `false` = censored).
    pub fn events(&self) -> Result<Vec<bool>> {
        let label = self.label_index().ok_or_else(|| Error::Role("no label attribute".into()))?;
        (0..self.rows)
            .map(|r| event_value(&self.attributes[label], &self.columns[label], r))
            .collect()
    }

    /// Returns a copy with `role` assigned to the attribute called `name`.
    ///
    /// Assigning `Regular` clears a previous role.
    pub fn with_role(&self, name: &str, role: Role) -> Result<DataSet> {
        let idx = self
            .attribute_index(name)
            .ok_or_else(|| Error::Role(format!("no attribute named {name}")))?;
        if role != Role::Regular {
            if let Some(other) = self.attributes.iter().position(|a| a.role == role) {
                if other != idx {
                    return Err(Error::Role(format!(
                        "attribute {} already has role {role:?}",
                        self.attributes[other].name
                    )));
                }
            }
        }
        let mut ds = self.clone();
        ds.attributes[idx].role = role;
        ds.validate_roles()?;
        ds.task = ds.infer_task();
        Ok(ds)
    }

    /// Rows `rows` in the given order, same schema.
    pub fn subset(&self, rows: &[usize]) -> DataSet {
        DataSet {
            relation: self.relation.clone(),
            attributes: self.attributes.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            rows: rows.len(),
            task: self.task,
        }
    }

    /// Re-expresses this dataset in the layout of `schema`.
    ///
    /// Attributes are matched by name. Nominal symbols are mapped onto the
    /// schema's closed domains; symbols the schema does not know become
    /// missing. Roles and task follow the schema; a label or survival-time
    /// column absent here is filled with missing values.
    pub fn conform_to(&self, schema: &[AttributeMeta]) -> Result<DataSet> {
        let mut columns = Vec::with_capacity(schema.len());
        for meta in schema {
            let src = self.attribute_index(&meta.name);
            let col = match (src, &meta.kind) {
                (None, _) if meta.role != Role::Regular => match &meta.kind {
                    AttributeKind::Numeric => Column::Numeric(vec![f64::NAN; self.rows]),
                    AttributeKind::Nominal { .. } => Column::Nominal(vec![None; self.rows]),
                },
                (None, _) => return Err(Error::Schema(format!("attribute {} is missing", meta.name))),
                (Some(i), AttributeKind::Numeric) => match &self.columns[i] {
                    Column::Numeric(v) => Column::Numeric(v.clone()),
                    Column::Nominal(_) => {
                        return Err(Error::Schema(format!("attribute {} must be numeric", meta.name)))
                    }
                },
                (Some(i), AttributeKind::Nominal { .. }) => match &self.columns[i] {
                    Column::Nominal(v) => {
                        let own = self.attributes[i].domain();
                        let remap: Vec<Option<u32>> = own.iter().map(|s| meta.symbol_index(s)).collect();
                        Column::Nominal(v.iter().map(|c| c.and_then(|c| remap[c as usize])).collect())
                    }
                    Column::Numeric(_) => {
                        return Err(Error::Schema(format!("attribute {} must be nominal", meta.name)))
                    }
                },
            };
            columns.push(col);
        }
        let task = if schema.iter().any(|a| a.role == Role::SurvivalTime) {
            Some(Task::Survival)
        } else {
            schema.iter().find(|a| a.role == Role::Label).map(|a| {
                if a.is_numeric() {
                    Task::Regression
                } else {
                    Task::Classification
                }
            })
        };
        Ok(DataSet {
            relation: self.relation.clone(),
            attributes: schema.to_vec(),
            columns,
            rows: self.rows,
            task,
        })
    }

    fn infer_task(&self) -> Option<Task> {
        let label = self.label_index()?;
        if self.survival_time_index().is_some() {
            Some(Task::Survival)
        } else if self.attributes[label].is_numeric() {
            Some(Task::Regression)
        } else {
            Some(Task::Classification)
        }
    }

    fn validate_roles(&self) -> Result<()> {
        let count = |role| self.attributes.iter().filter(|a| a.role == role).count();
        if count(Role::Label) > 1 {
            return Err(Error::Role("more than one label attribute".into()));
        }
        if count(Role::SurvivalTime) > 1 {
            return Err(Error::Role("more than one survival_time attribute".into()));
        }
        if let Some(label) = self.label_index() {
            if (0..self.rows).any(|r| self.columns[label].is_missing(r)) {
                return Err(Error::Role(format!(
                    "label {} has missing values",
                    self.attributes[label].name
                )));
            }
        }
        if let Some(st) = self.survival_time_index() {
            let meta = &self.attributes[st];
            let Column::Numeric(times) = &self.columns[st] else {
                return Err(Error::Role(format!("survival_time {} must be numeric", meta.name)));
            };
            if let Some(bad) = times.iter().find(|t| t.is_nan() || **t < 0.0) {
                return Err(Error::Role(format!(
                    "survival_time {} must be non-negative and present (found {bad})",
                    meta.name
                )));
            }
            if let Some(label) = self.label_index() {
                for r in 0..self.rows {
                    event_value(&self.attributes[label], &self.columns[label], r)?;
                }
            }
        }
        Ok(())
    }
}

fn event_value(meta: &AttributeMeta, col: &Column, row: usize) -> Result<bool> {
    let bad = || Error::Role(format!("event indicator {} must take values in {{0,1}}", meta.name));
    match col.cell(row) {
        Cell::Numeric(x) if x == 0.0 => Ok(false),
        Cell::Numeric(x) if x == 1.0 => Ok(true),
        Cell::Nominal(i) => match meta.domain()[i as usize].as_str() {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

fn validate_domain(name: &str, domain: &[String]) -> Result<()> {
    for (i, s) in domain.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::Schema(format!("empty symbol in the domain of {name}")));
        }
        if domain[..i].contains(s) {
            return Err(Error::Schema(format!("duplicate symbol {s} in the domain of {name}")));
        }
    }
    Ok(())
}
