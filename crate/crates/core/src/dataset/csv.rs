use std::path::Path;

use super::{AttributeMeta, Column, DataSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            has_header: true,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<DataSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let relation = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    parse_csv(&text, &relation, options)
}

/// Parses delimited text. A column is numeric when every non-missing cell
/// parses as a number, nominal otherwise. Empty cells and `?` are missing.
pub fn parse_csv(text: &str, relation: &str, options: &CsvOptions) -> Result<DataSet> {
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: relation.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::Empty(format!("{relation}: no rows")));
    }

    let width = records[0].len();
    for (i, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(Error::RaggedTable {
                row: i + 1,
                expected: width,
                found: rec.len(),
            });
        }
    }

    let (names, body): (Vec<String>, &[::csv::StringRecord]) = if options.has_header {
        let names: Vec<String> = records[0].iter().map(|s| s.trim().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Schema(format!("duplicate column name {n}")));
            }
        }
        (names, &records[1..])
    } else {
        ((1..=width).map(|i| format!("col{i}")).collect(), &records[..])
    };

    let is_missing = |s: &str| s.is_empty() || s == "?";
    let mut attributes = Vec::with_capacity(width);
    let mut columns = Vec::with_capacity(width);
    for (c, name) in names.into_iter().enumerate() {
        let cells: Vec<&str> = body.iter().map(|r| r[c].trim()).collect();
        let numeric: Option<Vec<f64>> = cells
            .iter()
            .map(|s| if is_missing(s) { Some(f64::NAN) } else { s.parse().ok() })
            .collect();
        match numeric {
            Some(values) => {
                attributes.push(AttributeMeta::numeric(name));
                columns.push(Column::Numeric(values));
            }
            None => {
                let mut domain: Vec<String> = Vec::new();
                let values = cells
                    .iter()
                    .map(|s| {
                        if is_missing(s) {
                            return None;
                        }
                        let idx = domain.iter().position(|d| d == s).unwrap_or_else(|| {
                            domain.push(s.to_string());
                            domain.len() - 1
                        });
                        Some(idx as u32)
                    })
                    .collect();
                attributes.push(AttributeMeta::nominal(name, domain));
                columns.push(Column::Nominal(values));
            }
        }
    }
    DataSet::new(relation, attributes, columns)
}
