//! ARFF subset: `@relation`, `@attribute <name> numeric | {v1,...}`, `@data`,
//! `?` for missing values and `%` comments. Quoted names and symbols are
//! accepted.

use std::fmt::Write as _;
use std::path::Path;

use super::{AttributeKind, AttributeMeta, Column, DataSet};
use crate::error::{Error, Result};

pub fn load_arff(path: impl AsRef<Path>) -> Result<DataSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_arff(&text, &path.display().to_string())
}

/// Parses ARFF text; `origin` is used in error messages.
pub fn parse_arff(text: &str, origin: &str) -> Result<DataSet> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };

    let mut relation = None;
    let mut attributes: Vec<AttributeMeta> = Vec::new();
    let mut columns: Vec<Column> = Vec::new();
    let mut in_data = false;

    for (no, raw) in text.lines().enumerate() {
        let line_no = no + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let (keyword, rest) = split_keyword(line);
            match keyword.to_ascii_lowercase().as_str() {
                "@relation" => {
                    let fields = tokenize(rest).map_err(|m| err(line_no, m))?;
                    relation = Some(fields.into_iter().next().unwrap_or_default());
                }
                "@attribute" => {
                    let meta = parse_attribute(rest).map_err(|m| err(line_no, m))?;
                    if attributes.iter().any(|a| a.name == meta.name) {
                        return Err(err(line_no, format!("duplicate attribute {}", meta.name)));
                    }
                    columns.push(match meta.kind {
                        AttributeKind::Numeric => Column::Numeric(Vec::new()),
                        AttributeKind::Nominal { .. } => Column::Nominal(Vec::new()),
                    });
                    attributes.push(meta);
                }
                "@data" => {
                    if attributes.is_empty() {
                        return Err(err(line_no, "@data before any @attribute".into()));
                    }
                    in_data = true;
                }
                other => return Err(err(line_no, format!("unexpected header line starting with {other}"))),
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(err(line_no, "sparse ARFF rows are not supported".into()));
        }
        let cells = tokenize(line).map_err(|m| err(line_no, m))?;
        if cells.len() != attributes.len() {
            return Err(err(
                line_no,
                format!("row has {} values, {} attributes declared", cells.len(), attributes.len()),
            ));
        }
        for ((cell, meta), col) in cells.iter().zip(&attributes).zip(columns.iter_mut()) {
            let missing = cell == "?";
            match col {
                Column::Numeric(v) => {
                    if missing {
                        v.push(f64::NAN);
                    } else {
                        let x: f64 = cell
                            .parse()
                            .map_err(|_| err(line_no, format!("{cell:?} is not numeric ({})", meta.name)))?;
                        v.push(x);
                    }
                }
                Column::Nominal(v) => {
                    if missing {
                        v.push(None);
                    } else {
                        let idx = meta.symbol_index(cell).ok_or_else(|| {
                            err(line_no, format!("undeclared symbol {cell:?} for attribute {}", meta.name))
                        })?;
                        v.push(Some(idx));
                    }
                }
            }
        }
    }

    if !in_data {
        return Err(err(text.lines().count().max(1), "missing @data section".into()));
    }
    let relation = relation.ok_or_else(|| err(1, "missing @relation".into()))?;
    DataSet::new(relation, attributes, columns)
}

fn split_keyword(line: &str) -> (&str, &str) {
    match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], line[i..].trim()),
        None => (line, ""),
    }
}

fn parse_attribute(rest: &str) -> std::result::Result<AttributeMeta, String> {
    let (name, tail) = take_name(rest)?;
    let tail = tail.trim();
    if let Some(body) = tail.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| format!("unterminated nominal domain for {name}"))?;
        let domain = tokenize(body)?;
        if domain.is_empty() || domain.iter().any(String::is_empty) {
            return Err(format!("empty nominal symbol for {name}"));
        }
        for (i, s) in domain.iter().enumerate() {
            if domain[..i].contains(s) {
                return Err(format!("duplicate symbol {s} for {name}"));
            }
        }
        return Ok(AttributeMeta::nominal(name, domain));
    }
    match tail.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeMeta::numeric(name)),
        other => Err(format!("unknown attribute type {other:?} for {name}")),
    }
}

fn take_name(s: &str) -> std::result::Result<(String, &str), String> {
    let s = s.trim_start();
    match s.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let end = s[1..].find(q).ok_or("unterminated quoted name")? + 1;
            Ok((s[1..end].to_string(), &s[end + 1..]))
        }
        Some(_) => {
            let end = s.find(|c: char| c.is_whitespace() || c == '{').unwrap_or(s.len());
            Ok((s[..end].to_string(), &s[end..]))
        }
        None => Err("missing attribute name".into()),
    }
}

/// Splits a comma-separated list honouring single/double quotes.
fn tokenize(s: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&first) = chars.peek() else { break };
        let mut token = String::new();
        if first == '\'' || first == '"' {
            chars.next();
            loop {
                match chars.next() {
                    Some('\\') => token.extend(chars.next()),
                    Some(c) if c == first => break,
                    Some(c) => token.push(c),
                    None => return Err("unterminated quote".into()),
                }
            }
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            match chars.next() {
                None => {
                    out.push(token);
                    break;
                }
                Some(',') => out.push(token),
                Some(c) => return Err(format!("unexpected {c:?} after quoted value")),
            }
        } else {
            let mut ended = true;
            for c in chars.by_ref() {
                if c == ',' {
                    ended = false;
                    break;
                }
                token.push(c);
            }
            out.push(token.trim().to_string());
            if ended {
                break;
            }
        }
    }
    Ok(out)
}

fn quote(s: &str) -> String {
    let plain = !s.is_empty()
        && s != "?"
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'));
    if plain {
        s.to_string()
    } else {
        let mut q = String::with_capacity(s.len() + 2);
        q.push('\'');
        for c in s.chars() {
            if c == '\'' || c == '\\' {
                q.push('\\');
            }
            q.push(c);
        }
        q.push('\'');
        q
    }
}

/// Serializes a dataset to ARFF. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_arff(ds: &DataSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}\n", quote(ds.relation()));
    for meta in ds.attributes() {
        match &meta.kind {
            AttributeKind::Numeric => {
                let _ = writeln!(out, "@attribute {} numeric", quote(&meta.name));
            }
            AttributeKind::Nominal { domain } => {
                let symbols: Vec<String> = domain.iter().map(|s| quote(s)).collect();
                let _ = writeln!(out, "@attribute {} {{{}}}", quote(&meta.name), symbols.join(","));
            }
        }
    }
    out.push_str("\n@data\n");
    for row in 0..ds.len() {
        let cells: Vec<String> = (0..ds.attributes().len())
            .map(|a| match ds.cell(row, a) {
                super::Cell::Missing => "?".to_string(),
                super::Cell::Numeric(x) => format!("{x}"),
                super::Cell::Nominal(i) => quote(&ds.attribute(a).domain()[i as usize]),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
