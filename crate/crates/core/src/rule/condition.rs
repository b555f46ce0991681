use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, DataSet};
use crate::error::{Error, Result};

/// Numeric interval; `None` bounds are infinite and always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Option<f64>,
    pub lower_closed: bool,
    pub upper: Option<f64>,
    pub upper_closed: bool,
}

impl Interval {
    pub const ALL: Interval = Interval {
        lower: None,
        lower_closed: false,
        upper: None,
        upper_closed: false,
    };

    /// `(-inf, x]`
    pub fn at_most(x: f64) -> Self {
        Interval {
            upper: Some(x),
            upper_closed: true,
            ..Self::ALL
        }
    }

    /// `(x, +inf)`
    pub fn greater_than(x: f64) -> Self {
        Interval {
            lower: Some(x),
            lower_closed: false,
            ..Self::ALL
        }
    }

    pub fn at_least(x: f64) -> Self {
        Interval {
            lower: Some(x),
            lower_closed: true,
            ..Self::ALL
        }
    }

    pub fn less_than(x: f64) -> Self {
        Interval {
            upper: Some(x),
            upper_closed: false,
            ..Self::ALL
        }
    }

    pub fn is_valid(&self) -> bool {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => l < u || (l == u && self.lower_closed && self.upper_closed),
            (Some(l), None) => l.is_finite(),
            (None, Some(u)) => u.is_finite(),
            (None, None) => true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = match self.lower {
            None => true,
            Some(l) if self.lower_closed => x >= l,
            Some(l) => x > l,
        };
        let below = match self.upper {
            None => true,
            Some(u) if self.upper_closed => x <= u,
            Some(u) => x < u,
        };
        above && below
    }

    /// Intersection, or `None` when it is empty.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lower, lower_closed) = match (self.lower, other.lower) {
            (None, _) => (other.lower, other.lower_closed),
            (_, None) => (self.lower, self.lower_closed),
            (Some(a), Some(b)) if a > b => (Some(a), self.lower_closed),
            (Some(a), Some(b)) if b > a => (Some(b), other.lower_closed),
            (Some(a), Some(_)) => (Some(a), self.lower_closed && other.lower_closed),
        };
        let (upper, upper_closed) = match (self.upper, other.upper) {
            (None, _) => (other.upper, other.upper_closed),
            (_, None) => (self.upper, self.upper_closed),
            (Some(a), Some(b)) if a < b => (Some(a), self.upper_closed),
            (Some(a), Some(b)) if b < a => (Some(b), other.upper_closed),
            (Some(a), Some(_)) => (Some(a), self.upper_closed && other.upper_closed),
        };
        let out = Interval {
            lower,
            lower_closed,
            upper,
            upper_closed,
        };
        out.is_valid().then_some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Nominal symbol index.
    Equals(u32),
    InInterval(Interval),
}

/// A test on a single attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub attribute: usize,
    pub relation: Relation,
}

impl Condition {
    pub fn equals(attribute: usize, symbol: u32) -> Self {
        Condition {
            attribute,
            relation: Relation::Equals(symbol),
        }
    }

    pub fn interval(attribute: usize, interval: Interval) -> Self {
        Condition {
            attribute,
            relation: Relation::InInterval(interval),
        }
    }

    /// Whether the condition holds; a missing cell never satisfies it.
    pub fn holds(&self, ds: &DataSet, row: usize) -> bool {
        match (self.relation, ds.cell(row, self.attribute)) {
            (Relation::Equals(s), Cell::Nominal(v)) => s == v,
            (Relation::InInterval(iv), Cell::Numeric(x)) => iv.contains(x),
            _ => false,
        }
    }

    pub fn validate(&self, ds: &DataSet) -> Result<()> {
        let meta = ds
            .attributes()
            .get(self.attribute)
            .ok_or_else(|| Error::Schema(format!("attribute index {} out of range", self.attribute)))?;
        match self.relation {
            Relation::Equals(s) if !meta.is_numeric() && (s as usize) < meta.domain().len() => Ok(()),
            Relation::InInterval(iv) if meta.is_numeric() && iv.is_valid() => Ok(()),
            _ => Err(Error::Schema(format!("condition does not fit attribute {}", meta.name))),
        }
    }
}

/// A conjunction of conditions with at most one condition per attribute.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Premise(Vec<Condition>);

impl Premise {
    pub fn new() -> Self {
        Premise(Vec::new())
    }

    /// Builds a premise, merging conditions on the same attribute.
    pub fn from_conditions(conditions: impl IntoIterator<Item = Condition>) -> Option<Self> {
        conditions.into_iter().try_fold(Premise::new(), |p, c| p.and(c))
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn condition_on(&self, attribute: usize) -> Option<&Condition> {
        self.0.iter().find(|c| c.attribute == attribute)
    }

    /// Conjunction with `cond`; `None` if the result can cover nothing.
    pub fn and(&self, cond: Condition) -> Option<Premise> {
        let mut out = self.clone();
        match out.0.iter_mut().find(|c| c.attribute == cond.attribute) {
            None => out.0.push(cond),
            Some(existing) => match (existing.relation, cond.relation) {
                (Relation::Equals(a), Relation::Equals(b)) => {
                    if a != b {
                        return None;
                    }
                }
                (Relation::InInterval(a), Relation::InInterval(b)) => {
                    existing.relation = Relation::InInterval(a.intersect(&b)?);
                }
                _ => return None,
            },
        }
        Some(out)
    }

    /// Premise with the condition at `index` dropped.
    pub fn without(&self, index: usize) -> Premise {
        let mut out = self.clone();
        out.0.remove(index);
        out
    }

    pub fn covers(&self, ds: &DataSet, row: usize) -> bool {
        self.0.iter().all(|c| c.holds(ds, row))
    }

    pub fn validate(&self, ds: &DataSet) -> Result<()> {
        self.0.iter().try_for_each(|c| c.validate(ds))
    }

    /// Rows of `ds` (restricted to `scope` when given) covered by the premise.
    pub fn covered_rows(&self, ds: &DataSet, scope: Option<&[usize]>) -> Vec<usize> {
        match scope {
            Some(rows) => rows.iter().copied().filter(|&r| self.covers(ds, r)).collect(),
            None => (0..ds.len()).filter(|&r| self.covers(ds, r)).collect(),
        }
    }

    /// `rows` filtered by the premise.
    pub fn filter_rows(&self, ds: &DataSet, rows: &[usize]) -> Vec<usize> {
        self.covered_rows(ds, Some(rows))
    }
}

/// Checked coverage test of a single example.
pub fn covers(premise: &Premise, ds: &DataSet, row: usize) -> Result<bool> {
    premise.validate(ds)?;
    if row >= ds.len() {
        return Err(Error::Schema(format!("example {row} out of range")));
    }
    Ok(premise.covers(ds, row))
}
