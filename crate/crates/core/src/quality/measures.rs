use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::Covering;

/// Rule quality measures over a [`Covering`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasureId {
    Precision,
    Coverage,
    C2,
    Correlation,
    RSS,
    Lift,
}

impl MeasureId {
    pub const ALL: [MeasureId; 6] = [
        MeasureId::Precision,
        MeasureId::Coverage,
        MeasureId::C2,
        MeasureId::Correlation,
        MeasureId::RSS,
        MeasureId::Lift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureId::Precision => "Precision",
            MeasureId::Coverage => "Coverage",
            MeasureId::C2 => "C2",
            MeasureId::Correlation => "Correlation",
            MeasureId::RSS => "RSS",
            MeasureId::Lift => "Lift",
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureId::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure {s:?}")))
    }
}

/// Evaluates a measure; total on every non-empty contingency covering.
pub fn measure_value(id: MeasureId, c: &Covering) -> Result<f64> {
    if c.is_survival() {
        return Err(Error::UnsupportedMeasure(id.name().to_string()));
    }
    if c.covered() == 0 {
        return Err(Error::UndefinedCoverage);
    }
    Ok(raw_value(id, c))
}

/// Same as [`measure_value`] for callers that already checked the covering.
pub(crate) fn raw_value(id: MeasureId, c: &Covering) -> f64 {
    let p = c.p as f64;
    let n = c.n as f64;
    let big_p = c.total_pos as f64;
    let big_n = c.total_neg as f64;
    let precision = p / (p + n);
    match id {
        MeasureId::Precision => precision,
        MeasureId::Coverage => (p + n) / (big_p + big_n),
        MeasureId::C2 => {
            if c.total_neg == 0 || c.total_pos == 0 {
                return 0.0;
            }
            (((big_p + big_n) / big_n) * precision - big_p / big_n) * ((1.0 + p / big_p) / 2.0)
        }
        MeasureId::Correlation => {
            let uncovered = big_p - p + big_n - n;
            let denom = big_p * big_n * (p + n) * uncovered;
            if denom == 0.0 {
                0.0
            } else {
                (p * big_n - n * big_p) / denom.sqrt()
            }
        }
        MeasureId::RSS => {
            let tp = if c.total_pos == 0 { 0.0 } else { p / big_p };
            let fp = if c.total_neg == 0 { 0.0 } else { n / big_n };
            tp - fp
        }
        MeasureId::Lift => {
            if c.total_pos == 0 {
                0.0
            } else {
                precision * ((big_p + big_n) / big_p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(p: usize, n: usize, pp: usize, nn: usize) -> Covering {
        Covering::new(p, n, pp, nn)
    }

    #[test]
    fn reference_values() {
        assert_eq!(measure_value(MeasureId::Precision, &cov(3, 1, 10, 10)).unwrap(), 0.75);
        assert!((measure_value(MeasureId::Correlation, &cov(5, 0, 5, 5)).unwrap() - 1.0).abs() < 1e-15);
        // ((20/10)·1 − 1)·((1 + 1)/2) = 1
        assert_eq!(measure_value(MeasureId::C2, &cov(10, 0, 10, 10)).unwrap(), 1.0);
        assert_eq!(measure_value(MeasureId::Coverage, &cov(3, 1, 10, 10)).unwrap(), 0.2);
        assert_eq!(measure_value(MeasureId::RSS, &cov(5, 2, 10, 10)).unwrap(), 0.3);
        assert_eq!(measure_value(MeasureId::Lift, &cov(3, 1, 10, 10)).unwrap(), 1.5);
    }

    #[test]
    fn empty_coverage_is_an_error() {
        for m in MeasureId::ALL {
            assert!(matches!(measure_value(m, &cov(0, 0, 3, 3)), Err(Error::UndefinedCoverage)));
        }
    }

    #[test]
    fn survival_coverings_are_rejected() {
        let c = Covering::survival(3, 10);
        assert!(matches!(measure_value(MeasureId::C2, &c), Err(Error::UnsupportedMeasure(_))));
    }

    #[test]
    fn correlation_guards_zero_factors() {
        // everything covered: uncovered factor is 0
        assert_eq!(measure_value(MeasureId::Correlation, &cov(5, 5, 5, 5)).unwrap(), 0.0);
        assert_eq!(measure_value(MeasureId::Correlation, &cov(3, 0, 3, 0)).unwrap(), 0.0);
    }

    #[test]
    fn parses_names_case_insensitively() {
        assert_eq!("c2".parse::<MeasureId>().unwrap(), MeasureId::C2);
        assert_eq!("Correlation".parse::<MeasureId>().unwrap(), MeasureId::Correlation);
        assert!("bogus".parse::<MeasureId>().is_err());
    }
}
