use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

impl TestResult {
    pub const NULL: TestResult = TestResult {
        statistic: 0.0,
        p_value: 1.0,
    };
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi_square_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((x / 2.0).sqrt()).clamp(0.0, 1.0)
    }
}

/// Two-group log-rank test.
pub fn log_rank(group_a: (&[f64], &[bool]), group_b: (&[f64], &[bool])) -> Result<TestResult> {
    let (ta, ea) = group_a;
    let (tb, eb) = group_b;
    if ta.is_empty() || tb.is_empty() {
        return Err(Error::Empty("log-rank group".into()));
    }
    if ta.len() != ea.len() || tb.len() != eb.len() {
        return Err(Error::InvalidArgument("times and events differ in length".into()));
    }
    let mut pooled: Vec<(f64, bool, bool)> = ta
        .iter()
        .zip(ea)
        .map(|(&t, &e)| (t, e, true))
        .chain(tb.iter().zip(eb).map(|(&t, &e)| (t, e, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(log_rank_sorted(pooled.iter().copied(), pooled.len(), ta.len()))
}

/// Log-rank over `(time, event, in_group_a)` triples sorted by time.
///
/// `total` is the number of triples and `size_a` the number with
/// `in_group_a` set. Runs in one linear pass.
pub(crate) fn log_rank_sorted(
    sorted: impl IntoIterator<Item = (f64, bool, bool)>,
    total: usize,
    size_a: usize,
) -> TestResult {
    let mut at_risk = total;
    let mut at_risk_a = size_a;
    if at_risk_a == 0 || at_risk_a == at_risk {
        return TestResult::NULL;
    }
    let mut observed_minus_expected = 0.0;
    let mut variance = 0.0;
    let mut iter = sorted.into_iter().peekable();
    while let Some(&(t, _, _)) = iter.peek() {
        let (mut deaths, mut deaths_a, mut leaving, mut leaving_a) = (0usize, 0usize, 0usize, 0usize);
        while let Some((_, event, in_a)) = iter.next_if(|x| x.0 == t) {
            deaths += usize::from(event);
            deaths_a += usize::from(event && in_a);
            leaving += 1;
            leaving_a += usize::from(in_a);
        }
        if deaths > 0 {
            // integer-valued products keep the result exactly symmetric in the groups
            let n = at_risk as f64;
            let d = deaths as f64;
            let na = at_risk_a as f64;
            let nb = (at_risk - at_risk_a) as f64;
            observed_minus_expected += (deaths_a as f64 * n - d * na) / n;
            if at_risk > 1 {
                variance += d * (na * nb) * (n - d) / (n * n * (n - 1.0));
            }
        }
        at_risk -= leaving;
        at_risk_a -= leaving_a;
    }
    if variance <= 0.0 {
        return TestResult::NULL;
    }
    let statistic = observed_minus_expected * observed_minus_expected / variance;
    TestResult {
        statistic,
        p_value: chi_square_1_sf(statistic),
    }
}
