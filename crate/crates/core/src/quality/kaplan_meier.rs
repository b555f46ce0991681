use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Product-limit survival estimate stored as a right-continuous step
/// function: `S(t) = probabilities[i]` for `times[i] <= t < times[i + 1]`
/// and `S(t) = 1` before the first step.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KaplanMeier {
    times: Vec<f64>,
    probabilities: Vec<f64>,
}

impl KaplanMeier {
    /// Builds a step function from its parts, checking the invariants.
    pub fn from_steps(times: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if times.len() != probabilities.len() {
            return Err(Error::InvalidArgument("times and probabilities differ in length".into()));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("step times must be strictly increasing".into()));
        }
        let mut prev = 1.0;
        for &s in &probabilities {
            if !(0.0..=prev).contains(&s) {
                return Err(Error::InvalidArgument("probabilities must be non-increasing within [0,1]".into()));
            }
            prev = s;
        }
        Ok(KaplanMeier { times, probabilities })
    }

    /// Product-limit estimate. At tied times events are processed before
    /// censorings, so subjects censored at `t` are still at risk at `t`.
    pub fn estimate(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Empty("kaplan-meier input".into()));
        }
        if times.len() != events.len() {
            return Err(Error::InvalidArgument("times and events differ in length".into()));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        Ok(Self::from_sorted(order.iter().map(|&i| (times[i], events[i]))))
    }

    /// Estimate from `(time, event)` pairs already sorted by time.
    pub(crate) fn from_sorted(sorted: impl IntoIterator<Item = (f64, bool)>) -> Self {
        let sorted: Vec<(f64, bool)> = sorted.into_iter().collect();
        let mut at_risk = sorted.len();
        let mut survival = 1.0;
        let mut km = KaplanMeier::default();
        let mut i = 0;
        while i < sorted.len() {
            let t = sorted[i].0;
            let mut j = i;
            let mut deaths = 0usize;
            while j < sorted.len() && sorted[j].0 == t {
                deaths += usize::from(sorted[j].1);
                j += 1;
            }
            if deaths > 0 {
                survival *= 1.0 - deaths as f64 / at_risk as f64;
                km.times.push(t);
                km.probabilities.push(survival);
            }
            at_risk -= j - i;
            i = j;
        }
        km
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `S(t)`, right-continuous; 1 before the first event time.
    pub fn probability_at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x <= t);
        if idx == 0 {
            1.0
        } else {
            self.probabilities[idx - 1]
        }
    }

    /// Left limit `S(t-)`.
    pub fn probability_before(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|&x| x < t);
        if idx == 0 {
            1.0
        } else {
            self.probabilities[idx - 1]
        }
    }

    /// Pointwise arithmetic mean of several estimates, evaluated on the
    /// union of their step times.
    pub fn average(estimates: &[&KaplanMeier]) -> KaplanMeier {
        match estimates {
            [] => KaplanMeier::default(),
            [single] => (*single).clone(),
            _ => {
                let mut grid: Vec<f64> = estimates.iter().flat_map(|e| e.times.iter().copied()).collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                let k = estimates.len() as f64;
                let mut prev = 1.0f64;
                let probabilities = grid
                    .iter()
                    .map(|&t| {
                        let s = estimates.iter().map(|e| e.probability_at(t)).sum::<f64>() / k;
                        // rounding can lift the mean by an ulp; keep it monotone
                        prev = s.min(prev).clamp(0.0, 1.0);
                        prev
                    })
                    .collect();
                KaplanMeier { times: grid, probabilities }
            }
        }
    }
}
