use crate::error::{Error, Result};

/// Running count, mean and sum of squared deviations (Welford), with O(1)
/// removal of previously pushed values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatAccumulator {
    count: usize,
    mean: f64,
    m2: f64,
}

impl StatAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Population variance, `m2 / count` (0 when empty).
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    pub fn push(&mut self, y: f64) {
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (y - self.mean);
    }

    pub fn remove(&mut self, y: f64) -> Result<()> {
        match self.count {
            0 => Err(Error::InvalidArgument("remove from an empty accumulator".into())),
            1 => {
                *self = Self::default();
                Ok(())
            }
            k => {
                let remaining = (k - 1) as f64;
                let previous_mean = (k as f64 * self.mean - y) / remaining;
                self.m2 = (self.m2 - (y - previous_mean) * (y - self.mean)).max(0.0);
                self.mean = previous_mean;
                self.count = k - 1;
                Ok(())
            }
        }
    }

    pub fn pushed(mut self, y: f64) -> Self {
        self.push(y);
        self
    }
}

impl FromIterator<f64> for StatAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = StatAccumulator::new();
        for y in iter {
            acc.push(y);
        }
        acc
    }
}
