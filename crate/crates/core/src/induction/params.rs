use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quality::MeasureId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionVariant {
    /// Consequence is the mean of covered labels, maintained incrementally.
    #[default]
    Mean,
}

/// Knobs of the covering loop. `Default` is the single source of truth for
/// default values, shared by the CLI and the Python bindings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InductionParams {
    /// Minimum number of previously uncovered positives a new rule must cover.
    pub minsupp_new: usize,
    pub max_uncovered_fraction: f64,
    pub induction_measure: MeasureId,
    pub pruning_measure: MeasureId,
    pub voting_measure: MeasureId,
    pub pruning_enabled: bool,
    pub max_growing_conditions: Option<usize>,
    pub significance_level: f64,
    pub significance_filter: bool,
    pub regression_variant: RegressionVariant,
    pub seed: u64,
}

impl Default for InductionParams {
    fn default() -> Self {
        InductionParams {
            minsupp_new: 5,
            max_uncovered_fraction: 0.0,
            induction_measure: MeasureId::C2,
            pruning_measure: MeasureId::C2,
            voting_measure: MeasureId::Correlation,
            pruning_enabled: true,
            max_growing_conditions: None,
            significance_level: 0.05,
            significance_filter: false,
            regression_variant: RegressionVariant::Mean,
            seed: 42,
        }
    }
}

impl InductionParams {
    pub fn validate(&self) -> Result<()> {
        if self.minsupp_new < 1 {
            return Err(Error::InvalidArgument("minsupp_new must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.max_uncovered_fraction) {
            return Err(Error::InvalidArgument("max_uncovered_fraction must lie in [0, 1]".into()));
        }
        if !(self.significance_level > 0.0 && self.significance_level <= 1.0) {
            return Err(Error::InvalidArgument("significance_level must lie in (0, 1]".into()));
        }
        if self.max_growing_conditions == Some(0) {
            return Err(Error::InvalidArgument("max_growing_conditions must be at least 1".into()));
        }
        Ok(())
    }
}
