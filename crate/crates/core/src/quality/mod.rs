//! Quality measures, significance tests and survival estimation.

mod accumulator;
mod hypergeometric;
mod kaplan_meier;
mod log_rank;
mod measures;

pub use self::accumulator::StatAccumulator;
pub use self::hypergeometric::hypergeometric_pvalue;
pub use self::kaplan_meier::KaplanMeier;
pub use self::log_rank::{chi_square_1_sf, log_rank, TestResult};
pub use self::measures::{measure_value, MeasureId};

pub(crate) use self::log_rank::log_rank_sorted;
pub(crate) use self::measures::raw_value;
