//! Separate-and-conquer rule induction for classification, regression and
//! survival data.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod induction;
pub mod prediction;
pub mod quality;
pub mod rule;

pub use error::{Error, Result};
