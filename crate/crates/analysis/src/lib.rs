//! Fits and derived quantities for hyperpolarization experiments.

mod estimators;
mod fit;

pub use estimators::*;
pub use fit::{fit_rotation_response, fit_stretched_exp, FitMode, FitResult, TimeSeries, BETA_MAX};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
}
