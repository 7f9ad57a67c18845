//! Closed-form Neumann eigenmodes and the Gaussian-beam model field.

mod bessel;
mod modes;

pub use bessel::{bessel_j, bessel_j_all, bessel_j_integral, bessel_j_jet, bessel_jp_zero, bessel_jp_zero_integral};
pub use modes::{AnalyticMode, ModeJet, ModeKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("no zero of J_{m}' bracketed for index {k}")]
    RootNotBracketed { m: usize, k: usize },
    #[error("bad mode parameters: {0}")]
    BadParameters(String),
}
