use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("evaluation failed at t = {t}: {source}")]
    EvalAt { t: f64, source: EvalError },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid index: {0}")]
    Index(String),
    #[error("cotangent compatibility residual {residual:e} exceeds {tolerance:e}")]
    NotCotangent { residual: f64, tolerance: f64 },
    #[error("path is not closed: |γ(1) - γ(0)| = {gap:e}")]
    OpenPath { gap: f64 },
    #[error("density weight is not positive ({value}) at {point:?}")]
    NonPositiveDensity { value: f64, point: Vec<f64> },
    #[error("metric is not positive definite at {point:?}")]
    IndefiniteMetric { point: Vec<f64> },
    #[error("Poisson tensor does not vanish at the origin (max |π^ij(0)| = {0:e})")]
    NotZeroLeaf(f64),
    #[error("even-degree secondary class requires flat connections (max curvature {0:e})")]
    NotFlat(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
