use std::fmt;

use thiserror::Error;

/// Which admissibility condition a parameter set failed.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamViolation {
    NonPositiveMesh(f64),
    TooFewCells(usize),
    NegativeExponent { name: &'static str, index: usize, value: f64 },
    NonFinite(&'static str),
    /// `delta > max_n (alpha_n + beta_n)` failed.
    DissipationBelowKernel { delta: f64, bound: f64 },
    /// `delta > 2 alpha_1 + beta_1 - 1` failed.
    DissipationBelowCoagulation { delta: f64, bound: f64 },
}

impl ParamViolation {
    /// The configuration key most directly responsible for the violation.
    pub fn key(&self) -> &'static str {
        match self {
            ParamViolation::NonPositiveMesh(_) => "model.h",
            ParamViolation::TooFewCells(_) => "model.n_cells",
            ParamViolation::NegativeExponent { name, .. } => {
                if *name == "alpha" {
                    "model.alpha"
                } else {
                    "model.beta"
                }
            }
            ParamViolation::NonFinite(key) => key,
            ParamViolation::DissipationBelowKernel { .. }
            | ParamViolation::DissipationBelowCoagulation { .. } => "model.delta",
        }
    }
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::NonPositiveMesh(h) => write!(f, "mesh size h = {h} must be > 0"),
            ParamViolation::TooFewCells(n) => write!(f, "n_cells = {n} must be >= 2"),
            ParamViolation::NegativeExponent { name, index, value } => {
                write!(f, "{name}[{index}] = {value} must be >= 0")
            }
            ParamViolation::NonFinite(key) => write!(f, "{key} must be finite"),
            ParamViolation::DissipationBelowKernel { delta, bound } => write!(
                f,
                "delta = {delta} must exceed max_n(alpha_n + beta_n) = {bound}"
            ),
            ParamViolation::DissipationBelowCoagulation { delta, bound } => write!(
                f,
                "delta = {delta} must exceed 2*alpha_1 + beta_1 - 1 = {bound}"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter violation: {0}")]
    ParameterViolation(ParamViolation),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected} cells, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial data line {line}: {message}")]
    FileParse { line: usize, message: String },
    #[error("initial data has negative value {value} at cell {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("state support reaches cell {max_index}, beyond the admissible limit {limit}")]
    SupportTooLarge { max_index: usize, limit: usize },
    #[error("non-finite value at cell {index} after step {step}")]
    NonFinite { step: usize, index: usize },
    #[error("overflow evaluating {0}")]
    Overflow(String),
    #[error("invalid simulation config: {0}")]
    SimConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<ParamViolation> for Error {
    fn from(v: ParamViolation) -> Self {
        Error::ParameterViolation(v)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
