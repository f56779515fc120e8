use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum CopulaError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("column not found: {0}")]
    ColumnNotFound(String),
    #[error("too few rows: need at least 2, got {0}")]
    TooFewRows(usize),
    #[error("sample is empty")]
    EmptySample,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("resolution m={m} is invalid for n={n} (need 2 <= m <= n)")]
    Resolution { m: usize, n: usize },
    #[error("value {value} outside range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("invalid sampler spec: {0}")]
    Spec(String),
    #[error("unknown preset: {0}")]
    UnknownPreset(String),
    #[error("invalid plot config: {0}")]
    Config(String),
    #[error("n={n} exceeds the full-lattice limit {limit}; use a coarse grid")]
    TooLarge { n: usize, limit: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CopulaError>;
