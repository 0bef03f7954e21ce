use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("forms belong to different symbol registries ({0} vs {1})")]
    RegistryMismatch(u64, u64),

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("expected a linear form, found a monomial of degree {0}")]
    NotLinear(usize),

    #[error("transformation matrix is singular or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("split would produce {parts} parts, budget is {budget}")]
    SplitBudgetExceeded { parts: u128, budget: usize },

    #[error("world enumeration needs {worlds} worlds, budget is {budget}")]
    EnumerationBudgetExceeded { worlds: u128, budget: u128 },

    #[error("join of an empty list of zonotopes")]
    EmptyJoin,

    #[error("regularization {lambda} is below the solvability threshold beta = {beta}")]
    LambdaTooSmall { lambda: f64, beta: f64 },

    #[error("non-data system produced a negative box size k[{index}] = {value}")]
    NegativeBox { index: usize, value: f64 },

    #[error("cannot reach beta <= lambda by splitting: {0}")]
    SplitInfeasible(String),

    #[error("dataset has no rows")]
    EmptyData,

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumeric { row: usize, column: String, value: String },

    #[error("missing value at row {row}, column `{column}` has no declared range")]
    UndeclaredMissing { row: usize, column: String },

    #[error("invalid uncertainty spec: {0}")]
    InvalidUncertainty(String),

    #[error("invalid train/test split: {0}")]
    InvalidSplit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("record refers to a cell with no data symbol: {0}")]
    UnknownProvenance(String),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Data-side failures (bad input files or values), as opposed to
    /// configuration or numerical failures.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyData
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::MissingColumn(_)
                | Error::NonNumeric { .. }
                | Error::UndeclaredMissing { .. }
        )
    }
}
