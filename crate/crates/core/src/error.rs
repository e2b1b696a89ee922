//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by schema handling, simulation, and estimation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A schema or variable definition violates its invariants.
    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    /// An operation requiring complete data saw a missing cell.
    #[error("missing data: variable '{variable}' row {row}; impute or drop first")]
    MissingData { variable: String, row: usize },

    /// A column has no observed values, so no imputation value exists.
    #[error("column '{0}' is entirely missing")]
    AllMissingColumn(String),

    /// Fold count outside the valid range 2..=n.
    #[error("bad fold count: k={k} for n={n}")]
    BadFoldCount { k: usize, n: usize },

    /// Exact enumeration requested for a model without finite confounder support.
    #[error("ground truth not enumerable: {0}")]
    NotEnumerable(String),

    /// A confounder configuration outside the model's support.
    #[error("unknown confounder stratum: {0}")]
    UnknownStratum(String),

    /// A classification problem with a single observed class.
    #[error("degenerate labels: {0}")]
    Degenerate(String),

    /// A learner configuration violates its invariants.
    #[error("bad learner config: {0}")]
    BadConfig(String),

    /// A cross-fitting training complement lost an X group or a mediator level.
    #[error("fold collapse: {0}")]
    FoldCollapse(String),

    /// One of the protected-attribute groups is empty.
    #[error("empty group: {0}")]
    EmptyGroup(String),

    /// A stratum cell required by the identification formulas has no rows.
    #[error("empty stratum cell: {0}")]
    EmptyStratum(String),

    /// Residualized treatment carries no variation at the forest root.
    #[error("insufficient treatment variation: {0}")]
    InsufficientVariation(String),

    /// Prediction features do not match the training schema.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// A subgroup dimension is not a discrete confounder of the schema.
    #[error("unknown dimension: {0}")]
    UnknownDimension(String),

    /// Regression with no residual degrees of freedom or a singular design.
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// A synthetic confounder with the requested strength cannot be built.
    #[error("construction failure: {0}")]
    ConstructionFailure(String),

    /// Trimming removed every row.
    #[error("no rows left after trimming at percentile {0}")]
    EmptyAfterTrim(usize),

    /// Malformed input file (CSV or configuration).
    #[error("parse error: {0}")]
    Parse(String),
}
