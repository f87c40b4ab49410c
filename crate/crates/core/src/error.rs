//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A block-column partition was requested with a width that does not
    /// divide the matrix width. Pad first with [`crate::sparse::SparseMatrix::pad_columns`].
    #[error("matrix with {cols} columns cannot be split into {k} equal block-columns")]
    NonDivisibleWidth { cols: usize, k: usize },

    /// Random generation asked for a density outside (0, 1].
    #[error("density {0} outside (0, 1]")]
    InvalidDensity(f64),

    /// Operand shapes are incompatible.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A Matrix Market file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    /// The Matrix Market banner names a field or symmetry we do not handle.
    #[error("unsupported Matrix Market field: {0}")]
    UnsupportedField(String),

    /// Plan parameters are mutually inconsistent (e.g. n != k_A + s).
    #[error("inconsistent parameters: {0}")]
    InconsistentParams(String),

    /// One of the weight inequalities of the encoding scheme is violated.
    /// The message names the violated inequality.
    #[error("weight constraint violated: {0}")]
    WeightConstraintViolated(String),

    /// A decoding system was requested for a survivor set whose size is not
    /// the recovery threshold.
    #[error("survivor subset has size {got}, expected the recovery threshold {expected}")]
    WrongSubsetSize { got: usize, expected: usize },

    /// The decoding matrix is numerically singular for this survivor set.
    #[error("decoding system is numerically singular (rcond <= {rcond:e})")]
    SingularSystem { rcond: f64 },

    /// Overdetermined decode received rows that do not span all unknowns.
    #[error("stacked coefficient rows are rank deficient: rank {rank} < {needed} unknowns")]
    RankDeficient { rank: usize, needed: usize },

    /// A subset enumeration would exceed the caller-supplied budget.
    #[error("enumeration of {needed} subsets exceeds budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    /// Heterogeneous virtualization boundary is out of range.
    #[error("invalid virtualization boundary: {0}")]
    InvalidBoundary(String),

    /// A heterogeneous capacity profile violates the model (e.g. weakest
    /// capacity != 1 or an empty worker list).
    #[error("invalid worker profile: {0}")]
    InvalidProfile(String),

    /// A plan and a virtual mapping disagree on the worker count.
    #[error("plan has {plan_n} workers but mapping virtualizes {mapping_n}")]
    PlanMismatch { plan_n: usize, mapping_n: usize },

    /// Too many worker classes selected for the union bound.
    #[error("{got} classes selected, bound only holds for q <= {max}")]
    TooManyClasses { got: usize, max: usize },

    /// delta outside 1..=|M_class| for the participating-unknown bound.
    #[error("delta {delta} outside 1..={max} for class of size {max}")]
    DeltaOutOfRange { delta: usize, max: usize },

    /// Worker subset larger than the number of unknowns.
    #[error("subset of {got} workers exceeds the {max} unknowns")]
    SubsetTooLarge { got: usize, max: usize },

    /// Bipartite matching asked on a graph with unequal sides.
    #[error("bipartite sides differ: {left} equations vs {right} unknowns")]
    SideSizeMismatch { left: usize, right: usize },

    /// Fewer live worker results than the recovery threshold.
    #[error("only {alive} worker results available, need {needed}")]
    NotEnoughSurvivors { alive: usize, needed: usize },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
