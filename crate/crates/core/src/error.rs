use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("design is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("model dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error(
        "collection has {count} models, over the budget of {budget}; use the two-stage procedure"
    )]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("every candidate model of row {row} is infeasible")]
    AllInfeasible { row: usize },

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no prior weight for model {model:?} of row {row}")]
    MissingPriorWeight { row: usize, model: Vec<usize> },
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        match self {
            e @ Error::Row { .. } => e,
            e @ Error::AllInfeasible { .. } => e,
            e => Error::Row {
                row,
                source: Box::new(e),
            },
        }
    }

    /// Strips any row context and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Row { source, .. } => source.root(),
            e => e,
        }
    }
}
