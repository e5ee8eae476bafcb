use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("cycle detected through variable `{0}`")]
    Cycle(String),

    #[error("CPT of `{variable}` column {column} sums to {sum} (tolerance {tolerance})")]
    Normalization {
        variable: String,
        column: usize,
        sum: f64,
        tolerance: f64,
    },

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("state index {state} out of range for `{variable}` with {cardinality} states")]
    StateOutOfRange {
        variable: String,
        state: usize,
        cardinality: usize,
    },

    #[error("state is infeasible (zero joint probability)")]
    Infeasible,

    #[error("stuck state: every value of `{0}` has zero Markov-blanket weight")]
    StuckState(String),

    #[error("evidence has zero probability")]
    ZeroEvidence,

    #[error("state space too large: more than {cap} feasible states")]
    StateSpaceTooLarge { cap: usize },

    #[error("pruned space too large: more than {cap} states")]
    PrunedSpaceTooLarge { cap: usize },

    #[error("{labels} prunable labels exceed the oracle limit of {limit}")]
    OracleLimit { labels: usize, limit: usize },

    #[error("exact inference intractable: intermediate factor with {entries} entries exceeds {limit}")]
    Intractable { entries: usize, limit: usize },

    #[error("no state found within a retry budget of {0}")]
    RetryBudgetExhausted(usize),

    #[error("cannot draw from an empty state space")]
    EmptySpace,

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported construct at line {line}: {message}")]
    Unsupported { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by a state space or factor outgrowing a configured cap.
    pub fn is_capacity(&self) -> bool {
        matches!(
            self,
            Error::StateSpaceTooLarge { .. }
                | Error::PrunedSpaceTooLarge { .. }
                | Error::OracleLimit { .. }
                | Error::Intractable { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Csv { .. })
    }
}
