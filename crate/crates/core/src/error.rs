use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("interval extension undefined for dense domains")]
    DenseInterval,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("fresh variable `{0}` collides with an existing variable")]
    FreshNameCollision(String),
}

/// Syntax or static-check failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("bound k must be at least 1, got {0}")]
    BadBound(u32),
    #[error("propositions must be removed before encoding (found `{0}`)")]
    PropositionsPresent(String),
    #[error("formula must be in positive normal form")]
    NotPnf,
    #[error("mod constraint requires discrete theory")]
    ModularOverDense,
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("failed to launch solver `{command}`: {source}")]
    Launch {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty solver command")]
    EmptyCommand,
    #[error("solver i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed solver output: {0}")]
    Malformed(String),
    #[error("missing model value for `{0}`")]
    MissingValue(String),
    #[error("model requested from a non-sat result")]
    NotSat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WitnessError {
    #[error("incomplete model: {0}")]
    IncompleteModel(String),
    #[error("condition check needs a discrete theory")]
    DenseTheory,
    #[error("search space of {0} candidate valuations exceeds the cap")]
    SearchSpaceExceeded(u128),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("invalid option `{key}`: {message}")]
    BadOption { key: String, message: String },
}
