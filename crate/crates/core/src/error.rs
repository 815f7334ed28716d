use thiserror::Error;

/// Errors produced by trace construction, measures, conformance checking and
/// the text parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must contain at least one label")]
    EmptyAlphabet,
    #[error("duplicate activity label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown activity label `{0}`")]
    UnknownLabel(String),
    #[error("matrix entry at row {row}, column {col} is negative ({value})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("column {col} sums to {sum}, expected 1")]
    ColumnSumViolation { col: usize, sum: f64 },
    #[error("matrix dimensions {found_rows}x{found_cols} do not match expected {expected_rows}x{expected_cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("trace must contain at least one event")]
    EmptyTrace,
    #[error("trace lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("operands are defined over different alphabets")]
    AlphabetMismatch,
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("{projected} realizations exceed the enumeration cap of {cap}")]
    ExplosionGuard { projected: u128, cap: u64 },
    #[error("model contains no traces")]
    EmptyModel,
    #[error("event log contains no traces")]
    EmptyLog,
    #[error("no model trace of length {length} to compare against")]
    NoLengthCompatibleTrace { length: usize },
    #[error("distance vector is empty")]
    EmptyVector,
    #[error("distance must be finite and nonnegative, got {0}")]
    InvalidDistance(f64),
    #[error("blend weight must lie in [0, 1], got {0}")]
    InvalidBlendWeight(f64),
    #[error("move cost must be finite and nonnegative, got {0}")]
    InvalidMoveCost(f64),
    #[error("grid step must lie in (0, 1], got {0}")]
    InvalidGridStep(f64),
    #[error("no (observation, ground truth) pairs supplied")]
    EmptyPairs,
    #[error("no candidate models supplied")]
    EmptyModelList,
    #[error("trace frequency must be at least 1")]
    ZeroFrequency,
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    /// True for errors raised by the text parsers themselves, as opposed to
    /// domain validation of otherwise well-formed input.
    pub fn is_syntax(&self) -> bool {
        matches!(self, Error::Syntax { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
