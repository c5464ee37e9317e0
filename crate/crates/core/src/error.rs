use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter lies outside the region an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two nodes coincide (or nearly so), making a divided quantity vanish.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Exhaustive enumeration would visit more subsets than allowed.
    #[error("enumeration of {count} subsets exceeds budget {budget}; use the greedy method")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("{name} = {value} is outside the admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    /// No complete block can be formed from the sequence prefix.
    #[error("insufficient mass: partial sum {achieved} never reaches the first block target 1")]
    InsufficientMass { achieved: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    /// A power-law fit produced a non-decaying exponent.
    #[error("no decay: fitted exponent sigma = {0} is not positive")]
    NoDecay(f64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
