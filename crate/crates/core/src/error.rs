use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("frequency {0} outside the exact-arithmetic range |n| <= 55108")]
    Overflow(i64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mean mass not conserved along trajectory (relative drift {0:e})")]
    MassNotConserved(f64),
    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("estimated cost {cost:e} exceeds budget {budget:e}")]
    Budget { cost: f64, budget: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("node {0} is not a terminal of the tree")]
    NotTerminal(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
