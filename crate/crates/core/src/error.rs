use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("atom number {n} outside supported range 1..={cap}")]
    Size { n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("norm drift {drift:.3e} still above budget {budget:.3e} after {refinements} step halvings")]
    Accuracy {
        drift: f64,
        budget: f64,
        refinements: u32,
    },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e}")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("config line {line}: key `{key}`: {msg}")]
    Config { line: usize, key: String, msg: String },
}
