use alloc::string::String;

/// Errors raised by constructors and operations of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("embedding exponent nonpositive: r/d + 1/q - 1/p = {0}")]
    EmbeddingExponentNonpositive(f64),
    #[error("profile is not increasing on [{lo}, {hi}]")]
    NonMonotoneProfile { lo: f64, hi: f64 },
    #[error("profile exceeds the identity at level j = {j}: phi(2^-j) > 2^-j")]
    ProfileAboveIdentity { j: u32 },
    #[error("grid parameters out of range: {0}")]
    GridRange(String),
    #[error("gap hypothesis violated at j = {j}: gap {gap} < required {required}")]
    GapViolation { j: usize, gap: f64, required: f64 },
    #[error("ill-conditioned local polynomial basis on cell {cell}")]
    IllConditionedCell { cell: usize },
    #[error("insufficient mesh resolution: {0}")]
    InsufficientResolution(String),
    #[error("constructive scheme realizes case-1 rates only")]
    OutsideCaseOne,
    #[error("regression needs at least two distinct points")]
    DegenerateRegression,
}

pub type Result<T> = core::result::Result<T, Error>;
