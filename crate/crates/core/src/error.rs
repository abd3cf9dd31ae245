use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sublattice check failed: {0}")]
    NotSublattice(String),
    #[error("unsupported instance profile: {0}")]
    UnsupportedProfile(String),
    #[error("parameter m overflows the memory budget ({m} columns at n = {n}); pass an explicit override_m")]
    MOverflow { n: usize, m: f64 },
    #[error("spectral norm did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("only {found} primes in [{lo}, {hi}], need {needed}; widen the range or raise n*m")]
    NotEnoughPrimes {
        lo: u64,
        hi: u64,
        found: usize,
        needed: usize,
    },
    #[error("CRT moduli must be distinct primes: {0}")]
    BadModuli(String),
    #[error("value is not on the 1/q grid: {0}")]
    OffGrid(String),
    #[error("entry {0} outside [0, 1)")]
    OutOfUnitRange(f64),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("solution rejected: {0}")]
    BadSolution(String),
    #[error("target guess missed: x[{column}] = {got}, embedding divisor {divisor}")]
    GuessMiss {
        column: usize,
        got: i64,
        divisor: i64,
    },
    #[error("transcript corrupt: {0}")]
    Transcript(String),
    #[error("statistics: {0}")]
    Stats(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
