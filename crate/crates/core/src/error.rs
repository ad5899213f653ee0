use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("NotSymmetric: gram entry ({row},{col}) differs from ({col},{row})")]
    NotSymmetric { row: usize, col: usize },
    #[error("NotEven: diagonal entry {index} is odd")]
    NotEven { index: usize },
    #[error("NotPositiveDefinite: leading principal minor of order {order} is not positive")]
    NotPositiveDefinite { order: usize },
    #[error("DimensionMismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("BudgetExceeded: counting needs {needed} residue evaluations, ceiling is {ceiling}")]
    BudgetExceeded { needed: u128, ceiling: u64 },
    #[error("StabilizationFailure: p={p}, t={t}: level {level} gives {first}, level {next} gives {second}")]
    StabilizationFailure {
        p: u64,
        t: i64,
        level: u32,
        next: u32,
        first: String,
        second: String,
    },
    #[error("BadPrime: {p} divides 2*det")]
    BadPrime { p: u64 },
    #[error("OddRankUnsupported: rank {rank} is odd")]
    OddRankUnsupported { rank: usize },
    #[error("IrrationalVolume: det {det} is not a perfect square")]
    IrrationalVolume { det: String },
    #[error("InconsistentInput: {0}")]
    InconsistentInput(String),
    #[error("UnsupportedRank: {0}")]
    UnsupportedRank(String),
    #[error("WeightTooSmall: weight {k} must be even and exceed 2 + rank {rank}")]
    WeightTooSmall { k: i64, rank: usize },
    #[error("RankNotUnimodularEven: rank {rank} is not a multiple of 8")]
    RankNotUnimodularEven { rank: usize },
    #[error("DeltaNotPositive: hyperbolic norm {delta} is not positive")]
    DeltaNotPositive { delta: String },
    #[error("UnsupportedLattice: {0}")]
    UnsupportedLattice(String),
    #[error("TruncationInsufficient: tail bound {tail:e} exceeds tolerance {tolerance:e}")]
    TruncationInsufficient { tail: f64, tolerance: f64 },
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
    #[error("Io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidInput(e.to_string())
    }
}
