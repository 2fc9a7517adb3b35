use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("GF({p}^{e}) exceeds the field order cap {cap}")]
    FieldTooLarge { p: u32, e: u32, cap: u32 },
    #[error("element {value} is not in GF({q})")]
    ElementOutOfRange { value: u32, q: u32 },
    #[error("binary operation needs a second operand")]
    MissingOperand,
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("dimension must be at least 1")]
    InvalidDimension,
    #[error("{what}: {actual} exceeds the limit {limit}")]
    GuardExceeded {
        what: &'static str,
        actual: u128,
        limit: u128,
    },
    #[error("rank {d} is outside 0..={n}")]
    InvalidRank { d: i64, n: i64 },
    #[error("closure of an empty point set")]
    EmptyPointSet,
    #[error("point index {index} out of range (geometry has {count} points)")]
    PointOutOfRange { index: usize, count: usize },
    #[error("point {0} is not in the ground set")]
    NotInGround(usize),
    #[error("empty ground set")]
    EmptyGround,

    #[error("classes do not partition the ground set: {0}")]
    NotAPartition(String),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("threshold n0 does not fit in 128 bits")]
    ThresholdOverflow,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
