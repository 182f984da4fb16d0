use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum CoxError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown generator name `{0}`")]
    UnknownGenerator(String),

    #[error("elements belong to different Coxeter systems")]
    CrossSystem,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("sign certification exceeded the precision cap ({0} bisections); this is a defect")]
    PrecisionExceeded(usize),

    #[error("bad prime {prime}: {reason}")]
    BadPrime { prime: u64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("orbit partition does not cover reflection `{0}` (refl radius too small)")]
    PartitionCoverage(String),

    #[error("conjugate escapes the enumeration radius for orbit {0}")]
    ConjugateEscapes(usize),

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("rank {rank} exceeds the subset-scan cap {cap}")]
    RankCap { rank: usize, cap: usize },

    #[error("{0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, CoxError>;
