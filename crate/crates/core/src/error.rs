use crate::linalg::LowRankFactor;

/// Errors raised by compression, arithmetic and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("ACA reached the rank cap {max_rank} before converging")]
    RankCapExceeded {
        max_rank: usize,
        partial: Box<LowRankFactor>,
    },

    #[error("stage I factorization of cluster {cluster} failed: {source}")]
    ClusterFactorization {
        cluster: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix is not Hermitian (deviation {deviation:.3e}, allowed {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("singular matrix: pivot {index} has magnitude {magnitude:.3e}")]
    Singular { index: usize, magnitude: f64 },

    #[error("leaf inverse failed on cluster {cluster}: {source}")]
    LeafInverse {
        cluster: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("H2 structures do not match: {0}")]
    StructureMismatch(String),

    #[error("missing cluster basis for cluster {0}")]
    MissingBasis(usize),

    #[error("coincident voxel centers {0} and {1}")]
    CoincidentPoints(usize, usize),

    #[error("dense size {n} exceeds the cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("BiCGStab breakdown after restart at iteration {0}")]
    Breakdown(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
