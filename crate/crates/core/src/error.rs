use thiserror::Error;

/// Errors raised by network construction, reduction and simulation.
///
/// Bus and generator indices carried by the variants are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("reactance network is disconnected: bus {bus} is unreachable from bus 0")]
    DisconnectedNetwork { bus: usize },

    #[error("parameter {name}[{index}] = {value} violates its sign constraint")]
    NonpositiveParameter {
        name: &'static str,
        index: usize,
        value: f64,
    },

    #[error("duplicate line between buses {0} and {1}")]
    DuplicateLine(usize, usize),

    #[error("bad bus index in line ({from}, {to}); network has {buses} buses")]
    BadBusIndex {
        from: usize,
        to: usize,
        buses: usize,
    },

    #[error("index ({i}, {j}) is invalid for dimension {n}")]
    BadIndex { i: usize, j: usize, n: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("linear system is singular or not positive definite: {0}")]
    SingularSystem(&'static str),

    #[error("aggregated matrix is not a Laplacian: entry ({0}, {1}) = {2}")]
    NonLaplacianResult(usize, usize, f64),

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
