use thiserror::Error;

/// Errors raised by the hypergraph toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge {edge:?} has {found} vertices, expected {expected}")]
    RejectsEdgeArity {
        edge: Vec<u32>,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex} out of range for a hypergraph on {n} vertices")]
    RejectsVertexRange { vertex: u32, n: usize },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("vertex set of size {size} is too large for uniformity {k}")]
    SetTooLarge { size: usize, k: usize },
    #[error("level {level} outside 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("pattern is not linear: edges {0:?} and {1:?} share more than one vertex")]
    NotLinear(Vec<u32>, Vec<u32>),
    #[error("set of odd size {0} cannot be split into pairs")]
    OddSetSize(usize),
    #[error("operation requires uniformity {expected}, hypergraph has {found}")]
    UniformityUnsupported { expected: usize, found: usize },
    #[error("density is zero")]
    DegenerateDensity,
    #[error("invalid rooted query: {0}")]
    InvalidQuery(String),
    #[error("sets overlap on vertex {0}")]
    Overlap(u32),
    #[error("divisibility violated: {0}")]
    DivisibilityViolation(String),
    #[error("set is not zeta-separable")]
    NotSeparable,
    #[error("unsupported strategy: {0}")]
    UnsupportedStrategy(String),
    #[error("absorber selection failed after {attempts} attempts: {reason}")]
    SelectionFailed { attempts: usize, reason: String },
    #[error("leftover of size {size} could not be made separable after {attempts} attempts")]
    SeparabilityUnreachable {
        size: usize,
        attempts: usize,
        leftover: Vec<u32>,
    },
    #[error("leftover of size {size} exceeds absorber capacity {capacity}")]
    LeftoverTooLarge { size: usize, capacity: usize },
    #[error("no free absorber for block {0:?}")]
    AbsorptionFailed(Vec<u32>),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
