use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid preference list for agent {agent}: {message}")]
    InvalidList { agent: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("preference list for agent {agent} is incomplete ({len} of {houses} houses)")]
    IncompletePreference {
        agent: usize,
        len: usize,
        houses: usize,
    },

    #[error("{houses} houses exceeds the exhaustive search bound of {bound}")]
    BoundExceeded { houses: usize, bound: usize },

    #[error("expected exactly {expected} agents, got {actual}")]
    AgentCount { expected: usize, actual: usize },

    #[error("agent index {agent} out of range for {agents} agents")]
    AgentOutOfRange { agent: usize, agents: usize },

    #[error("insertion position {position} out of range 1..={max}")]
    PositionOutOfRange { position: usize, max: usize },

    #[error("clone count {0} is odd")]
    OddCloneCount(usize),

    #[error("values must be pairwise distinct (indices {0} and {1} tie)")]
    TiedValues(usize, usize),

    #[error("utilities of agent {agent} are not strictly decreasing along the preference order")]
    InconsistentUtilities { agent: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
