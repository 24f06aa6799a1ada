use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("group order {order} exceeds the configured maximum {max}")]
    SpecTooLarge { order: usize, max: usize },

    #[error("cyclic factor {position} has order {order}; every factor needs order >= 2")]
    BadOrder { position: usize, order: usize },

    #[error("operands live in different groups")]
    GroupMismatch,

    #[error("element index {index} out of range for a group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },

    #[error("set is not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("operation requires a nonempty set")]
    EmptySet,

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("connection set does not generate the group")]
    NotGenerating,

    #[error("connection set does not contain 0")]
    ZeroMissing,

    #[error("subgroup is not a 1-fragment: {0}")]
    NotAFragment(String),

    #[error("exhaustive engine limited to order {max}, got {order}")]
    TooLargeForExhaustive { order: usize, max: usize },

    #[error("source and sink coincide (vertex {0})")]
    SameVertex(usize),

    #[error("vertex {0} out of range for a digraph on {1} vertices")]
    VertexOutOfRange(usize, usize),

    #[error("arc ({0},{1}) is present")]
    EdgePresent(usize, usize),

    #[error("sink is not {k}-nonseparable from source: separator of size {cut}")]
    NotNonseparable { k: usize, cut: usize },

    #[error("deleting arc ({0},{1}) does not reduce connectivity")]
    NotCritical(usize, usize),

    #[error("arc ({0},{1}) ends at the sink, so no part can have it on its boundary")]
    ArcIntoSink(usize, usize),

    #[error("not a part: {0}")]
    NotAPart(String),

    #[error("no matching of the requested size exists")]
    NoMatching,

    #[error("matching is not maximal: {0}")]
    NotMaximal(String),

    #[error("exhaustive budget exceeded: {needed} pairs > budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("ledger violation: {0}")]
    LedgerViolation(String),

    #[error("recursive fan construction failed: {0}")]
    Recursion(String),

    #[error("invariant violated: {0}")]
    InvariantViolated(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("tuple has {got} coordinates, group has rank {rank}")]
    RankMismatch { got: usize, rank: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
