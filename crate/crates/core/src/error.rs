use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not adjacent to node {1}")]
    NotAdjacent(NodeId, NodeId),
    #[error("no incoming message on slot {0}->{1}")]
    MissingMessage(NodeId, NodeId),

    #[error("all particle weights are zero")]
    DegenerateWeights,
    #[error("weights are not normalized (sum = {0})")]
    NotNormalized(f64),
    #[error("invalid weight {0}")]
    InvalidWeight(f64),
    #[error("particle set is empty")]
    EmptySet,
    #[error("{particles} particles but {weights} weights")]
    LengthMismatch { particles: usize, weights: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance is singular or not positive")]
    SingularCovariance,
    #[error("exact product would have {components} components (cap {cap})")]
    ProductTooLarge { components: u128, cap: usize },
    #[error("at least {needed} inputs required, got {got}")]
    TooFewInputs { needed: usize, got: usize },

    #[error("no pairwise model between nodes {0} and {1}")]
    UnknownEdgeClass(NodeId, NodeId),
    #[error("belief is empty and no exploration sampler was supplied")]
    NoProposal,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }
}
