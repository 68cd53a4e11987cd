use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge ({u}, {v}) has non-positive weight {weight}")]
    NonPositiveWeight { u: usize, v: usize, weight: f64 },

    #[error("node {0} has non-positive weight")]
    NonPositiveNodeWeight(usize),

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: usize, v: usize },

    #[error("directed input is not supported")]
    Directed,

    #[error("node {node} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("no edge between {0} and {1}")]
    EdgeNotFound(NodeId, NodeId),

    #[error("node {0} is isolated; the chain cannot move")]
    IsolatedNode(NodeId),

    #[error("target density is zero at node {0}")]
    ZeroDensity(NodeId),

    #[error("target density is zero everywhere; use a positive epsilon floor")]
    DegenerateTarget,

    #[error("transition matrix limited to {limit} nodes, graph has {node_count}")]
    GraphTooLarge { node_count: usize, limit: usize },

    #[error("statistic mean over an empty node set")]
    EmptyNodeSet,

    #[error("backbone fraction {0} outside (0, 1]")]
    InvalidFraction(f64),

    #[error("graph is disconnected ({components} components); enable largest-component selection")]
    Disconnected { components: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by caller-supplied arguments rather than data or I/O.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::NodeOutOfRange { .. }
                | Error::InvalidFraction(_)
                | Error::InvalidConfig(_)
                | Error::GraphTooLarge { .. }
        )
    }
}
