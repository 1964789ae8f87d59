use thiserror::Error;

use crate::graph::NodeId;
use crate::partition::CommunityId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
    #[error("community {0} is not in the partition")]
    UnknownCommunity(CommunityId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) already exists")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) does not exist")]
    MissingEdge(NodeId, NodeId),
    #[error("partition covers {found} nodes but the graph has {expected}")]
    UniverseMismatch { expected: usize, found: usize },
    #[error("illegal update ({u}, {v}): {reason}")]
    IllegalUpdate {
        u: NodeId,
        v: NodeId,
        reason: &'static str,
    },
    #[error("candidate excluded: {0}")]
    ExcludedCandidate(&'static str),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("graph has no edges")]
    NoEdges,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
