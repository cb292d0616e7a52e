use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed author name: {0:?}")]
    MalformedName(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate manuscript id {id:?} (line {line})")]
    DuplicateManuscript { id: String, line: usize },

    #[error("graph format error: {0}")]
    Format(String),

    #[error("graph file is corrupt: {0}")]
    Corrupt(String),

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty seed multiset")]
    EmptySeed,

    #[error("manuscript {manuscript:?} has no referenced authors present in the graph")]
    NoSeeds { manuscript: String },

    #[error("energy vector has no positive entry; no referees found")]
    NoEnergy,

    #[error("empty sample supplied to a two-sample test")]
    EmptySample,

    #[error("bids reference unknown manuscripts: {}", .0.join(", "))]
    UnknownManuscripts(Vec<String>),

    #[error("no bids supplied")]
    NoBids,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
