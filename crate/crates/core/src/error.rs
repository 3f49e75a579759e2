use std::path::PathBuf;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: NodeId },
    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: NodeId, v: NodeId },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("chain of logical node {0} is a singleton and cannot be split")]
    SingletonChain(NodeId),
    #[error("density {target} unreachable: no splittable chain left at density {reached}")]
    UnreachableDensity { target: f64, reached: f64 },
    #[error("density undefined for a graph with {0} node(s)")]
    TooFewNodes(usize),
    #[error("missing value for variable {0}")]
    MissingVariable(NodeId),
    #[error("assignment kind does not match model")]
    KindMismatch,
    #[error("model has nonzero linear bias on node {0}; cut value requires h = 0")]
    NonzeroField(NodeId),
    #[error("model has no couplings")]
    NoCouplings,
    #[error("{vars} variables exceed the exact solver limit of {max}")]
    TooManyVariables { vars: usize, max: usize },
    #[error("no reference value for instance {0}")]
    MissingReference(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("coefficient {0} is not a multiple of 1/128")]
    OffGrid(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
