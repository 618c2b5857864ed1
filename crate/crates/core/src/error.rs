use thiserror::Error;

use crate::decomp::NodeId;
use crate::graph::Vertex;

pub type Result<T> = std::result::Result<T, GcmcError>;

#[derive(Debug, Error)]
pub enum GcmcError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: Vertex, n: usize },

    #[error("graphs are limited to {max} vertices, got {n}")]
    TooManyVertices { n: usize, max: usize },

    #[error("unknown constraint kind `{0}`")]
    UnknownConstraint(String),

    #[error("unknown decomposition node {0}")]
    UnknownNode(NodeId),

    #[error("vertex {0} appears in no bag")]
    VertexNotInDecomposition(Vertex),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("node {node} has {count} DP states, above the cap of {cap}")]
    StateCap { node: NodeId, count: usize, cap: usize },

    #[error("state is not a member of the state space of node {0}")]
    StateNotInSpace(NodeId),

    #[error("node {0} is a leaf")]
    LeafNode(NodeId),

    #[error("node {0} is not a leaf")]
    NotLeaf(NodeId),

    #[error("vertex set is infeasible for the {0} constraint")]
    InfeasibleSet(String),

    #[error("no feasible solution exists")]
    NoFeasibleSolution,

    #[error("variable family does not match the decomposition: {0}")]
    FamilyMismatch(String),

    #[error("family too large: {0}")]
    FamilyTooLarge(String),

    #[error("LP would have more than {cap} columns")]
    ColumnCap { cap: usize },

    #[error("LP too large for the dense simplex: {rows} rows and {columns} columns after presolve")]
    TableauTooLarge { rows: usize, columns: usize },

    #[error("enumeration exceeded the cap of {cap} outcomes")]
    EnumerationCap { cap: usize },

    #[error("brute force is limited to {max} vertices, got {n}")]
    EnumerationTooLarge { n: usize, max: usize },

    #[error("LP solver: {0}")]
    Solver(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("constraint {0} is not supported here")]
    UnsupportedConstraint(String),

    #[error("malformed probability table: {0}")]
    MalformedTable(String),

    #[error("pair ({0}, {1}) has no cut variable in the model")]
    MissingPair(Vertex, Vertex),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GcmcError {
    /// True for errors caused by the instance exceeding a size cap (state space,
    /// LP columns, enumeration) rather than by malformed input.
    pub fn is_cap_error(&self) -> bool {
        matches!(
            self,
            GcmcError::StateCap { .. }
                | GcmcError::ColumnCap { .. }
                | GcmcError::TableauTooLarge { .. }
                | GcmcError::EnumerationCap { .. }
                | GcmcError::EnumerationTooLarge { .. }
                | GcmcError::FamilyTooLarge(_)
                | GcmcError::UnsupportedConstraint(_)
        )
    }
}
