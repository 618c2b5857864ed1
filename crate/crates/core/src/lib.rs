//! Graph-constrained max-cut on graphs of bounded treewidth.
//!
//! The pipeline builds a tree decomposition, a per-node state space for the
//! chosen constraint, a lifted LP over joint node states, solves it with a
//! bounded simplex, and rounds the solution top-down along the tree. The
//! oracle module checks every stage against exhaustive enumeration.

pub mod corpus;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod graph;
pub mod io;
pub mod lp;
pub mod minor;
pub mod oracle;
pub mod pipeline;
pub mod rounding;
pub mod simplex;

pub use decomp::{build_tree_decomposition, FamilyMode, NodeFamily, NodeId, NodeSet, TreeDecomposition};
pub use dp::{ConstraintDp, DpState, StateAssignment};
pub use error::{GcmcError, Result};
pub use graph::{Constraint, ConstraintGraph, Instance, Vertex, VertexSet, WeightFunction};
pub use lp::LpModel;
pub use minor::{algorithm2, Algorithm2Config, Algorithm2Report, VertexPartition};
pub use oracle::{certify_instance, CertifyConfig, OracleReport};
pub use pipeline::{solve_instance, PipelineConfig, SolveReport, SolvedInstance};
pub use rounding::{RoundingPlan, RoundingRun};
pub use simplex::SolverConfig;

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct ReadmeDoctests;
