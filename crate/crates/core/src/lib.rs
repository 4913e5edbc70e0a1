//! Deterministic low-diameter clustering and network decomposition.
//!
//! A reference executor applies the phase rules centrally; a CONGEST
//! simulator runs the same algorithm as per-node programs with exact round
//! and message-size accounting. Both produce identical clusterings.

pub mod artifact;
pub mod clustering;
pub mod congest;
pub mod decomposition;
pub mod edgelist;
pub mod exec;
pub mod forest;
pub mod gen;
pub mod graph;
pub mod phase;
pub mod verify;

use thiserror::Error;

pub use clustering::{Cluster, Clustering};
pub use decomposition::{
    mis_via_decomposition, network_decomposition, strong_cluster, Backend, ClusterRun,
    Decomposition,
};
pub use exec::Execution;
pub use graph::{Graph, IdAssignment, NodeSet};

/// Any failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Parse(#[from] edgelist::ParseError),
    #[error(transparent)]
    Gen(#[from] gen::GenError),
    #[error(transparent)]
    Cluster(#[from] decomposition::ClusterError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
