//! Full clustering from `b` phases, network decomposition by repeated
//! clustering, and the MIS built on top of a decomposition.

use thiserror::Error;

use crate::clustering::Clustering;
use crate::congest::{run_protocol_on, ProtocolError, RoundStats, SimConfig, Transcript};
use crate::graph::{Graph, IdAssignment, NodeSet};
use crate::phase::{run_phase, PhaseError, PhaseResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Reference,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("clustering made no progress on {0} remaining nodes")]
    NoProgress(usize),
}

#[derive(Clone, Debug)]
pub struct ClusterRun {
    pub clustering: Clustering,
    pub phases: Vec<PhaseResult>,
    /// Simulated runs only.
    pub stats: Option<RoundStats>,
    pub transcript: Option<Transcript>,
}

pub fn strong_cluster(
    g: &Graph,
    ids: &IdAssignment,
    backend: Backend,
) -> Result<ClusterRun, ClusterError> {
    cluster_within(
        g,
        ids,
        &NodeSet::full(g.node_count()),
        backend,
        &SimConfig::default(),
    )
}

/// Clusters `G[domain]`; nodes outside `domain` take no part.
pub fn cluster_within(
    g: &Graph,
    ids: &IdAssignment,
    domain: &NodeSet,
    backend: Backend,
    config: &SimConfig,
) -> Result<ClusterRun, ClusterError> {
    match backend {
        Backend::Reference => {
            let mut alive = domain.clone();
            let mut terminals = domain.clone();
            let mut phases = Vec::with_capacity(ids.bits() as usize);
            for p in 0..ids.bits() {
                let r = run_phase(g, ids, &alive, &terminals, p)?;
                alive = r.survivors.clone();
                terminals = r.terminals_out.clone();
                phases.push(r);
            }
            Ok(ClusterRun {
                clustering: Clustering::from_survivors(g, ids, domain, &alive, &terminals),
                phases,
                stats: None,
                transcript: None,
            })
        }
        Backend::Simulated => {
            let run = run_protocol_on(g, ids, domain, config)?;
            Ok(ClusterRun {
                clustering: run.clustering,
                phases: run.phases,
                stats: Some(run.stats),
                transcript: Some(run.transcript),
            })
        }
    }
}

/// Color classes in the order they were produced. `terminals[c]` lists one
/// terminal per cluster of color `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub b: u32,
    pub color_of: Vec<Option<usize>>,
    pub terminals: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn colors_used(&self) -> usize {
        self.terminals.len()
    }

    pub fn class(&self, c: usize) -> Vec<usize> {
        (0..self.color_of.len())
            .filter(|&v| self.color_of[v] == Some(c))
            .collect()
    }
}

/// `⌈log₂ n⌉ + 1`.
pub fn color_bound(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize + 1
}

/// Clusters the remaining graph with a fixed `b`, gives the clustered nodes
/// the next color, and repeats until every node is colored.
pub fn network_decomposition(g: &Graph, ids: &IdAssignment) -> Result<Decomposition, ClusterError> {
    network_decomposition_with(g, ids, Backend::Reference)
}

pub fn network_decomposition_with(
    g: &Graph,
    ids: &IdAssignment,
    backend: Backend,
) -> Result<Decomposition, ClusterError> {
    let n = g.node_count();
    let mut remaining = NodeSet::full(n);
    let mut color_of = vec![None; n];
    let mut terminals = Vec::new();
    while !remaining.is_empty() {
        let run = cluster_within(g, ids, &remaining, backend, &SimConfig::default())?;
        let c = terminals.len();
        if run.clustering.coverage() == 0 {
            return Err(ClusterError::NoProgress(remaining.len()));
        }
        for cluster in &run.clustering.clusters {
            for &v in &cluster.nodes {
                color_of[v] = Some(c);
                remaining.remove(v);
            }
        }
        terminals.push(run.clustering.terminals());
    }
    Ok(Decomposition {
        b: ids.bits(),
        color_of,
        terminals,
    })
}

/// Colors in order; within a color, nodes by ascending identifier join when
/// no neighbor has joined. Same-colored clusters are non-adjacent, so one
/// pass over the whole color class equals a pass per cluster.
pub fn mis_via_decomposition(g: &Graph, ids: &IdAssignment, d: &Decomposition) -> Vec<usize> {
    let n = g.node_count();
    let mut in_set = vec![false; n];
    for c in 0..d.colors_used() {
        let mut class = d.class(c);
        class.sort_by_key(|&v| ids.id(v));
        for v in class {
            if !g.neighbors(v).iter().any(|&w| in_set[w]) {
                in_set[v] = true;
            }
        }
    }
    (0..n).filter(|&v| in_set[v]).collect()
}
