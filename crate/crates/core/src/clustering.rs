//! Clustering output shared by both executors.

use crate::graph::{
    connected_components, induced_diameter, Diameter, Graph, IdAssignment, NodeSet,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub terminal: usize,
    /// Sorted node indices.
    pub nodes: Vec<usize>,
}

/// Disjoint clusters over a domain of nodes; the rest of the domain is
/// unclustered. Clusters are ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    pub n: usize,
    pub b: u32,
    pub clusters: Vec<Cluster>,
    pub unclustered: Vec<usize>,
}

impl Clustering {
    /// Builds from `(terminal, members)` groups; nodes of `domain` in no
    /// group are unclustered.
    pub fn from_groups(
        n: usize,
        b: u32,
        domain: &NodeSet,
        groups: Vec<(usize, Vec<usize>)>,
    ) -> Self {
        let mut covered = NodeSet::empty(n);
        let mut clusters: Vec<Cluster> = groups
            .into_iter()
            .map(|(terminal, mut nodes)| {
                nodes.sort_unstable();
                for &v in &nodes {
                    covered.insert(v);
                }
                Cluster { terminal, nodes }
            })
            .collect();
        clusters.sort_by_key(|c| c.nodes.first().copied());
        let unclustered = domain.difference(&covered).to_vec();
        Clustering {
            n,
            b,
            clusters,
            unclustered,
        }
    }

    /// Clusters are the components of `G[survivors]`, each holding exactly
    /// one of `terminals`.
    pub fn from_survivors(
        g: &Graph,
        ids: &IdAssignment,
        domain: &NodeSet,
        survivors: &NodeSet,
        terminals: &NodeSet,
    ) -> Self {
        let groups = connected_components(g, survivors)
            .into_iter()
            .map(|nodes| {
                let terminal = nodes
                    .iter()
                    .copied()
                    .find(|&v| terminals.contains(v))
                    .expect("every surviving component holds a terminal");
                (terminal, nodes)
            })
            .collect();
        Clustering::from_groups(g.node_count(), ids.bits(), domain, groups)
    }

    pub fn coverage(&self) -> usize {
        self.clusters.iter().map(|c| c.nodes.len()).sum()
    }

    pub fn clustered(&self) -> NodeSet {
        NodeSet::from_nodes(
            self.n,
            self.clusters.iter().flat_map(|c| c.nodes.iter().copied()),
        )
    }

    pub fn terminals(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.terminal).collect()
    }

    /// `4b³`.
    pub fn ruling_radius_bound(&self) -> u64 {
        4 * (self.b as u64).pow(3)
    }

    /// `8b³`, twice the ruling radius.
    pub fn diameter_bound(&self) -> u64 {
        diameter_bound(self.b)
    }

    /// Largest strong diameter over all clusters; `None` if some cluster is
    /// disconnected or there are no clusters.
    pub fn max_diameter_observed(&self, g: &Graph) -> Option<u32> {
        let mut best = None;
        for c in &self.clusters {
            let set = NodeSet::from_nodes(self.n, c.nodes.iter().copied());
            match induced_diameter(g, &set) {
                Ok(Diameter::Finite(d)) => best = Some(best.map_or(d, |x: u32| x.max(d))),
                _ => return None,
            }
        }
        best
    }
}

pub fn diameter_bound(b: u32) -> u64 {
    8 * (b as u64).pow(3)
}
