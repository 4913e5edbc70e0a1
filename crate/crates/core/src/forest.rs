//! Rooted forests over a subset of the graph's nodes, with the two edits a
//! step performs: re-hanging a subtree under another tree, and deleting
//! whole subtrees.

use thiserror::Error;

use crate::graph::{multi_source_bfs, Graph, GraphError, IdAssignment, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("node {0} is not a forest member")]
    NotMember(usize),
    #[error("terminal {0} is not in the alive set")]
    TerminalNotAlive(usize),
    #[error("node {0} is not reachable from any terminal")]
    Unreachable(usize),
    #[error("node {parent} is not a graph neighbor of {v}")]
    NotNeighbor { v: usize, parent: usize },
    #[error("rehanging {v} under its own descendant {new_parent} would create a cycle")]
    Cycle { v: usize, new_parent: usize },
    #[error("{new_parent} lies in the same tree as {v}")]
    SameTree { v: usize, new_parent: usize },
    #[error("subtree of {0} overlaps another deleted subtree")]
    OverlappingSubtrees(usize),
    #[error("forest audit failed at node {node}: {msg}")]
    Audit { node: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedForest {
    member: Vec<bool>,
    parent: Vec<Option<usize>>,
    root_of: Vec<usize>,
    depth: Vec<u32>,
    tree_size: Vec<usize>,
    members: usize,
}

impl RootedForest {
    /// Builds a forest from raw parent links and depths; every member's root
    /// is found by walking up. Used to rebuild forests observed elsewhere
    /// (for example from simulator node states).
    pub fn from_parts(
        member: Vec<bool>,
        parent: Vec<Option<usize>>,
        depth: Vec<u32>,
    ) -> Result<Self, ForestError> {
        let n = member.len();
        let mut root_of = vec![usize::MAX; n];
        let mut tree_size = vec![0; n];
        let mut members = 0;
        for v in 0..n {
            if !member[v] {
                continue;
            }
            members += 1;
            let mut u = v;
            let mut hops = 0;
            while let Some(p) = parent[u] {
                if !member[p] {
                    return Err(ForestError::NotMember(p));
                }
                u = p;
                hops += 1;
                if hops > n {
                    return Err(ForestError::Audit {
                        node: v,
                        msg: "parent links contain a cycle".into(),
                    });
                }
            }
            root_of[v] = u;
            tree_size[u] += 1;
        }
        Ok(RootedForest {
            member,
            parent,
            root_of,
            depth,
            tree_size,
            members,
        })
    }

    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn is_member(&self, v: usize) -> bool {
        self.member[v]
    }

    pub fn member_count(&self) -> usize {
        self.members
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v))
    }

    pub fn member_set(&self) -> NodeSet {
        NodeSet::from_nodes(self.universe(), self.members())
    }

    /// Parent of a member, `None` for roots and non-members.
    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn is_root(&self, v: usize) -> bool {
        self.member[v] && self.parent[v].is_none()
    }

    pub fn roots(&self) -> Vec<usize> {
        self.members()
            .filter(|&v| self.parent[v].is_none())
            .collect()
    }

    pub fn root_of(&self, v: usize) -> Option<usize> {
        self.member[v].then(|| self.root_of[v])
    }

    pub fn depth(&self, v: usize) -> Option<u32> {
        self.member[v].then(|| self.depth[v])
    }

    /// Member count of the tree rooted at `root` (0 if `root` is not a root).
    pub fn tree_size(&self, root: usize) -> usize {
        if self.is_root(root) {
            self.tree_size[root]
        } else {
            0
        }
    }

    pub fn max_depth(&self) -> u32 {
        self.members().map(|v| self.depth[v]).max().unwrap_or(0)
    }

    /// Children lists of every member, each ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.universe()];
        for v in self.members() {
            if let Some(p) = self.parent[v] {
                children[p].push(v);
            }
        }
        children
    }

    /// `v` and all its descendants, parents before children.
    pub fn subtree_nodes(&self, v: usize) -> Result<Vec<usize>, ForestError> {
        if !self.member[v] {
            return Err(ForestError::NotMember(v));
        }
        Ok(collect_subtree(&self.children(), v))
    }

    pub fn rehang_subtree(
        &self,
        g: &Graph,
        v: usize,
        new_parent: usize,
    ) -> Result<RootedForest, ForestError> {
        let mut next = self.clone();
        let subtree = self.subtree_nodes(v)?;
        next.rehang_nodes(g, &subtree, new_parent)?;
        Ok(next)
    }

    /// Moves the subtree `nodes` (top node first, as returned by
    /// `collect_subtree`) under `new_parent`.
    pub(crate) fn rehang_nodes(
        &mut self,
        g: &Graph,
        nodes: &[usize],
        new_parent: usize,
    ) -> Result<(), ForestError> {
        let v = nodes[0];
        if !self.member[new_parent] {
            return Err(ForestError::NotMember(new_parent));
        }
        if nodes.contains(&new_parent) {
            return Err(ForestError::Cycle { v, new_parent });
        }
        if !g.has_edge(v, new_parent) {
            return Err(ForestError::NotNeighbor {
                v,
                parent: new_parent,
            });
        }
        let old_root = self.root_of[v];
        let new_root = self.root_of[new_parent];
        if old_root == new_root {
            return Err(ForestError::SameTree { v, new_parent });
        }
        let base = self.depth[v];
        let top = self.depth[new_parent] + 1;
        for &u in nodes {
            self.depth[u] = self.depth[u] - base + top;
            self.root_of[u] = new_root;
        }
        self.parent[v] = Some(new_parent);
        self.tree_size[old_root] -= nodes.len();
        self.tree_size[new_root] += nodes.len();
        Ok(())
    }

    pub fn delete_subtrees(&self, vs: &[usize]) -> Result<RootedForest, ForestError> {
        let children = self.children();
        let mut marked = vec![false; self.universe()];
        let mut doomed = Vec::new();
        for &v in vs {
            if !self.member[v] {
                return Err(ForestError::NotMember(v));
            }
            for u in collect_subtree(&children, v) {
                if marked[u] {
                    return Err(ForestError::OverlappingSubtrees(v));
                }
                marked[u] = true;
                doomed.push(u);
            }
        }
        let mut next = self.clone();
        next.remove_nodes(&doomed);
        Ok(next)
    }

    /// Removes nodes whose union is closed under taking descendants.
    pub(crate) fn remove_nodes(&mut self, nodes: &[usize]) {
        for &u in nodes {
            debug_assert!(self.member[u]);
            self.tree_size[self.root_of[u]] -= 1;
            self.member[u] = false;
            self.parent[u] = None;
            self.depth[u] = 0;
            self.root_of[u] = usize::MAX;
        }
        self.members -= nodes.len();
    }

    /// Recomputes roots, depths and tree sizes by walking parent links and
    /// compares them with the stored values.
    pub fn audit(&self, g: &Graph) -> Result<(), ForestError> {
        let n = self.universe();
        let fail = |node: usize, msg: String| Err(ForestError::Audit { node, msg });
        let mut sizes = vec![0usize; n];
        let mut count = 0;
        for v in self.members() {
            count += 1;
            let mut u = v;
            let mut hops = 0u32;
            while let Some(p) = self.parent[u] {
                if !self.member[p] {
                    return fail(u, format!("parent {p} is not a member"));
                }
                if !g.has_edge(u, p) {
                    return fail(u, format!("parent {p} is not a graph neighbor"));
                }
                u = p;
                hops += 1;
                if hops as usize > n {
                    return fail(v, "parent links contain a cycle".into());
                }
            }
            if hops != self.depth[v] {
                return fail(
                    v,
                    format!(
                        "stored depth {} but root is {hops} hops away",
                        self.depth[v]
                    ),
                );
            }
            if u != self.root_of[v] {
                return fail(
                    v,
                    format!("stored root {} but walk reaches {u}", self.root_of[v]),
                );
            }
            sizes[u] += 1;
        }
        if count != self.members {
            return fail(
                0,
                format!("member count {} but {count} members", self.members),
            );
        }
        for r in self.members().filter(|&r| self.parent[r].is_none()) {
            if sizes[r] != self.tree_size[r] {
                return fail(
                    r,
                    format!("tree size {} but {} members", self.tree_size[r], sizes[r]),
                );
            }
        }
        Ok(())
    }
}

pub(crate) fn collect_subtree(children: &[Vec<usize>], v: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut head = 0;
    while head < out.len() {
        let u = out[head];
        head += 1;
        out.extend_from_slice(&children[u]);
    }
    out
}

/// BFS forest of `G[alive]` rooted at `terminals`, using the
/// smallest-identifier parent rule.
pub fn bfs_forest(
    g: &Graph,
    ids: &IdAssignment,
    alive: &NodeSet,
    terminals: &NodeSet,
) -> Result<RootedForest, ForestError> {
    let bfs = multi_source_bfs(g, ids, alive, terminals).map_err(|e| match e {
        GraphError::SourceNotAlive(v) => ForestError::TerminalNotAlive(v),
        other => unreachable!("unexpected BFS error {other}"),
    })?;
    let n = g.node_count();
    let mut depth = vec![0; n];
    let mut root_of = vec![usize::MAX; n];
    let mut tree_size = vec![0; n];
    for v in alive.iter() {
        let d = bfs.dist[v].ok_or(ForestError::Unreachable(v))?;
        let r = bfs.origin[v].unwrap();
        depth[v] = d;
        root_of[v] = r;
        tree_size[r] += 1;
    }
    let member = (0..n).map(|v| alive.contains(v)).collect();
    Ok(RootedForest {
        member,
        parent: bfs.parent,
        root_of,
        depth,
        tree_size,
        members: alive.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use proptest::prelude::*;

    fn p3() -> (Graph, IdAssignment) {
        build_graph(3, &[(0, 1), (1, 2)], None).unwrap()
    }

    #[test]
    fn bfs_forest_examples() {
        let (g, ids) = p3();
        let all = NodeSet::full(3);
        let f = bfs_forest(&g, &ids, &all, &NodeSet::from_nodes(3, [0])).unwrap();
        assert_eq!(
            (0..3).map(|v| f.depth(v).unwrap()).collect::<Vec<_>>(),
            [0, 1, 2]
        );
        assert_eq!(f.tree_size(0), 3);

        let f = bfs_forest(&g, &ids, &all, &NodeSet::from_nodes(3, [0, 2])).unwrap();
        assert_eq!(f.parent(1), Some(0));
        assert_eq!(f.tree_size(0), 2);
        assert_eq!(f.tree_size(2), 1);

        let f = bfs_forest(&g, &ids, &all, &all).unwrap();
        assert!((0..3).all(|v| f.is_root(v) && f.depth(v) == Some(0)));
    }

    #[test]
    fn bfs_forest_rejects_unreachable() {
        let (g, ids) = build_graph(3, &[(0, 1)], None).unwrap();
        let err =
            bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0])).unwrap_err();
        assert_eq!(err, ForestError::Unreachable(2));
    }

    #[test]
    fn subtree_examples() {
        let (g, ids) = p3();
        let f = bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0])).unwrap();
        assert_eq!(f.subtree_nodes(1).unwrap(), vec![1, 2]);
        assert_eq!(f.subtree_nodes(2).unwrap(), vec![2]);
        let single = bfs_forest(
            &g,
            &ids,
            &NodeSet::from_nodes(3, [2]),
            &NodeSet::from_nodes(3, [2]),
        )
        .unwrap();
        assert_eq!(single.subtree_nodes(2).unwrap(), vec![2]);
        assert_eq!(single.subtree_nodes(0), Err(ForestError::NotMember(0)));
    }

    #[test]
    fn rehang_singleton_under_root() {
        let (g, ids) = build_graph(2, &[(0, 1)], None).unwrap();
        let f = bfs_forest(&g, &ids, &NodeSet::full(2), &NodeSet::full(2)).unwrap();
        let f = f.rehang_subtree(&g, 1, 0).unwrap();
        assert_eq!(f.depth(1), Some(1));
        assert_eq!(f.tree_size(0), 2);
        assert_eq!(f.tree_size(1), 0);
        f.audit(&g).unwrap();
    }

    #[test]
    fn rehang_chain_recomputes_depths() {
        // Roots w=0 and r=3, chain r <- 1 <- 2. Node 1 sees both roots at
        // distance 1; identifiers make it pick r.
        let (g, _) = build_graph(4, &[(0, 1), (1, 2), (1, 3)], None).unwrap();
        let ids = IdAssignment::new(vec![3, 1, 2, 0], 2).unwrap();
        let f = bfs_forest(&g, &ids, &NodeSet::full(4), &NodeSet::from_nodes(4, [0, 3])).unwrap();
        assert_eq!(f.parent(1), Some(3));
        assert_eq!((f.depth(1), f.depth(2)), (Some(1), Some(2)));
        let f = f.rehang_subtree(&g, 1, 0).unwrap();
        // depth(u) = old(u) - old(b) + depth(w) + 1: b -> 1 - 1 + 0 + 1, c -> 2 - 1 + 0 + 1.
        assert_eq!((f.depth(1), f.depth(2)), (Some(1), Some(2)));
        assert_eq!((f.root_of(1), f.root_of(2)), (Some(0), Some(0)));
        assert_eq!((f.tree_size(0), f.tree_size(3)), (3, 1));
        f.audit(&g).unwrap();
    }

    #[test]
    fn rehang_errors() {
        let (g, ids) = p3();
        let f = bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0])).unwrap();
        assert_eq!(
            f.rehang_subtree(&g, 1, 2),
            Err(ForestError::Cycle {
                v: 1,
                new_parent: 2
            })
        );
        assert_eq!(
            f.rehang_subtree(&g, 2, 0),
            Err(ForestError::NotNeighbor { v: 2, parent: 0 })
        );
        let f = bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0, 2])).unwrap();
        assert_eq!(
            f.rehang_subtree(&g, 1, 0),
            Err(ForestError::SameTree {
                v: 1,
                new_parent: 0
            })
        );
    }

    #[test]
    fn delete_examples() {
        let (g, ids) = p3();
        let f = bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0])).unwrap();
        let leaf = f.delete_subtrees(&[2]).unwrap();
        assert_eq!(leaf.member_count(), 2);
        let chain = f.delete_subtrees(&[1]).unwrap();
        assert_eq!(chain.member_count(), 1);
        assert_eq!(chain.tree_size(0), 1);
        chain.audit(&g).unwrap();
        assert_eq!(f.delete_subtrees(&[]).unwrap(), f);
        assert_eq!(
            f.delete_subtrees(&[1, 2]),
            Err(ForestError::OverlappingSubtrees(2))
        );
    }

    #[test]
    fn audit_catches_forged_depth() {
        let (g, ids) = p3();
        let mut f = bfs_forest(&g, &ids, &NodeSet::full(3), &NodeSet::from_nodes(3, [0])).unwrap();
        f.depth[2] = 5;
        assert!(matches!(
            f.audit(&g),
            Err(ForestError::Audit { node: 2, .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        /// Random rehang and delete sequences keep stored depths consistent
        /// with parent walks, and member counts move by exactly the subtree
        /// sizes involved.
        #[test]
        fn edits_preserve_structure(
            n in 2usize..30,
            raw in prop::collection::vec((0usize..30, 0usize..30), 1..80),
            term_mask in prop::collection::vec(prop::bool::weighted(0.3), 30),
            ops in prop::collection::vec((0usize..30, 0usize..30, prop::bool::ANY), 1..25),
        ) {
            let edges: Vec<_> = raw.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
            let (g, ids) = build_graph(n, &edges, None).unwrap();
            let mut terms: Vec<usize> = (0..n).filter(|&v| term_mask[v]).collect();
            terms.push(0);
            let terms = NodeSet::from_nodes(n, terms);
            // Restrict to the part reachable from the terminals.
            let reach = multi_source_bfs(&g, &ids, &NodeSet::full(n), &terms).unwrap();
            let alive = NodeSet::from_nodes(n, (0..n).filter(|&v| reach.dist[v].is_some()));
            let mut f = bfs_forest(&g, &ids, &alive, &terms).unwrap();
            for (a, c, delete) in ops {
                let (a, c) = (a % n, c % n);
                if !f.is_member(a) {
                    continue;
                }
                let size = f.subtree_nodes(a).unwrap().len();
                let before = f.member_count();
                if delete {
                    f = f.delete_subtrees(&[a]).unwrap();
                    prop_assert_eq!(f.member_count(), before - size);
                } else if let Ok(next) = f.rehang_subtree(&g, a, c) {
                    f = next;
                    prop_assert_eq!(f.member_count(), before);
                }
                f.audit(&g).unwrap();
            }
        }
    }
}
