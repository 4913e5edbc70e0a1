//! Undirected graphs with unique node identifiers, and the BFS, component
//! and diameter primitives that both executors and the verifier build on.

use thiserror::Error;

/// Widest identifier supported. Message payloads are capped at `4b + 16`
/// bits and carried in a 256-bit buffer, which bounds `b` at 60.
pub const MAX_BITS: u32 = 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    NodeOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("expected {expected} identifiers, got {got}")]
    IdCount { expected: usize, got: usize },
    #[error("identifier {id} assigned to both node {first} and node {second}")]
    DuplicateId {
        id: u64,
        first: usize,
        second: usize,
    },
    #[error("identifier {id} does not fit in {b} bits")]
    IdOutOfRange { id: u64, b: u32 },
    #[error("bit width {b} is invalid for {n} nodes (need 2^b >= n and 1 <= b <= {MAX_BITS})")]
    BitWidth { b: u32, n: usize },
    #[error("source node {0} is not in the allowed node set")]
    SourceNotAlive(usize),
    #[error("node set is empty")]
    EmptySet,
}

/// A subset of the nodes `0..n`, stored as a membership bitmap.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NodeSet {
    member: Vec<bool>,
    len: usize,
}

impl NodeSet {
    pub fn empty(n: usize) -> Self {
        NodeSet {
            member: vec![false; n],
            len: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        NodeSet {
            member: vec![true; n],
            len: n,
        }
    }

    /// Builds a set over the universe `0..n`. Indices `>= n` are ignored.
    pub fn from_nodes<I: IntoIterator<Item = usize>>(n: usize, nodes: I) -> Self {
        let mut set = NodeSet::empty(n);
        for v in nodes {
            if v < n {
                set.insert(v);
            }
        }
        set
    }

    /// Size of the universe, not of the set.
    pub fn universe(&self) -> usize {
        self.member.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        if self.member[v] {
            return false;
        }
        self.member[v] = true;
        self.len += 1;
        true
    }

    pub fn remove(&mut self, v: usize) -> bool {
        if !self.member[v] {
            return false;
        }
        self.member[v] = false;
        self.len -= 1;
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet::from_nodes(self.universe(), self.iter().filter(|&v| !other.contains(v)))
    }
}

/// Immutable simple undirected graph on nodes `0..n` with sorted adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph, collapsing duplicate pairs (in either orientation).
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::NodeOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut twice = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Ok(Graph {
            adjacency,
            edge_count: twice / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }
}

/// Unique `b`-bit identifiers, one per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdAssignment {
    b: u32,
    ids: Vec<u64>,
    by_id: Vec<(u64, usize)>,
}

impl IdAssignment {
    /// `max(1, ceil(log2(max(n, 2))))`.
    pub fn default_bits(n: usize) -> u32 {
        let n = n.max(2);
        let b = usize::BITS - (n - 1).leading_zeros();
        b.max(1)
    }

    /// Node `k` gets identifier `k`, with the default width.
    pub fn index(n: usize) -> Self {
        let b = Self::default_bits(n);
        Self::new((0..n as u64).collect(), b).expect("index identifiers are always valid")
    }

    pub fn new(ids: Vec<u64>, b: u32) -> Result<Self, GraphError> {
        let n = ids.len();
        if b == 0 || b > MAX_BITS || (n as u128) > (1u128 << b) {
            return Err(GraphError::BitWidth { b, n });
        }
        if let Some(&id) = ids.iter().find(|&&id| id >> b != 0) {
            return Err(GraphError::IdOutOfRange { id, b });
        }
        let mut by_id: Vec<(u64, usize)> = ids.iter().copied().zip(0..).collect();
        by_id.sort_unstable();
        if let Some(w) = by_id.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(GraphError::DuplicateId {
                id: w[0].0,
                first: w[0].1,
                second: w[1].1,
            });
        }
        Ok(IdAssignment { b, ids, by_id })
    }

    pub fn bits(&self) -> u32 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.ids
    }

    pub fn node_of(&self, id: u64) -> Option<usize> {
        self.by_id
            .binary_search_by_key(&id, |&(i, _)| i)
            .ok()
            .map(|k| self.by_id[k].1)
    }
}

/// Bit `p` of a `b`-bit identifier, counting from the most significant bit.
pub fn id_bit(id: u64, b: u32, p: u32) -> bool {
    debug_assert!(p < b);
    (id >> (b - 1 - p)) & 1 == 1
}

/// Builds a graph and its identifier assignment. Without explicit
/// identifiers node `k` gets identifier `k`; either way the width is the
/// default `max(1, ceil(log2 n))`.
pub fn build_graph(
    n: usize,
    edges: &[(usize, usize)],
    ids: Option<Vec<u64>>,
) -> Result<(Graph, IdAssignment), GraphError> {
    let g = Graph::new(n, edges)?;
    let ids = match ids {
        None => IdAssignment::index(n),
        Some(ids) => {
            if ids.len() != n {
                return Err(GraphError::IdCount {
                    expected: n,
                    got: ids.len(),
                });
            }
            IdAssignment::new(ids, IdAssignment::default_bits(n))?
        }
    };
    Ok((g, ids))
}

/// Result of a multi-source BFS. `None` marks unreachable nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistMap {
    pub dist: Vec<Option<u32>>,
    pub parent: Vec<Option<usize>>,
    pub origin: Vec<Option<usize>>,
}

impl DistMap {
    /// Largest finite distance, or `None` when no node was reached.
    pub fn max_dist(&self) -> Option<u32> {
        self.dist.iter().flatten().copied().max()
    }

    /// The reached node with the largest distance (smallest index on ties).
    pub fn farthest(&self) -> Option<(usize, u32)> {
        let mut best: Option<(usize, u32)> = None;
        for (v, d) in self.dist.iter().enumerate() {
            if let Some(d) = *d {
                if best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((v, d));
                }
            }
        }
        best
    }
}

/// BFS from `sources` inside `G[alive]`. Each reached non-source node picks as
/// parent its neighbor one layer closer with the smallest identifier, and
/// inherits that parent's origin.
pub fn multi_source_bfs(
    g: &Graph,
    ids: &IdAssignment,
    alive: &NodeSet,
    sources: &NodeSet,
) -> Result<DistMap, GraphError> {
    let n = g.node_count();
    if let Some(s) = sources.iter().find(|&s| !alive.contains(s)) {
        return Err(GraphError::SourceNotAlive(s));
    }
    let mut dist = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut origin = vec![None; n];
    let mut frontier: Vec<usize> = sources.iter().collect();
    for &s in &frontier {
        dist[s] = Some(0);
        origin[s] = Some(s);
    }
    let mut d = 0u32;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                if !alive.contains(w) {
                    continue;
                }
                match dist[w] {
                    None => {
                        dist[w] = Some(d + 1);
                        parent[w] = Some(u);
                        next.push(w);
                    }
                    Some(dw) if dw == d + 1 => {
                        let p = parent[w].expect("layered node has a parent");
                        if ids.id(u) < ids.id(p) {
                            parent[w] = Some(u);
                        }
                    }
                    _ => {}
                }
            }
        }
        // Parents of this layer are final now, so origins can be inherited.
        for &w in &next {
            origin[w] = origin[parent[w].unwrap()];
        }
        frontier = next;
        d += 1;
    }
    Ok(DistMap {
        dist,
        parent,
        origin,
    })
}

/// Connected components of `G[alive]`, each sorted, ordered by minimum node.
pub fn connected_components(g: &Graph, alive: &NodeSet) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut stack = Vec::new();
    for start in alive.iter() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut component = Vec::new();
        while let Some(u) = stack.pop() {
            component.push(u);
            for &w in g.neighbors(u) {
                if alive.contains(w) && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diameter {
    Finite(u32),
    Disconnected,
}

impl Diameter {
    pub fn finite(self) -> Option<u32> {
        match self {
            Diameter::Finite(d) => Some(d),
            Diameter::Disconnected => None,
        }
    }
}

/// Diameter of `G[s]`, by BFS from every node of `s`.
pub fn induced_diameter(g: &Graph, s: &NodeSet) -> Result<Diameter, GraphError> {
    if s.is_empty() {
        return Err(GraphError::EmptySet);
    }
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut queue = Vec::with_capacity(s.len());
    let mut diameter = 0;
    for source in s.iter() {
        queue.clear();
        queue.push(source);
        dist[source] = 0;
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head];
            head += 1;
            for &w in g.neighbors(u) {
                if s.contains(w) && dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push(w);
                }
            }
        }
        let reached = queue.len();
        let ecc = dist[*queue.last().unwrap()];
        for &v in &queue {
            dist[v] = u32::MAX;
        }
        if reached != s.len() {
            return Ok(Diameter::Disconnected);
        }
        diameter = diameter.max(ecc);
    }
    Ok(Diameter::Finite(diameter))
}
