//! One phase of the clustering: starting from a BFS forest rooted at the
//! current terminals, `t = 2b²` propose/grow/delete steps separate the
//! terminals whose identifier bit `p` is 0 (red) from those where it is 1
//! (blue).
//!
//! In each step every blue node that is adjacent to a red node, and has no
//! strict ancestor with that property, offers its whole subtree to the red
//! tree of its smallest-identifier red neighbor. A red tree accepts all of
//! its offers when their total size is at least `|T| / 2b`; otherwise every
//! offered subtree is deleted.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forest::{bfs_forest, collect_subtree, ForestError, RootedForest};
use crate::graph::{id_bit, Graph, IdAssignment, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhaseError {
    #[error("phase index {p} out of range for {b}-bit identifiers")]
    PhaseIndex { p: u32, b: u32 },
    #[error("all {0} steps of the phase have already run")]
    StepBudgetExhausted(usize),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// `t = 2b²`.
pub fn steps_per_phase(b: u32) -> usize {
    2 * (b as usize) * (b as usize)
}

/// Ruling radius guaranteed before phase `p` (and after phase `p - 1`): `4b²p`.
pub fn ruling_radius(b: u32, p: u32) -> u64 {
    4 * (b as u64) * (b as u64) * p as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
}

/// Splits terminals by identifier bit `p` (MSB-first): 0 is red, 1 is blue.
pub fn split_terminals(
    ids: &IdAssignment,
    q: &NodeSet,
    p: u32,
) -> Result<(NodeSet, NodeSet), PhaseError> {
    let b = ids.bits();
    if p >= b {
        return Err(PhaseError::PhaseIndex { p, b });
    }
    let (blue, red): (Vec<usize>, Vec<usize>) = q.iter().partition(|&v| id_bit(ids.id(v), b, p));
    let n = q.universe();
    Ok((NodeSet::from_nodes(n, red), NodeSet::from_nodes(n, blue)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub proposer: usize,
    /// Size of the proposer's subtree.
    pub weight: usize,
    pub target_root: usize,
    /// Red neighbor that becomes the proposer's parent on acceptance.
    pub attach_at: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Grow,
    Decline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecision {
    pub root: usize,
    /// Tree size before the step.
    pub size: usize,
    /// Total weight of the proposals it received.
    pub weight: usize,
    pub decision: Decision,
}

/// Grow iff `weight * 2b >= size`, compared exactly in integers. Roots that
/// received no proposal are absent from the map.
pub fn grow_decisions(
    proposals: &[Proposal],
    tree_size: impl Fn(usize) -> usize,
    b: u32,
) -> BTreeMap<usize, TreeDecision> {
    let mut weights: BTreeMap<usize, usize> = BTreeMap::new();
    for p in proposals {
        *weights.entry(p.target_root).or_default() += p.weight;
    }
    weights
        .into_iter()
        .map(|(root, weight)| {
            let size = tree_size(root);
            let grows = weight as u128 * 2 * b as u128 >= size as u128;
            let decision = if grows {
                Decision::Grow
            } else {
                Decision::Decline
            };
            (
                root,
                TreeDecision {
                    root,
                    size,
                    weight,
                    decision,
                },
            )
        })
        .collect()
}

/// A node that changed trees, with its position after the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rehang {
    pub node: usize,
    pub parent: usize,
    pub depth: u32,
    pub root: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deletion {
    pub node: usize,
    /// The red tree whose refusal deleted this node.
    pub blamed_root: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: usize,
    pub proposals: Vec<Proposal>,
    pub decisions: Vec<TreeDecision>,
    /// Every node of an accepted subtree, parents before children.
    pub rehung: Vec<Rehang>,
    pub deleted: Vec<Deletion>,
    pub max_depth: u32,
}

impl StepTrace {
    /// `step j: proposals=[v:w→r,...] grow=[...] decline=[...] deleted=k maxdepth=d`,
    /// with nodes written as identifiers.
    pub fn render(&self, ids: &IdAssignment) -> String {
        let id = |v: usize| ids.id(v);
        let proposals: Vec<String> = self
            .proposals
            .iter()
            .map(|p| format!("{}:{}→{}", id(p.proposer), p.weight, id(p.target_root)))
            .collect();
        let roots = |want: Decision| -> Vec<String> {
            self.decisions
                .iter()
                .filter(|d| d.decision == want)
                .map(|d| id(d.root).to_string())
                .collect()
        };
        format!(
            "step {}: proposals=[{}] grow=[{}] decline=[{}] deleted={} maxdepth={}",
            self.step,
            proposals.join(","),
            roots(Decision::Grow).join(","),
            roots(Decision::Decline).join(","),
            self.deleted.len(),
            self.max_depth
        )
    }
}

/// Forest `F_j` of phase `p` together with what the step rule needs.
#[derive(Clone, Debug)]
pub struct PhaseState {
    phase: u32,
    b: u32,
    step: usize,
    steps: usize,
    forest: RootedForest,
    /// Indexed by node; meaningful for the phase's terminals.
    root_red: Vec<bool>,
    /// `d_0`, depth in the initial BFS forest.
    base_depth: Vec<u32>,
    /// Red trees that declined at some step, with their size at that time.
    declined: BTreeMap<usize, usize>,
}

impl PhaseState {
    pub fn new(
        g: &Graph,
        ids: &IdAssignment,
        alive: &NodeSet,
        terminals: &NodeSet,
        p: u32,
    ) -> Result<Self, PhaseError> {
        let b = ids.bits();
        let (red, _) = split_terminals(ids, terminals, p)?;
        let forest = bfs_forest(g, ids, alive, terminals)?;
        let n = g.node_count();
        let root_red = (0..n).map(|v| red.contains(v)).collect();
        let base_depth = (0..n).map(|v| forest.depth(v).unwrap_or(0)).collect();
        Ok(PhaseState {
            phase: p,
            b,
            step: 0,
            steps: steps_per_phase(b),
            forest,
            root_red,
            base_depth,
            declined: BTreeMap::new(),
        })
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn forest(&self) -> &RootedForest {
        &self.forest
    }

    pub fn color(&self, v: usize) -> Option<Color> {
        let r = self.forest.root_of(v)?;
        Some(if self.root_red[r] {
            Color::Red
        } else {
            Color::Blue
        })
    }

    fn is_red(&self, v: usize) -> bool {
        self.color(v) == Some(Color::Red)
    }

    fn is_blue(&self, v: usize) -> bool {
        self.color(v) == Some(Color::Blue)
    }

    fn proposals(&self, g: &Graph, ids: &IdAssignment, children: &[Vec<usize>]) -> Vec<Proposal> {
        let f = &self.forest;
        let n = g.node_count();
        let mut red_adjacent = vec![false; n];
        for v in f.members().filter(|&v| self.is_blue(v)) {
            red_adjacent[v] = g.neighbors(v).iter().any(|&w| self.is_red(w));
        }

        // blocked[v]: some strict ancestor of v is red-adjacent. Parents are
        // visited before children by walking members in depth order.
        let mut order: Vec<usize> = f.members().collect();
        order.sort_by_key(|&v| f.depth(v));
        let mut blocked = vec![false; n];
        for &v in &order {
            if let Some(p) = f.parent(v) {
                blocked[v] = blocked[p] || red_adjacent[p];
            }
        }

        let mut out: Vec<Proposal> = f
            .members()
            .filter(|&v| red_adjacent[v] && !blocked[v])
            .map(|v| {
                let attach_at = g
                    .neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&w| self.is_red(w))
                    .min_by_key(|&w| ids.id(w))
                    .expect("red-adjacent node has a red neighbor");
                Proposal {
                    proposer: v,
                    weight: collect_subtree(children, v).len(),
                    target_root: f.root_of(attach_at).unwrap(),
                    attach_at,
                }
            })
            .collect();
        out.sort_by_key(|p| ids.id(p.proposer));
        out
    }

    /// Runs one step in place, producing `F_{j+1}` from `F_j`. All decisions
    /// read `F_j` only.
    pub fn advance(&mut self, g: &Graph, ids: &IdAssignment) -> Result<StepTrace, PhaseError> {
        if self.step >= self.steps {
            return Err(PhaseError::StepBudgetExhausted(self.steps));
        }
        let children = self.forest.children();
        let proposals = self.proposals(g, ids, &children);
        let decisions = grow_decisions(&proposals, |r| self.forest.tree_size(r), self.b);

        let mut rehung = Vec::new();
        let mut deleted = Vec::new();
        for p in &proposals {
            let nodes = collect_subtree(&children, p.proposer);
            match decisions[&p.target_root].decision {
                Decision::Grow => {
                    self.forest.rehang_nodes(g, &nodes, p.attach_at)?;
                    rehung.extend(nodes.iter().map(|&u| Rehang {
                        node: u,
                        parent: self.forest.parent(u).unwrap(),
                        depth: self.forest.depth(u).unwrap(),
                        root: p.target_root,
                    }));
                }
                Decision::Decline => {
                    self.forest.remove_nodes(&nodes);
                    deleted.extend(nodes.iter().map(|&u| Deletion {
                        node: u,
                        blamed_root: p.target_root,
                    }));
                }
            }
        }
        for d in decisions.values() {
            if d.decision == Decision::Decline {
                self.declined.insert(d.root, d.size);
            }
        }

        let trace = StepTrace {
            step: self.step,
            proposals,
            decisions: decisions.into_values().collect(),
            rehung,
            deleted,
            max_depth: self.forest.max_depth(),
        };
        self.step += 1;

        if cfg!(debug_assertions) {
            let growth = trace.decisions.iter().find(|d| {
                let after = self.forest.tree_size(d.root) as u128;
                let before = d.size as u128;
                let b2 = 2 * self.b as u128;
                d.decision == Decision::Grow && after * b2 < before * (b2 + 1)
            });
            assert!(
                growth.is_none(),
                "accepted tree grew too little: {growth:?}"
            );
            if let Err(msg) = self.audit(g) {
                panic!("phase {} after step {}: {msg}", self.phase, self.step);
            }
        }
        Ok(trace)
    }

    /// Structural audit of the current forest against the step invariants:
    /// parent-walk consistency, blue depths unchanged since `F_0`, red
    /// depths at most `d_0 + 2j`, and declined red trees frozen with no blue
    /// neighbor.
    pub fn audit(&self, g: &Graph) -> Result<(), String> {
        let f = &self.forest;
        f.audit(g).map_err(|e| e.to_string())?;
        let slack = 2 * self.step as u32;
        for v in f.members() {
            let d = f.depth(v).unwrap();
            let d0 = self.base_depth[v];
            match self.color(v).unwrap() {
                Color::Blue if d != d0 => {
                    return Err(format!("blue node {v} has depth {d}, initially {d0}"));
                }
                Color::Red if d > d0 + slack => {
                    return Err(format!("red node {v} has depth {d} > {d0} + {slack}"));
                }
                _ => {}
            }
        }
        for r in f.roots() {
            if self.base_depth[r] != 0 {
                return Err(format!("root {r} was not a root of F_0"));
            }
        }
        for (&r, &size) in &self.declined {
            if f.tree_size(r) != size {
                return Err(format!(
                    "declined tree {r} changed size {size} -> {}",
                    f.tree_size(r)
                ));
            }
        }
        for v in f.members() {
            if let Some(r) = f.root_of(v).filter(|r| self.declined.contains_key(r)) {
                if let Some(&w) = g.neighbors(v).iter().find(|&&w| self.is_blue(w)) {
                    return Err(format!(
                        "declined tree {r} member {v} borders blue node {w}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Proposals of the current state, sorted by proposer identifier.
pub fn compute_propose_set(g: &Graph, ids: &IdAssignment, st: &PhaseState) -> Vec<Proposal> {
    st.proposals(g, ids, &st.forest.children())
}

/// Value-semantic step: returns `F_{j+1}` and leaves `st` untouched.
pub fn apply_step(
    g: &Graph,
    ids: &IdAssignment,
    st: &PhaseState,
) -> Result<(PhaseState, StepTrace), PhaseError> {
    let mut next = st.clone();
    let trace = next.advance(g, ids)?;
    Ok((next, trace))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseResult {
    pub phase: u32,
    pub b: u32,
    pub alive_in: NodeSet,
    pub terminals_in: NodeSet,
    /// `F_0`; together with the step traces this replays every `F_j`.
    pub initial_forest: RootedForest,
    pub final_forest: RootedForest,
    pub survivors: NodeSet,
    pub terminals_out: NodeSet,
    pub deleted: NodeSet,
    /// Executed steps. Once a step has no proposals the forest is a fixed
    /// point, so the remaining steps of the `t` budget are skipped.
    pub step_traces: Vec<StepTrace>,
}

impl PhaseResult {
    pub fn trace_log(&self, ids: &IdAssignment) -> String {
        let mut out = String::new();
        for s in &self.step_traces {
            writeln!(out, "{}", s.render(ids)).unwrap();
        }
        out
    }
}

pub fn run_phase(
    g: &Graph,
    ids: &IdAssignment,
    alive: &NodeSet,
    terminals: &NodeSet,
    p: u32,
) -> Result<PhaseResult, PhaseError> {
    let mut st = PhaseState::new(g, ids, alive, terminals, p)?;
    let initial_forest = st.forest.clone();
    let mut step_traces = Vec::new();
    while st.step < st.steps {
        let trace = st.advance(g, ids)?;
        let quiet = trace.proposals.is_empty();
        step_traces.push(trace);
        if quiet {
            break;
        }
    }
    let final_forest = st.forest;
    let survivors = final_forest.member_set();
    let terminals_out = NodeSet::from_nodes(g.node_count(), final_forest.roots());
    Ok(PhaseResult {
        phase: p,
        b: ids.bits(),
        alive_in: alive.clone(),
        terminals_in: terminals.clone(),
        deleted: alive.difference(&survivors),
        initial_forest,
        final_forest,
        survivors,
        terminals_out,
        step_traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use proptest::prelude::*;

    fn k2() -> (Graph, IdAssignment) {
        build_graph(2, &[(0, 1)], None).unwrap()
    }

    fn p3() -> (Graph, IdAssignment) {
        build_graph(3, &[(0, 1), (1, 2)], None).unwrap()
    }

    #[test]
    fn split_examples() {
        let ids = IdAssignment::new(vec![0b00, 0b01, 0b10], 2).unwrap();
        let q = NodeSet::full(3);
        let (red, blue) = split_terminals(&ids, &q, 0).unwrap();
        assert_eq!((red.to_vec(), blue.to_vec()), (vec![0, 1], vec![2]));
        let (red, blue) = split_terminals(&ids, &q, 1).unwrap();
        assert_eq!((red.to_vec(), blue.to_vec()), (vec![0, 2], vec![1]));
        let (red, blue) = split_terminals(&ids, &NodeSet::empty(3), 0).unwrap();
        assert!(red.is_empty() && blue.is_empty());
        assert_eq!(
            split_terminals(&ids, &q, 2),
            Err(PhaseError::PhaseIndex { p: 2, b: 2 })
        );
    }

    #[test]
    fn grow_threshold_examples() {
        let offer = |weight| Proposal {
            proposer: 1,
            weight,
            target_root: 0,
            attach_at: 0,
        };
        let decide = |size, weight, b| grow_decisions(&[offer(weight)], |_| size, b)[&0].decision;
        assert_eq!(decide(4, 1, 2), Decision::Grow);
        assert_eq!(decide(5, 1, 2), Decision::Decline);
        assert_eq!(decide(1, 1, 1), Decision::Grow);
        assert!(grow_decisions(&[], |_| 1, 1).is_empty());
    }

    #[test]
    fn propose_set_on_p3_second_phase() {
        // Phase 1 state of the P3 run: red root 0, blue tree 1 <- 2.
        let (g, ids) = p3();
        let st = PhaseState::new(
            &g,
            &ids,
            &NodeSet::full(3),
            &NodeSet::from_nodes(3, [0, 1]),
            1,
        )
        .unwrap();
        assert_eq!(st.forest().parent(2), Some(1));
        let props = compute_propose_set(&g, &ids, &st);
        assert_eq!(
            props,
            vec![Proposal {
                proposer: 1,
                weight: 2,
                target_root: 0,
                attach_at: 0
            }]
        );
    }

    #[test]
    fn only_topmost_red_adjacent_node_proposes() {
        // Blue chain 3 <- 4 <- 5 beside red chain 0 <- 1 <- 2; 4 touches 1
        // and 5 touches 2. b = 3: ids 0..=3 are red, 4.. blue.
        let edges = [(3, 4), (4, 5), (1, 4), (2, 5), (0, 1), (1, 2)];
        let ids = IdAssignment::new(vec![0, 1, 2, 4, 5, 6], 3).unwrap();
        let (g, _) = build_graph(6, &edges, None).unwrap();
        let st = PhaseState::new(
            &g,
            &ids,
            &NodeSet::full(6),
            &NodeSet::from_nodes(6, [0, 3]),
            0,
        )
        .unwrap();
        assert_eq!(st.forest().parent(4), Some(3));
        assert_eq!(st.forest().root_of(5), Some(3));
        let props = compute_propose_set(&g, &ids, &st);
        assert_eq!(props.len(), 1);
        assert_eq!(
            (props[0].proposer, props[0].weight, props[0].attach_at),
            (4, 2, 1)
        );
    }

    #[test]
    fn no_red_neighbors_means_no_proposals() {
        let (g, ids) = build_graph(4, &[(0, 1), (2, 3)], None).unwrap();
        // b = 2, phase 0: 0, 1 red; 2, 3 blue; components never touch.
        let st = PhaseState::new(&g, &ids, &NodeSet::full(4), &NodeSet::full(4), 0).unwrap();
        assert!(compute_propose_set(&g, &ids, &st).is_empty());
        let (next, trace) = apply_step(&g, &ids, &st).unwrap();
        assert_eq!(next.forest(), st.forest());
        assert!(trace.deleted.is_empty());
    }

    #[test]
    fn k2_step_grows_red_tree() {
        let (g, ids) = k2();
        let st = PhaseState::new(&g, &ids, &NodeSet::full(2), &NodeSet::full(2), 0).unwrap();
        let (next, trace) = apply_step(&g, &ids, &st).unwrap();
        assert_eq!(
            trace.proposals,
            vec![Proposal {
                proposer: 1,
                weight: 1,
                target_root: 0,
                attach_at: 0
            }]
        );
        assert_eq!(trace.decisions[0].decision, Decision::Grow);
        assert_eq!(next.forest().parent(1), Some(0));
        assert_eq!(next.forest().roots(), vec![0]);
        assert_eq!(next.step(), 1);
    }

    #[test]
    fn declined_proposal_deletes_subtree() {
        // Red star of 7 around node 0 plus a blue terminal 5 hanging off
        // leaf 4. b = 3, so the lone weight-1 offer fails 1 * 6 >= 7.
        let edges = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 6), (0, 7), (4, 5)];
        let (g, _) = build_graph(8, &edges, None).unwrap();
        let ids = IdAssignment::new(vec![0, 1, 2, 3, 5, 4, 6, 7], 3).unwrap();
        let terminals = NodeSet::from_nodes(8, [0, 5]);
        let st = PhaseState::new(&g, &ids, &NodeSet::full(8), &terminals, 0).unwrap();
        assert_eq!(st.forest().tree_size(0), 7);
        assert_eq!(st.color(5), Some(Color::Blue));
        let (next, trace) = apply_step(&g, &ids, &st).unwrap();
        assert_eq!(trace.decisions.len(), 1);
        assert_eq!(trace.decisions[0].decision, Decision::Decline);
        assert_eq!(
            trace.deleted,
            vec![Deletion {
                node: 5,
                blamed_root: 0
            }]
        );
        assert!(!next.forest().is_member(5));
        assert_eq!(next.forest().tree_size(0), 7);
    }

    #[test]
    fn step_budget_is_enforced() {
        let (g, ids) = k2();
        let mut st = PhaseState::new(&g, &ids, &NodeSet::full(2), &NodeSet::full(2), 0).unwrap();
        for _ in 0..steps_per_phase(1) {
            st.advance(&g, &ids).unwrap();
        }
        assert_eq!(
            st.advance(&g, &ids),
            Err(PhaseError::StepBudgetExhausted(2))
        );
    }

    #[test]
    fn run_phase_k2() {
        let (g, ids) = k2();
        let r = run_phase(&g, &ids, &NodeSet::full(2), &NodeSet::full(2), 0).unwrap();
        assert_eq!(r.survivors.to_vec(), vec![0, 1]);
        assert_eq!(r.terminals_out.to_vec(), vec![0]);
        assert!(r.deleted.is_empty());
    }

    #[test]
    fn run_phase_p3_first_phase() {
        let (g, ids) = p3();
        let r = run_phase(&g, &ids, &NodeSet::full(3), &NodeSet::full(3), 0).unwrap();
        assert_eq!(r.terminals_out.to_vec(), vec![0, 1]);
        assert_eq!(r.final_forest.parent(2), Some(1));
        assert!(r.deleted.is_empty());
    }

    #[test]
    fn all_red_terminals_leave_forest_untouched() {
        // b = 3, every identifier < 4: all red in phase 0.
        let (g, _) = build_graph(3, &[(0, 1), (1, 2)], None).unwrap();
        let ids = IdAssignment::new(vec![0, 1, 2], 3).unwrap();
        let q = NodeSet::full(3);
        let r = run_phase(&g, &ids, &q, &q, 0).unwrap();
        assert_eq!(r.terminals_out, q);
        assert_eq!(r.final_forest, r.initial_forest);
    }

    #[test]
    fn run_phase_rejects_bad_preconditions() {
        let (g, ids) = build_graph(3, &[(0, 1)], None).unwrap();
        let all = NodeSet::full(3);
        assert_eq!(
            run_phase(&g, &ids, &all, &NodeSet::from_nodes(3, [0]), 0).unwrap_err(),
            PhaseError::Forest(ForestError::Unreachable(2))
        );
        assert_eq!(
            run_phase(
                &g,
                &ids,
                &NodeSet::from_nodes(3, [1]),
                &NodeSet::from_nodes(3, [0]),
                0
            )
            .unwrap_err(),
            PhaseError::Forest(ForestError::TerminalNotAlive(0))
        );
    }

    #[test]
    fn trace_line_format() {
        let (g, ids) = k2();
        let r = run_phase(&g, &ids, &NodeSet::full(2), &NodeSet::full(2), 0).unwrap();
        assert_eq!(
            r.trace_log(&ids),
            "step 0: proposals=[1:1→0] grow=[0] decline=[] deleted=0 maxdepth=1\n\
             step 1: proposals=[] grow=[] decline=[] deleted=0 maxdepth=1\n"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        /// Offered subtrees are disjoint and cover exactly the blue nodes
        /// that have a red neighbor or a red-adjacent ancestor.
        #[test]
        fn proposer_subtrees_partition_red_adjacent_blue_nodes(
            n in 2usize..40,
            raw in prop::collection::vec((0usize..40, 0usize..40), 1..120),
            seed in 0u64..1000,
            steps in 0usize..4,
        ) {
            let edges: Vec<_> = raw.into_iter().filter(|&(u, v)| u < n && v < n && u != v).collect();
            let (g, _) = build_graph(n, &edges, None).unwrap();
            let b = IdAssignment::default_bits(n);
            // Simple seeded permutation of identifiers.
            let mut idv: Vec<u64> = (0..n as u64).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idv.swap(i, (s >> 33) as usize % (i + 1));
            }
            let ids = IdAssignment::new(idv, b).unwrap();
            let all = NodeSet::full(n);
            let mut st = PhaseState::new(&g, &ids, &all, &all, (seed % b as u64) as u32).unwrap();
            for _ in 0..steps {
                if st.step() < st.steps() {
                    st.advance(&g, &ids).unwrap();
                }
            }
            let f = st.forest();
            let children = f.children();
            let props = compute_propose_set(&g, &ids, &st);
            let mut owner = vec![None; n];
            for p in &props {
                for u in collect_subtree(&children, p.proposer) {
                    prop_assert!(owner[u].is_none(), "node {} in two offered subtrees", u);
                    owner[u] = Some(p.proposer);
                }
                prop_assert!(st.is_red(p.attach_at) && g.has_edge(p.proposer, p.attach_at));
            }
            for v in f.members().filter(|&v| st.is_blue(v)) {
                if g.neighbors(v).iter().any(|&w| st.is_red(w)) {
                    prop_assert!(owner[v].is_some(), "red-adjacent blue node {} not offered", v);
                }
            }
        }
    }
}
