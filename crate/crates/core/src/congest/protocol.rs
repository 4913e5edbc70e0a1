//! The clustering algorithm as a per-node program.
//!
//! Each phase is one BFS stage followed by `t = 2b²` steps of eight stages:
//!
//! | stage | rounds | traffic |
//! |-------|--------|---------|
//! | A | 1   | identifier, color and "you are my parent" bit to every neighbor |
//! | B | `L` | blocked flags downward in blue trees |
//! | C | `L` | subtree sizes upward inside proposer subtrees |
//! | D | 1   | proposal weight to the smallest-identifier red neighbor |
//! | E | `L` | (tree size, proposal weight) upward in red trees |
//! | F | `L` | grow/decline downward from red roots |
//! | G | 1   | outcome to each proposer |
//! | H | `L` | outcome downward through proposer subtrees |
//!
//! `L = 4b²(p+1) + 1` exceeds every tree depth the phase can reach, so fixed
//! stage lengths suffice and the round count is known in advance.
//! Convergecasts are echo style: a node reports once, after all children
//! have. Nodes deleted in H fall silent; neighbors notice in the next A.

use std::collections::BTreeMap;

use super::message::{Message, Payload, Tag};
use super::network::{Network, NodeProgram, ProtocolError, RoundStats, SimConfig, Transcript};
use crate::clustering::Clustering;
use crate::forest::RootedForest;
use crate::graph::{id_bit, Graph, IdAssignment, NodeSet};
use crate::phase::{steps_per_phase, PhaseResult};

/// Length of every multi-round stage of phase `p`.
pub fn stage_length(b: u32, p: u32) -> u64 {
    4 * (b as u64).pow(2) * (p as u64 + 1) + 1
}

/// Exact number of rounds the protocol takes: `Σ_p [L_p + t(3 + 5 L_p)]`.
pub fn round_budget(n: usize, b: u32) -> u64 {
    debug_assert!(n <= 1 || (b < 64 && (n as u64) <= 1u64 << b));
    let t = steps_per_phase(b) as u64;
    (0..b)
        .map(|p| {
            let l = stage_length(b, p);
            l + t * (3 + 5 * l)
        })
        .sum()
}

/// Upper bound on `round_budget / b⁶` observed from `n = 16` upward; the
/// ratio falls slowly toward 20 as `b` grows.
pub const ROUNDS_PER_B6_BOUND: f64 = 32.0;

/// Width of the depth field; depths never exceed `4b³`.
fn depth_bits(b: u32) -> u32 {
    let max = 4 * (b as u64).pow(3);
    64 - max.leading_zeros()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    Bfs,
    ColorExchange,
    AncestorFlags,
    SubtreeSizes,
    Propose,
    RedAggregate,
    DecisionBroadcast,
    Notify,
    OutcomeDowncast,
}

impl StageKind {
    const STEP: [StageKind; 8] = [
        StageKind::ColorExchange,
        StageKind::AncestorFlags,
        StageKind::SubtreeSizes,
        StageKind::Propose,
        StageKind::RedAggregate,
        StageKind::DecisionBroadcast,
        StageKind::Notify,
        StageKind::OutcomeDowncast,
    ];

    fn is_single_round(self) -> bool {
        matches!(
            self,
            StageKind::ColorExchange | StageKind::Propose | StageKind::Notify
        )
    }

    fn label(self) -> &'static str {
        match self {
            StageKind::Bfs => "bfs",
            StageKind::ColorExchange => "A",
            StageKind::AncestorFlags => "B",
            StageKind::SubtreeSizes => "C",
            StageKind::Propose => "D",
            StageKind::RedAggregate => "E",
            StageKind::DecisionBroadcast => "F",
            StageKind::Notify => "G",
            StageKind::OutcomeDowncast => "H",
        }
    }
}

/// What every node knows about the current stage: the global schedule
/// position and `b`.
#[derive(Clone, Copy, Debug)]
pub struct StageCtx {
    pub phase: u32,
    pub kind: StageKind,
    pub b: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    Accept,
    Decline,
}

/// Local state of one node. Neighbors and children are port numbers.
#[derive(Clone, Debug)]
pub struct ClusterNode {
    id: u64,
    degree: usize,
    alive: bool,
    parent: Option<usize>,
    root_id: u64,
    depth: u32,
    red: bool,
    reached: bool,

    // Per step.
    nbr: Vec<Option<(u64, bool)>>,
    children: Vec<usize>,
    red_adjacent: bool,
    blocked: bool,
    awaiting: usize,
    size: u64,
    weight: u64,
    attach: Option<usize>,
    proposals: Vec<usize>,
    grow: Option<bool>,
    outcome: Option<Outcome>,
    fault: Option<String>,
    pending: bool,
}

impl ClusterNode {
    pub fn new(id: u64, degree: usize, alive: bool) -> Self {
        ClusterNode {
            id,
            degree,
            alive,
            parent: None,
            root_id: id,
            depth: 0,
            red: false,
            reached: false,
            nbr: vec![None; degree],
            children: Vec::new(),
            red_adjacent: false,
            blocked: false,
            awaiting: 0,
            size: 0,
            weight: 0,
            attach: None,
            proposals: Vec::new(),
            grow: None,
            outcome: None,
            fault: None,
            pending: false,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn parent_port(&self) -> Option<usize> {
        self.parent
    }

    pub fn root_id(&self) -> u64 {
        self.root_id
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn blue(&self) -> bool {
        !self.red
    }

    /// Member of some proposer's subtree.
    fn offered(&self) -> bool {
        self.blue() && (self.red_adjacent || self.blocked)
    }

    fn proposer(&self) -> bool {
        self.blue() && self.red_adjacent && !self.blocked
    }

    fn decide(&mut self, b: u32) {
        if self.weight > 0 {
            self.grow = Some(self.weight * 2 * b as u64 >= self.size);
        }
    }

    /// Accept carries the sender's root and depth; the receiver hangs below it.
    fn outcome_payload(&mut self, outcome: Outcome, b: u32) -> Option<Payload> {
        let mut p = Payload::default();
        if outcome == Outcome::Decline {
            p.push_bool(false);
            return Some(p);
        }
        if self.depth as u64 >= 1 << depth_bits(b) {
            self.fault = Some(format!("depth {} exceeds the depth field", self.depth));
            return None;
        }
        p.push_bool(true)
            .push(self.root_id, b)
            .push(self.depth as u64, depth_bits(b));
        Some(p)
    }

    fn read_outcome(&mut self, msg: &Message, b: u32) {
        let mut r = msg.payload.reader();
        if r.read_bool() {
            self.root_id = r.read(b);
            self.depth = r.read(depth_bits(b)) as u32 + 1;
            self.outcome = Some(Outcome::Accept);
        } else {
            self.outcome = Some(Outcome::Decline);
        }
    }
}

impl NodeProgram for ClusterNode {
    type Stage = StageCtx;

    fn begin_stage(&mut self, s: &StageCtx) -> bool {
        self.pending = false;
        if !self.alive {
            return false;
        }
        match s.kind {
            StageKind::Bfs => {
                if self.parent.is_none() {
                    self.reached = true;
                    self.root_id = self.id;
                    self.depth = 0;
                    self.pending = true;
                } else {
                    self.reached = false;
                    self.parent = None;
                }
            }
            StageKind::ColorExchange => {
                self.red = !id_bit(self.root_id, s.b, s.phase);
                self.nbr.iter_mut().for_each(|x| *x = None);
                self.children.clear();
                self.red_adjacent = false;
                self.blocked = false;
                self.size = 0;
                self.weight = 0;
                self.attach = None;
                self.proposals.clear();
                self.grow = None;
                self.outcome = None;
                self.pending = true;
            }
            StageKind::AncestorFlags => {
                self.pending = self.blue() && self.red_adjacent && !self.children.is_empty();
            }
            StageKind::SubtreeSizes => {
                if self.offered() {
                    self.awaiting = self.children.len();
                    self.size = 1;
                    self.pending = self.awaiting == 0 && !self.proposer();
                }
            }
            StageKind::Propose => {
                if self.proposer() {
                    self.attach = (0..self.degree)
                        .filter_map(|port| match self.nbr[port] {
                            Some((id, true)) => Some((id, port)),
                            _ => None,
                        })
                        .min()
                        .map(|(_, port)| port);
                    self.pending = true;
                }
            }
            StageKind::RedAggregate => {
                if self.red {
                    self.awaiting = self.children.len();
                    self.size = 1;
                    if self.awaiting == 0 {
                        if self.parent.is_some() {
                            self.pending = true;
                        } else {
                            self.decide(s.b);
                        }
                    }
                }
            }
            StageKind::DecisionBroadcast => {
                self.pending = self.red
                    && self.parent.is_none()
                    && self.grow.is_some()
                    && !self.children.is_empty();
            }
            StageKind::Notify => {
                self.pending = self.red && !self.proposals.is_empty();
            }
            StageKind::OutcomeDowncast => {
                self.pending =
                    self.proposer() && self.outcome.is_some() && !self.children.is_empty();
            }
        }
        self.pending
    }

    fn send(&mut self, s: &StageCtx, _round: u64, out: &mut Vec<(usize, Message)>) {
        if !std::mem::take(&mut self.pending) {
            return;
        }
        let b = s.b;
        let count_bits = b + 1;
        match s.kind {
            StageKind::Bfs => {
                let mut p = Payload::default();
                p.push(self.id, b).push(self.root_id, b);
                out.extend((0..self.degree).map(|port| (port, Message::new(Tag::BfsToken, p))));
            }
            StageKind::ColorExchange => {
                for port in 0..self.degree {
                    let mut p = Payload::default();
                    p.push(self.id, b)
                        .push_bool(self.red)
                        .push_bool(self.parent == Some(port));
                    out.push((port, Message::new(Tag::Color, p)));
                }
            }
            StageKind::AncestorFlags => {
                let mut p = Payload::default();
                p.push_bool(true);
                out.extend(
                    self.children
                        .iter()
                        .map(|&c| (c, Message::new(Tag::AncestorFlag, p))),
                );
            }
            StageKind::SubtreeSizes => {
                let mut p = Payload::default();
                p.push(self.size, count_bits);
                out.push((self.parent.unwrap(), Message::new(Tag::SizePartial, p)));
            }
            StageKind::Propose => {
                let mut p = Payload::default();
                p.push(self.size, count_bits);
                out.push((self.attach.unwrap(), Message::new(Tag::Propose, p)));
            }
            StageKind::RedAggregate => {
                let mut p = Payload::default();
                p.push(self.size, count_bits).push(self.weight, count_bits);
                out.push((self.parent.unwrap(), Message::new(Tag::SizePartial, p)));
            }
            StageKind::DecisionBroadcast => {
                let mut p = Payload::default();
                p.push_bool(self.grow.unwrap());
                out.extend(
                    self.children
                        .iter()
                        .map(|&c| (c, Message::new(Tag::Decision, p))),
                );
            }
            StageKind::Notify => {
                let outcome = if self.grow == Some(true) {
                    Outcome::Accept
                } else {
                    Outcome::Decline
                };
                if let Some(p) = self.outcome_payload(outcome, b) {
                    out.extend(
                        self.proposals
                            .iter()
                            .map(|&port| (port, Message::new(Tag::Outcome, p))),
                    );
                }
            }
            StageKind::OutcomeDowncast => {
                let outcome = self.outcome.unwrap();
                if let Some(p) = self.outcome_payload(outcome, b) {
                    out.extend(
                        self.children
                            .iter()
                            .map(|&c| (c, Message::new(Tag::Outcome, p))),
                    );
                }
            }
        }
    }

    fn receive(&mut self, s: &StageCtx, round: u64, inbox: &[(usize, Message)]) -> bool {
        if !self.alive || inbox.is_empty() {
            return self.pending;
        }
        let b = s.b;
        match s.kind {
            StageKind::Bfs => {
                if !self.reached {
                    let (port, root) = inbox
                        .iter()
                        .map(|(port, m)| {
                            let mut r = m.payload.reader();
                            (r.read(b), *port, r.read(b))
                        })
                        .min()
                        .map(|(_, port, root)| (port, root))
                        .unwrap();
                    self.reached = true;
                    self.parent = Some(port);
                    self.root_id = root;
                    self.depth = round as u32;
                    self.pending = true;
                }
            }
            StageKind::ColorExchange => {
                for (port, m) in inbox {
                    let mut r = m.payload.reader();
                    let id = r.read(b);
                    let red = r.read_bool();
                    if r.read_bool() {
                        self.children.push(*port);
                    }
                    self.nbr[*port] = Some((id, red));
                }
                self.red_adjacent =
                    self.blue() && self.nbr.iter().any(|x| matches!(x, Some((_, true))));
            }
            StageKind::AncestorFlags => {
                if self.blue() && inbox.iter().any(|(port, _)| Some(*port) == self.parent) {
                    self.blocked = true;
                    self.pending = !self.red_adjacent && !self.children.is_empty();
                }
            }
            StageKind::SubtreeSizes => {
                if self.offered() {
                    for (_, m) in inbox {
                        self.size += m.payload.reader().read(b + 1);
                        self.awaiting -= 1;
                    }
                    self.pending = self.awaiting == 0 && !self.proposer();
                }
            }
            StageKind::Propose => {
                if self.red {
                    for (port, m) in inbox {
                        self.weight += m.payload.reader().read(b + 1);
                        self.proposals.push(*port);
                    }
                }
            }
            StageKind::RedAggregate => {
                if self.red {
                    for (_, m) in inbox {
                        let mut r = m.payload.reader();
                        self.size += r.read(b + 1);
                        self.weight += r.read(b + 1);
                        self.awaiting -= 1;
                    }
                    if self.awaiting == 0 {
                        if self.parent.is_some() {
                            self.pending = true;
                        } else {
                            self.decide(b);
                        }
                    }
                }
            }
            StageKind::DecisionBroadcast => {
                if let Some((_, m)) = inbox.iter().find(|(port, _)| Some(*port) == self.parent) {
                    if self.red {
                        self.grow = Some(m.payload.reader().read_bool());
                        self.pending = !self.children.is_empty();
                    }
                }
            }
            StageKind::Notify => {
                if self.proposer() {
                    if let Some((_, m)) = inbox.iter().find(|(port, _)| Some(*port) == self.attach)
                    {
                        self.read_outcome(m, b);
                        if self.outcome == Some(Outcome::Accept) {
                            self.parent = self.attach;
                        }
                    }
                }
            }
            StageKind::OutcomeDowncast => {
                if self.offered() && !self.proposer() {
                    if let Some((_, m)) = inbox.iter().find(|(port, _)| Some(*port) == self.parent)
                    {
                        self.read_outcome(m, b);
                        self.pending = !self.children.is_empty();
                    }
                }
            }
        }
        self.pending
    }

    fn end_stage(&mut self, s: &StageCtx) -> Result<(), String> {
        if let Some(f) = self.fault.take() {
            return Err(f);
        }
        if !self.alive {
            return Ok(());
        }
        match s.kind {
            StageKind::Bfs if !self.reached => Err("not reached by the BFS stage".into()),
            StageKind::SubtreeSizes if self.offered() && self.awaiting != 0 => {
                Err(format!("{} subtree reports missing", self.awaiting))
            }
            StageKind::RedAggregate if self.red && self.awaiting != 0 => {
                Err(format!("{} red subtree reports missing", self.awaiting))
            }
            StageKind::DecisionBroadcast
                if self.red && !self.proposals.is_empty() && self.grow.is_none() =>
            {
                Err("no decision reached a node holding proposals".into())
            }
            StageKind::OutcomeDowncast => {
                if self.offered() {
                    match self.outcome {
                        None => return Err("no outcome reached a proposed node".into()),
                        Some(Outcome::Decline) => self.alive = false,
                        Some(Outcome::Accept) => {}
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Everything a simulated run produces.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub clustering: Clustering,
    pub stats: RoundStats,
    /// Per-phase forests and node sets observed in the simulator; step
    /// traces are not recorded.
    pub phases: Vec<PhaseResult>,
    pub transcript: Transcript,
}

fn snapshot(g: &Graph, net: &Network<ClusterNode>) -> RootedForest {
    let n = g.node_count();
    let member: Vec<bool> = net.programs().map(|x| x.is_alive()).collect();
    let parent = (0..n)
        .map(|v| {
            let x = net.program(v);
            x.parent_port()
                .filter(|_| x.is_alive())
                .map(|port| g.neighbors(v)[port])
        })
        .collect();
    let depth = net
        .programs()
        .map(|x| if x.is_alive() { x.depth() } else { 0 })
        .collect();
    RootedForest::from_parts(member, parent, depth).expect("simulated parent links form a forest")
}

/// Runs the protocol on all of `g`.
pub fn run_protocol(g: &Graph, ids: &IdAssignment) -> Result<ProtocolRun, ProtocolError> {
    run_protocol_on(
        g,
        ids,
        &NodeSet::full(g.node_count()),
        &SimConfig::default(),
    )
}

/// Runs the protocol on `G[alive]`; nodes outside `alive` start dead.
pub fn run_protocol_on(
    g: &Graph,
    ids: &IdAssignment,
    alive: &NodeSet,
    config: &SimConfig,
) -> Result<ProtocolRun, ProtocolError> {
    let n = g.node_count();
    let b = ids.bits();
    let programs = (0..n)
        .map(|v| ClusterNode::new(ids.id(v), g.degree(v), alive.contains(v)))
        .collect();
    let mut net = Network::new(g, b, programs, *config);
    let t = steps_per_phase(b);
    let mut phases = Vec::with_capacity(b as usize);
    let mut alive_in = alive.clone();
    let mut terminals_in = alive.clone();

    for p in 0..b {
        let l = stage_length(b, p);
        let ctx = |kind| StageCtx { phase: p, kind, b };
        net.run_stage(&ctx(StageKind::Bfs), l, &format!("phase {p} bfs"))?;
        let initial_forest = snapshot(g, &net);
        for j in 0..t {
            for kind in StageKind::STEP {
                let len = if kind.is_single_round() { 1 } else { l };
                net.run_stage(
                    &ctx(kind),
                    len,
                    &format!("phase {p} step {j} stage {}", kind.label()),
                )?;
            }
        }
        let final_forest = snapshot(g, &net);
        let survivors = final_forest.member_set();
        let terminals_out = NodeSet::from_nodes(n, final_forest.roots());
        phases.push(PhaseResult {
            phase: p,
            b,
            deleted: alive_in.difference(&survivors),
            alive_in,
            terminals_in,
            initial_forest,
            final_forest,
            survivors: survivors.clone(),
            terminals_out: terminals_out.clone(),
            step_traces: Vec::new(),
        });
        alive_in = survivors;
        terminals_in = terminals_out;
    }

    // Group survivors by the root identifier they hold.
    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in alive_in.iter() {
        let root = ids
            .node_of(net.program(v).root_id())
            .expect("root identifier belongs to a node");
        by_root.entry(root).or_default().push(v);
    }
    let clustering = Clustering::from_groups(n, b, alive, by_root.into_iter().collect());
    let stats = net.stats();
    Ok(ProtocolRun {
        clustering,
        stats,
        phases,
        transcript: net.into_transcript(),
    })
}
