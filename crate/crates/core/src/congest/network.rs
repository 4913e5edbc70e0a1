//! Synchronous message-passing network.
//!
//! Every round has a send half and a receive half separated by a barrier:
//! all messages of round `r` are delivered before any node processes its
//! inbox. Nodes address neighbors by port, the index of the neighbor in the
//! node's sorted adjacency list, and see nothing beyond their own state and
//! inbox.
//!
//! Programs are reactive within a stage: a node only sends in a round if its
//! previous `begin_stage`/`receive` call reported pending output. When no
//! node is pending, every remaining round of the stage is silent, so the
//! simulator counts those rounds without executing them.

use std::fmt::Write as _;

use thiserror::Error;

use super::message::{validate_message, Message, Tag};
use crate::exec::{self, Execution};
use crate::graph::Graph;

/// Below this many active nodes a round runs sequentially even in parallel
/// mode.
const PARALLEL_MIN_ACTIVE: usize = 512;

pub trait NodeProgram: Send + Sync {
    type Stage: Sync;

    /// Local bookkeeping at the start of a stage. Returns whether the node
    /// will send in the stage's first round.
    fn begin_stage(&mut self, stage: &Self::Stage) -> bool;

    /// Pushes this round's messages as `(port, message)`. Must push nothing
    /// unless the last `begin_stage`/`receive` returned `true`.
    fn send(&mut self, stage: &Self::Stage, round: u64, out: &mut Vec<(usize, Message)>);

    /// Processes this round's inbox, sorted by port. Returns whether the node
    /// will send next round. An empty inbox must leave the state unchanged.
    fn receive(&mut self, stage: &Self::Stage, round: u64, inbox: &[(usize, Message)]) -> bool;

    /// Local bookkeeping after the last round of a stage; an error means the
    /// stage was too short for this node.
    fn end_stage(&mut self, stage: &Self::Stage) -> Result<(), String>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub exec: Execution,
    /// Skip the silent tail of each stage. Turning this off executes every
    /// round and must give identical results.
    pub fast_forward: bool,
    pub log_messages: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            exec: Execution::default(),
            fast_forward: true,
            log_messages: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub rounds: u64,
    pub max_message_bits: usize,
    pub messages_total: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u64,
    pub messages: u64,
    pub bits_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoggedMessage {
    pub round: u64,
    pub from: usize,
    pub to: usize,
    pub tag: Tag,
    pub bits: usize,
}

/// Rounds that carried traffic (silent rounds are implied by the gaps), and
/// optionally every message.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
    pub messages: Vec<LoggedMessage>,
}

impl Transcript {
    /// One line per round with traffic, `round r: msgs=k bits_max=x`, with
    /// runs of silent rounds collapsed into `rounds a-b: msgs=0`.
    pub fn render_rounds(&self, total_rounds: u64) -> String {
        let mut out = String::new();
        let mut next = 1;
        let silent = |out: &mut String, from: u64, to: u64| match to - from {
            0 => writeln!(out, "round {from}: msgs=0 bits_max=0").unwrap(),
            _ => writeln!(out, "rounds {from}-{to}: msgs=0 bits_max=0").unwrap(),
        };
        for r in &self.rounds {
            if r.round > next {
                silent(&mut out, next, r.round - 1);
            }
            writeln!(
                out,
                "round {}: msgs={} bits_max={}",
                r.round, r.messages, r.bits_max
            )
            .unwrap();
            next = r.round + 1;
        }
        if total_rounds >= next {
            silent(&mut out, next, total_rounds);
        }
        out
    }

    pub fn render_messages(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            writeln!(out, "{} {}->{} {} {}", m.round, m.from, m.to, m.tag, m.bits).unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("round {round}: {tag} message from node {from} has {bits} bits, limit {limit}")]
    BudgetExceeded {
        round: u64,
        from: usize,
        tag: Tag,
        bits: usize,
        limit: usize,
    },
    #[error("round {round}: node {node} sent on port {port}, degree {degree}")]
    BadPort {
        round: u64,
        node: usize,
        port: usize,
        degree: usize,
    },
    #[error("round {round}: node {node} sent twice on port {port}")]
    DuplicatePort {
        round: u64,
        node: usize,
        port: usize,
    },
    #[error("node {node} failed in {stage}: {msg}")]
    NodeFault {
        node: usize,
        stage: String,
        msg: String,
    },
}

struct Slot<P> {
    program: P,
    outbox: Vec<(usize, Message)>,
    inbox: Vec<(usize, Message)>,
    pending: bool,
    active: bool,
}

pub struct Network<P: NodeProgram> {
    /// `ports[u][i] = (w, j)`: port `i` of `u` leads to `w`, where it is port `j`.
    ports: Vec<Vec<(usize, usize)>>,
    slots: Vec<Slot<P>>,
    b: u32,
    config: SimConfig,
    stats: RoundStats,
    transcript: Transcript,
}

impl<P: NodeProgram> Network<P> {
    pub fn new(g: &Graph, b: u32, programs: Vec<P>, config: SimConfig) -> Self {
        assert_eq!(programs.len(), g.node_count());
        let ports = (0..g.node_count())
            .map(|u| {
                g.neighbors(u)
                    .iter()
                    .map(|&w| (w, g.neighbors(w).binary_search(&u).unwrap()))
                    .collect()
            })
            .collect();
        let slots = programs
            .into_iter()
            .map(|program| Slot {
                program,
                outbox: Vec::new(),
                inbox: Vec::new(),
                pending: false,
                active: false,
            })
            .collect();
        Network {
            ports,
            slots,
            b,
            config,
            stats: RoundStats::default(),
            transcript: Transcript::default(),
        }
    }

    pub fn programs(&self) -> impl ExactSizeIterator<Item = &P> + '_ {
        self.slots.iter().map(|s| &s.program)
    }

    pub fn program(&self, v: usize) -> &P {
        &self.slots[v].program
    }

    pub fn stats(&self) -> RoundStats {
        self.stats
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Runs `f` on the listed slots, in parallel when there are enough.
    fn run_on<F>(&mut self, list: &[usize], f: F)
    where
        F: Fn(&mut Slot<P>) + Sync + Send,
    {
        if self.config.exec.is_parallel() && list.len() >= PARALLEL_MIN_ACTIVE {
            for &i in list {
                self.slots[i].active = true;
            }
            exec::for_each_mut(self.config.exec, &mut self.slots, |_, s| {
                if s.active {
                    s.active = false;
                    f(s);
                }
            });
        } else {
            for &i in list {
                f(&mut self.slots[i]);
            }
        }
    }

    /// Executes one stage of exactly `len` rounds. `name` labels faults.
    pub fn run_stage(
        &mut self,
        stage: &P::Stage,
        len: u64,
        name: &str,
    ) -> Result<(), ProtocolError> {
        let everyone: Vec<usize> = (0..self.slots.len()).collect();
        exec::for_each_mut(self.config.exec, &mut self.slots, |_, s| {
            s.pending = s.program.begin_stage(stage);
        });
        let mut active: Vec<usize> = if self.config.fast_forward {
            everyone
                .iter()
                .copied()
                .filter(|&i| self.slots[i].pending)
                .collect()
        } else {
            everyone.clone()
        };

        let mut executed = 0;
        while executed < len {
            if self.config.fast_forward && active.is_empty() {
                break;
            }
            executed += 1;
            let round = self.stats.rounds + executed;
            let round_in_stage = executed;

            self.run_on(&active, |s| {
                s.outbox.clear();
                s.pending = false;
                s.program.send(stage, round_in_stage, &mut s.outbox);
            });

            let mut receivers = Vec::new();
            let mut count = 0u64;
            let mut bits_max = 0;
            for &u in &active {
                let outbox = std::mem::take(&mut self.slots[u].outbox);
                let degree = self.ports[u].len();
                let mut used = Vec::with_capacity(outbox.len());
                for &(port, msg) in &outbox {
                    if port >= degree {
                        return Err(ProtocolError::BadPort {
                            round,
                            node: u,
                            port,
                            degree,
                        });
                    }
                    if used.contains(&port) {
                        return Err(ProtocolError::DuplicatePort {
                            round,
                            node: u,
                            port,
                        });
                    }
                    used.push(port);
                    if let Err(v) = validate_message(&msg, self.b) {
                        return Err(ProtocolError::BudgetExceeded {
                            round,
                            from: u,
                            tag: msg.tag,
                            bits: v.bits,
                            limit: v.limit,
                        });
                    }
                    let (w, back) = self.ports[u][port];
                    let inbox = &mut self.slots[w].inbox;
                    if inbox.is_empty() {
                        receivers.push(w);
                    }
                    inbox.push((back, msg));
                    count += 1;
                    bits_max = bits_max.max(msg.bits());
                    if self.config.log_messages {
                        self.transcript.messages.push(LoggedMessage {
                            round,
                            from: u,
                            to: w,
                            tag: msg.tag,
                            bits: msg.bits(),
                        });
                    }
                }
                self.slots[u].outbox = outbox;
            }
            if count > 0 {
                self.stats.messages_total += count;
                self.stats.max_message_bits = self.stats.max_message_bits.max(bits_max);
                self.transcript.rounds.push(RoundRecord {
                    round,
                    messages: count,
                    bits_max,
                });
            }

            if self.config.fast_forward {
                receivers.sort_unstable();
            } else {
                receivers = everyone.clone();
            }
            self.run_on(&receivers, |s| {
                s.inbox.sort_unstable_by_key(|&(port, _)| port);
                s.pending = s.program.receive(stage, round_in_stage, &s.inbox);
                s.inbox.clear();
            });
            if self.config.fast_forward {
                active = receivers
                    .into_iter()
                    .filter(|&i| self.slots[i].pending)
                    .collect();
            }
        }
        self.stats.rounds += len;

        let mut first_fault = None;
        for (v, s) in self.slots.iter_mut().enumerate() {
            if let Err(msg) = s.program.end_stage(stage) {
                first_fault.get_or_insert(ProtocolError::NodeFault {
                    node: v,
                    stage: name.to_string(),
                    msg,
                });
            }
        }
        first_fault.map_or(Ok(()), Err)
    }
}
