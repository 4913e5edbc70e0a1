//! Round-accurate simulation of the clustering in the CONGEST model.

pub mod message;
pub mod network;
pub mod protocol;

pub use message::{message_budget, validate_message, BudgetViolation, Message, Payload, Tag};
pub use network::{NodeProgram, ProtocolError, RoundStats, SimConfig, Transcript};
pub use protocol::{
    round_budget, run_protocol, run_protocol_on, stage_length, ProtocolRun, ROUNDS_PER_B6_BOUND,
};
