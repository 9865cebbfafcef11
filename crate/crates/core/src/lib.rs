//! Simulator and verification harness for distance-k dispersion of achiral
//! synchronous agents on a 1-interval connected ring.
//!
//! The crate is layered bottom-up: [`ring`] holds the ring model and local
//! views, [`analysis`] and [`klink`] classify configurations, [`protocol`]
//! is the per-agent decision function, [`adversary`] and [`engine`] drive
//! rounds, and [`harness`] handles scenarios, sweeps and exhaustive search.

pub mod adversary;
pub mod analysis;
pub mod engine;
pub mod error;
pub mod harness;
pub mod klink;
pub mod protocol;
pub mod ring;

pub use adversary::{Adversary, AdversarySpec};
pub use analysis::{
    classify_chain, classify_symmetry, decompose_chains, global_direction, is_dispersed, is_k_dispersed,
    is_k_dispersed_strict, metrics, Chain, ChainClass, Feasibility, Metrics, SymmetryClass,
};
pub use engine::{
    apply_round, compute_round, monitor_invariants, replay, run, run_scripted, run_with, AgentProgram, Outcome,
    Protocol, ReplayReport, RunReport, RunStats, SimulationState, TraceLine, Violation,
};
pub use error::DkdError;
pub use harness::{
    exhaustive_search, parse_scenario, parse_sweep, run_batch, AgentSpec, Scenario, SearchConfig, SearchReport,
    SweepReport, SweepSpec, Verdict,
};
pub use klink::{decompose_klinks, elected_agent_set, is_movable, nominee_sets, KLink, NomineePair};
pub use protocol::{step, Action, AgentMemory, Params, Phase, PublicMemory, State};
pub use ring::{
    AgentId, Cell, Direction, Edge, GlobalConfiguration, GlobalMove, LocalMove, NodeIndex, Orientation, RingView,
};
