//! Synchronous round loop: adversary, Look, Compute, Move.

mod monitor;
mod trace;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::adversary::{Adversary, AdversarySpec};
use crate::analysis::{is_dispersed, is_k_dispersed, metrics};
use crate::error::DkdError;
use crate::harness::scenario::Scenario;
use crate::protocol::{self, id_bits, Action, AgentMemory, Params, Phase, PublicMemory};
use crate::ring::{
    delocalize_move, localize, AgentId, Edge, GlobalConfiguration, GlobalMove, NodeIndex, Orientation, RingView,
};

pub use monitor::{monitor_invariants, Violation};
pub use trace::{replay, AgentRecord, Event, MetricsRecord, Occupied, Outcome, ReplayReport, RoundRecord, TraceLine};

/// The per-agent decision function. The engine is generic over it so tests
/// can inject faulty variants.
pub trait AgentProgram: Sync {
    fn step(&self, mem: &AgentMemory, view: &RingView, params: &Params) -> Result<Action, DkdError>;
}

/// The protocol as specified.
#[derive(Debug, Clone, Copy, Default)]
pub struct Protocol;

impl AgentProgram for Protocol {
    fn step(&self, mem: &AgentMemory, view: &RingView, params: &Params) -> Result<Action, DkdError> {
        protocol::step(mem, view, params)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationState {
    /// Rounds executed so far.
    pub round: u64,
    pub cfg: GlobalConfiguration,
    pub memories: BTreeMap<AgentId, AgentMemory>,
    pub orientations: BTreeMap<AgentId, Orientation>,
    pub params: Params,
}

impl SimulationState {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self, DkdError> {
        scenario.validate()?;
        let bits = id_bits(scenario.n, scenario.c);
        let cfg = GlobalConfiguration::from_placement(scenario.n, scenario.agents.iter().map(|a| (a.id, a.node)))?;
        Ok(Self {
            round: 0,
            cfg,
            memories: scenario.agents.iter().map(|a| (a.id, AgentMemory::with_bits(a.id, bits))).collect(),
            orientations: scenario.agents.iter().map(|a| (a.id, a.orientation)).collect(),
            params: Params { n: scenario.n, k: scenario.k },
        })
    }

    pub fn all_done(&self) -> bool {
        self.memories.values().all(|m| m.phase == Phase::Done)
    }

    pub fn all_chiral(&self) -> bool {
        self.memories.values().all(|m| m.chiral.is_some())
    }
}

/// Result of evaluating every agent on one snapshot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundComputation {
    pub intents: BTreeMap<AgentId, GlobalMove>,
    pub blocked: Vec<(AgentId, Edge)>,
    pub positions: BTreeMap<AgentId, NodeIndex>,
    pub memories: BTreeMap<AgentId, AgentMemory>,
}

pub fn compute_round(
    state: &SimulationState,
    program: &dyn AgentProgram,
    edge: Option<Edge>,
) -> Result<RoundComputation, DkdError> {
    let mut cfg = state.cfg.clone();
    cfg.set_missing_edge(edge)?;
    let n = cfg.n();
    let public: BTreeMap<AgentId, PublicMemory> = state.memories.iter().map(|(&id, m)| (id, m.public())).collect();
    let mut out = RoundComputation {
        intents: BTreeMap::new(),
        blocked: Vec::new(),
        positions: BTreeMap::new(),
        memories: BTreeMap::new(),
    };
    for (id, node) in cfg.agents() {
        let orientation = state.orientations[&id];
        let view = localize(&cfg, id, orientation, |x| public[&x])?;
        let mem = &state.memories[&id];
        let action = program.step(mem, &view, &state.params)?;
        let intent = delocalize_move(orientation, action.mv);
        if mem.phase == Phase::Done && intent != GlobalMove::Stay {
            return Err(DkdError::DoneAgentMoved(id));
        }
        let target = match intent.direction() {
            None => node,
            Some(d) => {
                let crossed = Edge::leaving(n, node, d);
                if Some(crossed) == edge {
                    out.blocked.push((id, crossed));
                    node
                } else {
                    (node + d.step(n)) % n
                }
            }
        };
        out.intents.insert(id, intent);
        out.positions.insert(id, target);
        out.memories.insert(id, action.memory);
    }
    Ok(out)
}

/// Executes one round with the given adversary choice.
pub fn apply_round(
    state: &SimulationState,
    program: &dyn AgentProgram,
    edge: Option<Edge>,
) -> Result<(SimulationState, Vec<Event>), DkdError> {
    let comp = compute_round(state, program, edge)?;
    let n = state.cfg.n();
    let mut events: Vec<Event> = comp
        .blocked
        .iter()
        .map(|&(id, e)| Event::BlockedMove { agent: id.0, edge: e.encode(n) })
        .collect();
    for (id, m) in &comp.memories {
        let before = state.memories[id].phase;
        if m.phase != before {
            events.push(Event::PhaseChange { agent: id.0, from: before, to: m.phase });
        }
    }
    let mut cfg = state.cfg.clone();
    cfg.relocate(&comp.positions);
    cfg.set_missing_edge(None)?;
    let next = SimulationState {
        round: state.round + 1,
        cfg,
        memories: comp.memories,
        orientations: state.orientations.clone(),
        params: state.params,
    };
    Ok((next, events))
}

/// Round-count bookkeeping for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub rounds_to_chirality: Option<u64>,
    pub rounds_to_dispersion: Option<u64>,
    pub rounds_to_kdd: Option<u64>,
    pub blocked_moves: u64,
    /// Whether all agents denote the same global direction at the first
    /// round where every agent has adopted one.
    pub chirality_agreed: Option<bool>,
    pub dispersion_rounds: u64,
    pub kdispersion_rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outcome: Outcome,
    pub rounds: u64,
    pub stats: RunStats,
    pub violations: Vec<Violation>,
    pub final_k_dispersed: bool,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Outcome::Terminated { .. }) && self.violations.is_empty() && self.final_k_dispersed
    }
}

#[derive(Default)]
struct Tracker {
    stats: RunStats,
    chiral_at: Option<u64>,
    dispersed_at: Option<u64>,
}

impl Tracker {
    fn observe(&mut self, prev: &SimulationState, next: &SimulationState, events: &[Event]) {
        let s = &mut self.stats;
        s.blocked_moves += events.iter().filter(|e| matches!(e, Event::BlockedMove { .. })).count() as u64;
        let chiral_round = prev.all_chiral() && !prev.memories.values().any(|m| m.phase == Phase::Done);
        if chiral_round {
            if is_dispersed(&prev.cfg) {
                s.kdispersion_rounds += 1;
            } else {
                s.dispersion_rounds += 1;
            }
        }
        if self.chiral_at.is_none() && next.all_chiral() {
            self.chiral_at = Some(next.round);
            s.rounds_to_chirality = Some(next.round);
            let globals: Vec<bool> = next
                .memories
                .iter()
                .map(|(id, m)| m.chiral == Some(next.orientations[id].local_cw_is_global_cw))
                .collect();
            s.chirality_agreed = Some(globals.windows(2).all(|w| w[0] == w[1]));
        }
        if let Some(tc) = self.chiral_at {
            if self.dispersed_at.is_none() && is_dispersed(&next.cfg) {
                self.dispersed_at = Some(next.round);
                s.rounds_to_dispersion = Some(next.round - tc);
            }
            if let Some(td) = self.dispersed_at {
                if s.rounds_to_kdd.is_none() && is_k_dispersed(&next.cfg, next.params.k) {
                    s.rounds_to_kdd = Some(next.round - td);
                }
            }
        }
    }
}

fn emit(sink: &mut Option<&mut dyn Write>, line: &TraceLine) -> Result<(), DkdError> {
    if let Some(w) = sink.as_mut() {
        serde_json::to_writer(&mut **w, line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn record(state: &SimulationState, edge: Option<Edge>, events: Vec<Event>) -> RoundRecord {
    let n = state.cfg.n();
    let m = metrics(&state.cfg);
    RoundRecord {
        round: state.round,
        missing_edge: edge.map(|e| e.encode(n)),
        occupancy: state
            .cfg
            .occupied_nodes()
            .map(|v| Occupied { node: v, agents: state.cfg.agents_at(v).iter().map(|a| a.0).collect() })
            .collect(),
        agents: state.memories.values().map(AgentRecord::from).collect(),
        metrics: MetricsRecord {
            phi: m.phi,
            psi: m.psi,
            chains: m.chains_total,
            directed_cw: m.directed_cw,
            directed_ccw: m.directed_ccw,
        },
        events,
    }
}

/// Runs a scenario with the protocol, optionally writing a trace.
pub fn run(scenario: &Scenario, sink: Option<&mut dyn Write>) -> Result<RunReport, DkdError> {
    run_with(scenario, &Protocol, sink)
}

pub fn run_with(
    scenario: &Scenario,
    program: &dyn AgentProgram,
    sink: Option<&mut dyn Write>,
) -> Result<RunReport, DkdError> {
    simulate(scenario, program, Adversary::new(scenario.adversary.clone()), sink)
}

pub(crate) fn simulate(
    scenario: &Scenario,
    program: &dyn AgentProgram,
    mut adversary: Adversary,
    mut sink: Option<&mut dyn Write>,
) -> Result<RunReport, DkdError> {
    let mut state = SimulationState::from_scenario(scenario)?;
    let cap = scenario.round_cap();
    emit(&mut sink, &TraceLine::Header { scenario: scenario.clone(), id_bits: id_bits(scenario.n, scenario.c), cap })?;
    emit(&mut sink, &TraceLine::Round(record(&state, None, Vec::new())))?;
    let mut tracker = Tracker::default();
    let mut violations = Vec::new();
    let outcome = loop {
        if state.all_done() {
            break Outcome::Terminated { rounds: state.round };
        }
        if state.round >= cap {
            break Outcome::RoundCapExceeded { rounds: state.round };
        }
        let edge = adversary.decide(state.round, &state, program)?;
        let (next, mut events) = apply_round(&state, program, edge)?;
        let found = monitor_invariants(&state, &next);
        events.extend(found.iter().map(|v| Event::Violation { monitor: v.monitor.clone(), detail: v.detail.clone() }));
        tracker.observe(&state, &next, &events);
        emit(&mut sink, &TraceLine::Round(record(&next, edge, events)))?;
        state = next;
        if let Some(first) = found.first() {
            let detail = format!("{}: {}", first.monitor, first.detail);
            violations.extend(found);
            break Outcome::InvariantViolation { round: state.round, detail };
        }
    };
    let report = RunReport {
        outcome,
        rounds: state.round,
        stats: tracker.stats,
        violations,
        final_k_dispersed: is_k_dispersed(&state.cfg, state.params.k),
    };
    emit(&mut sink, &TraceLine::Outcome { outcome: report.outcome.clone(), stats: report.stats.clone() })?;
    Ok(report)
}

/// Runs with a scripted adversary that replays the given per-round edges.
pub fn run_scripted(
    scenario: &Scenario,
    program: &dyn AgentProgram,
    script: BTreeMap<u64, Edge>,
    sink: Option<&mut dyn Write>,
) -> Result<RunReport, DkdError> {
    simulate(scenario, program, Adversary::new(AdversarySpec::Scripted(script)), sink)
}
