//! JSON-lines trace records and replay.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::DkdError;
use crate::harness::scenario::Scenario;
use crate::protocol::{AgentMemory, Params, Phase, State};
use crate::ring::{AgentId, Edge, GlobalConfiguration};

use super::{monitor_invariants, run_scripted, AgentProgram, RunStats, SimulationState, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TraceLine {
    Header { scenario: Scenario, id_bits: u32, cap: u64 },
    Round(RoundRecord),
    Outcome { outcome: Outcome, stats: RunStats },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// Rounds executed so far; 0 is the initial configuration.
    pub round: u64,
    /// Edge missing during the round that produced this record.
    pub missing_edge: Option<String>,
    pub occupancy: Vec<Occupied>,
    pub agents: Vec<AgentRecord>,
    pub metrics: MetricsRecord,
    pub events: Vec<Event>,
}

/// Agents on one occupied node, by ID.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occupied {
    pub node: usize,
    pub agents: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: u64,
    pub state: State,
    pub phase: Phase,
    pub round: u32,
    pub osc_wait: bool,
    pub ret: bool,
    pub move_flag: bool,
    pub chiral: Option<bool>,
}

impl From<&AgentMemory> for AgentRecord {
    fn from(m: &AgentMemory) -> Self {
        Self {
            id: m.id.0,
            state: m.state,
            phase: m.phase,
            round: m.round,
            osc_wait: m.osc_wait,
            ret: m.ret,
            move_flag: m.move_flag,
            chiral: m.chiral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub phi: usize,
    pub psi: usize,
    pub chains: usize,
    pub directed_cw: usize,
    pub directed_ccw: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    BlockedMove { agent: u64, edge: String },
    PhaseChange { agent: u64, from: Phase, to: Phase },
    Violation { monitor: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Terminated { rounds: u64 },
    RoundCapExceeded { rounds: u64 },
    InvariantViolation { round: u64, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub rounds: usize,
    /// Violations found by re-checking monitors on the recorded states.
    pub violations: Vec<Violation>,
    /// Violation events present in the trace itself.
    pub recorded_violations: usize,
    /// First line (1-based) where re-simulation differs from the trace.
    pub first_mismatch: Option<usize>,
}

impl ReplayReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty() && self.recorded_violations == 0 && self.first_mismatch.is_none()
    }
}

/// Rebuilds the monitor-relevant part of a state from a record. Private
/// working fields are not traced and come back at their defaults.
fn state_from_record(header: &Scenario, bits: u32, rec: &RoundRecord) -> Result<SimulationState, DkdError> {
    let cfg = GlobalConfiguration::from_placement(
        header.n,
        rec.occupancy.iter().flat_map(|o| o.agents.iter().map(move |&id| (AgentId(id), o.node))),
    )?;
    let memories = rec
        .agents
        .iter()
        .map(|a| {
            let mut m = AgentMemory::with_bits(AgentId(a.id), bits);
            m.state = a.state;
            m.phase = a.phase;
            m.round = a.round;
            m.osc_wait = a.osc_wait;
            m.ret = a.ret;
            m.move_flag = a.move_flag;
            m.chiral = a.chiral;
            (m.id, m)
        })
        .collect();
    Ok(SimulationState {
        round: rec.round,
        cfg,
        memories,
        orientations: header.agents.iter().map(|a| (a.id, a.orientation)).collect(),
        params: Params { n: header.n, k: header.k },
    })
}

/// Re-validates a recorded trace: monitors are re-run on the recorded
/// states, and the run is re-simulated with the recorded edges and compared
/// line by line.
pub fn replay(text: &str, program: &dyn AgentProgram) -> Result<ReplayReport, DkdError> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let parsed: Vec<TraceLine> = lines
        .iter()
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| DkdError::Trace(format!("line {}: {e}", i + 1))))
        .collect::<Result<_, _>>()?;
    let Some(TraceLine::Header { scenario, id_bits, .. }) = parsed.first() else {
        return Err(DkdError::Trace("first line is not a header".into()));
    };
    let records: Vec<&RoundRecord> = parsed
        .iter()
        .filter_map(|l| match l {
            TraceLine::Round(r) => Some(r),
            _ => None,
        })
        .collect();
    if records.is_empty() {
        return Err(DkdError::Trace("no round records".into()));
    }

    let mut violations = Vec::new();
    let states: Vec<SimulationState> =
        records.iter().map(|r| state_from_record(scenario, *id_bits, r)).collect::<Result<_, _>>()?;
    for pair in states.windows(2) {
        violations.extend(monitor_invariants(&pair[0], &pair[1]));
    }
    let recorded_violations = records
        .iter()
        .flat_map(|r| r.events.iter())
        .filter(|e| matches!(e, Event::Violation { .. }))
        .count();

    let mut script = BTreeMap::new();
    for r in records.iter().skip(1) {
        if let Some(text) = &r.missing_edge {
            script.insert(r.round - 1, Edge::decode(text, scenario.n)?);
        }
    }
    let mut replayed = Vec::new();
    let mut sc = scenario.clone();
    sc.max_rounds = Some(records.len() as u64 - 1);
    run_scripted(&sc, program, script, Some(&mut replayed))?;
    let replayed = String::from_utf8(replayed).map_err(|e| DkdError::Trace(e.to_string()))?;
    let fresh: Vec<&str> = replayed.lines().collect();
    // Skip headers: the replay header names the scripted adversary. The
    // outcome line differs only when the original run hit a different cap.
    let body = |v: &[&str]| v.iter().skip(1).filter(|l| l.contains("\"type\":\"round\"")).count();
    let mut first_mismatch = None;
    for (i, (a, b)) in lines.iter().zip(fresh.iter()).enumerate().skip(1) {
        if a.contains("\"type\":\"outcome\"") {
            break;
        }
        if a != b {
            first_mismatch = Some(i + 1);
            break;
        }
    }
    if first_mismatch.is_none() && body(&lines) != body(&fresh) {
        first_mismatch = Some(lines.len().min(fresh.len()) + 1);
    }
    Ok(ReplayReport { rounds: records.len() - 1, violations, recorded_violations, first_mismatch })
}
