//! Per-round runtime checks over consecutive states.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{is_dispersed, is_k_dispersed, metrics};
use crate::protocol::Phase;
use crate::ring::{AgentId, Direction, NodeIndex};

use super::SimulationState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub monitor: String,
    pub detail: String,
}

fn v(monitor: &str, detail: String) -> Violation {
    Violation { monitor: monitor.into(), detail }
}

/// The direction every agent adopted, in the engine frame, if all agree.
fn agreed_direction(state: &SimulationState) -> Option<Direction> {
    let mut dirs = state.memories.iter().map(|(id, m)| {
        m.chiral.map(|c| if c == state.orientations[id].local_cw_is_global_cw { Direction::Cw } else { Direction::Ccw })
    });
    let first = dirs.next()??;
    dirs.all(|d| d == Some(first)).then_some(first)
}

/// Agents sorted along `dir`, with their positions in that frame.
fn ordered(state: &SimulationState, dir: Direction) -> Vec<(AgentId, NodeIndex)> {
    let n = state.cfg.n();
    let mut v: Vec<(AgentId, NodeIndex)> = state
        .cfg
        .agents()
        .map(|(id, p)| (id, if dir == Direction::Cw { p } else { (n - p) % n }))
        .collect();
    v.sort_by_key(|&(id, p)| (p, id));
    v
}

pub fn monitor_invariants(prev: &SimulationState, next: &SimulationState) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = prev.cfg.n();
    let k = prev.params.k;

    let before: BTreeSet<AgentId> = prev.memories.keys().copied().collect();
    let after: BTreeSet<AgentId> = next.cfg.agents().map(|(id, _)| id).collect();
    if before != after || next.cfg.agent_count() != prev.cfg.agent_count() {
        out.push(v("conservation", format!("{} agents before, {} after", before.len(), after.len())));
        return out;
    }
    if next.cfg.n() != n {
        out.push(v("node-range", "ring size changed".into()));
        return out;
    }

    let phases: BTreeSet<Phase> = next.memories.values().map(|m| m.phase).collect();
    if phases.len() > 1 {
        out.push(v("phase-sync", format!("agents disagree on phase: {phases:?}")));
    }
    let chir: BTreeSet<_> =
        next.memories.values().filter(|m| m.phase == Phase::Chirality).map(|m| (m.state, m.round)).collect();
    if chir.len() > 1 {
        out.push(v("state-sync", format!("agents disagree on state/round: {chir:?}")));
    }
    for (id, m) in &next.memories {
        let was = prev.memories[id].phase;
        if m.phase < was {
            out.push(v("phase-monotone", format!("agent {id} went from {was:?} to {:?}", m.phase)));
        }
        if m.chiral.is_none() && !matches!(m.phase, Phase::Chirality | Phase::Done) {
            out.push(v("chirality-set", format!("agent {id} in {:?} without a direction", m.phase)));
        }
        if was != Phase::Done && m.phase == Phase::Done && !is_k_dispersed(&prev.cfg, k) {
            out.push(v("premature-done", format!("agent {id} terminated on a non-k-dispersed configuration")));
        }
    }
    let directions: BTreeSet<bool> = next
        .memories
        .iter()
        .filter_map(|(id, m)| m.chiral.map(|c| c == next.orientations[id].local_cw_is_global_cw))
        .collect();
    if directions.len() > 1 {
        out.push(v("chirality-agreement", "adopted directions differ in the global frame".into()));
    }
    if next.all_done() && !is_k_dispersed(&next.cfg, k) {
        out.push(v("terminal", "all agents done on a non-k-dispersed configuration".into()));
    }

    // Post-chirality rounds: the dispatch is a function of the global state.
    let active = prev.all_chiral() && prev.memories.values().all(|m| m.phase != Phase::Done);
    if !active {
        return out;
    }
    let expected = if is_k_dispersed(&prev.cfg, k) {
        Phase::Done
    } else if is_dispersed(&prev.cfg) {
        Phase::KDispersion
    } else {
        Phase::Dispersion
    };
    for (id, m) in &next.memories {
        if m.phase != expected {
            out.push(v("dispatch", format!("agent {id} in {:?}, expected {expected:?}", m.phase)));
        }
    }
    match expected {
        Phase::Dispersion => {
            let (a, b) = (metrics(&prev.cfg).psi, metrics(&next.cfg).psi);
            if b >= a {
                out.push(v("psi-stall", format!("psi {a} -> {b}")));
            }
        }
        Phase::KDispersion => {
            let Some(dir) = agreed_direction(prev) else {
                return out;
            };
            if !is_dispersed(&next.cfg) {
                out.push(v("gap-dispersed", "dispersion lost during k-dispersion".into()));
                return out;
            }
            let order = ordered(prev, dir);
            let now: std::collections::BTreeMap<AgentId, NodeIndex> = ordered(next, dir).into_iter().collect();
            let l = order.len();
            let mut grew = false;
            for i in 0..l {
                let (a, pa) = order[i];
                let (b, pb) = order[(i + 1) % l];
                let g0 = (pb + n - pa) % n;
                let g1 = (now[&b] + n - now[&a]) % n;
                if g0 >= k && g1 < k {
                    out.push(v("gap-break", format!("gap {a}->{b} fell from {g0} to {g1} (k={k})")));
                } else if g0 < k && g1 < g0 {
                    out.push(v("gap-shrink", format!("gap {a}->{b} shrank from {g0} to {g1} (k={k})")));
                }
                grew |= g0 < k && g1 > g0;
            }
            if !grew {
                out.push(v("gap-progress", "no intra-link gap grew".into()));
            }
        }
        _ => {}
    }
    out
}
