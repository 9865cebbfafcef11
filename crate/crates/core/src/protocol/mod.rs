//! Per-agent state machine.
//!
//! [`step`] is a pure function of the agent's memory and its localized view.
//! Before chirality every rule is evaluated in the agent's working frame,
//! which is its private clockwise optionally flipped by an in-chain
//! agreement; afterwards rules use the adopted clockwise.

mod chirality;
mod dispersion;

use serde::{Deserialize, Serialize};

use crate::analysis::cells_k_dispersed;
use crate::error::DkdError;
use crate::ring::{AgentId, Cell, Direction, LocalMove, RingView};

pub use chirality::achiral_2_chiral;
pub use dispersion::{dispersed_step, k_disperse_step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum State {
    Init,
    Oscillate,
    PreMergeI,
    MergeI,
    MergeII,
    Roundabout,
    PreRoundabout,
    ZeroMergeOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Chirality,
    Dispersion,
    KDispersion,
    Done,
}

/// Persistent memory of one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentMemory {
    pub id: AgentId,
    pub id_bits: u32,
    pub state: State,
    pub round: u32,
    pub osc_wait: bool,
    pub ret: bool,
    pub move_flag: bool,
    /// Adopted clockwise, as "equals my private clockwise".
    pub chiral: Option<bool>,
    pub phase: Phase,
    /// Working clockwise is the reverse of the private one.
    pub flip: bool,
    /// Private-frame direction back to the node left during an oscillation.
    pub ret_dir: Option<Direction>,
}

/// The part of an agent's memory a co-located agent may read. Carries no
/// direction-valued fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PublicMemory {
    pub id: AgentId,
    pub state: State,
    pub round: u32,
    pub osc_wait: bool,
    pub ret: bool,
    pub move_flag: bool,
    pub phase: Phase,
}

impl AgentMemory {
    pub fn new(id: AgentId) -> Self {
        Self::with_bits(id, 64 - id.0.leading_zeros())
    }

    pub fn with_bits(id: AgentId, id_bits: u32) -> Self {
        Self {
            id,
            id_bits,
            state: State::Init,
            round: 0,
            osc_wait: false,
            ret: false,
            move_flag: false,
            chiral: None,
            phase: Phase::Chirality,
            flip: false,
            ret_dir: None,
        }
    }

    pub fn public(&self) -> PublicMemory {
        PublicMemory {
            id: self.id,
            state: self.state,
            round: self.round,
            osc_wait: self.osc_wait,
            ret: self.ret,
            move_flag: self.move_flag,
            phase: self.phase,
        }
    }

    /// `ID_x`: the x-th bit from the right, 1-indexed.
    pub fn id_bit(&self, x: u32) -> bool {
        (1..=64).contains(&x) && (self.id.0 >> (x - 1)) & 1 == 1
    }

    pub(crate) fn reset_to(&mut self, state: State) {
        self.state = state;
        self.round = 0;
        self.osc_wait = false;
        self.ret = false;
        self.move_flag = false;
        self.flip = false;
        self.ret_dir = None;
    }

    pub(crate) fn adopt(&mut self, local_cw_is_adopted_cw: bool) {
        self.reset_to(State::Init);
        self.chiral = Some(local_cw_is_adopted_cw);
        self.phase = Phase::Dispersion;
    }
}

/// Bit length of `n^c`, the shared ID width.
pub fn id_bits(n: usize, c: u32) -> u32 {
    let max = (n as u128).saturating_pow(c).max(1);
    128 - max.leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub mv: LocalMove,
    pub memory: AgentMemory,
}

impl Action {
    pub(crate) fn new(memory: AgentMemory, dir: Option<Direction>) -> Self {
        Self { mv: dir.map_or(LocalMove::Stay, LocalMove::toward), memory }
    }
}

fn validate(mem: &AgentMemory, view: &RingView, params: &Params) -> Result<(), DkdError> {
    let bad = |msg: &str| Err(DkdError::MalformedView(msg.into()));
    if view.cells.len() != params.n {
        return bad("length differs from ring size");
    }
    if view.self_index != Some(0) {
        return bad("viewer is not at cell 0");
    }
    if view.cells[0] == Cell::Empty || view.self_count == 0 {
        return bad("own cell is empty");
    }
    if Cell::from_count(view.self_count) != view.cells[0] || view.colocated.len() != view.self_count {
        return bad("own count disagrees with cell");
    }
    if !view.colocated.iter().any(|m| m.id == mem.id) {
        return bad("viewer missing from co-located memories");
    }
    if view.missing_edge_offset.is_some_and(|j| j >= params.n) {
        return bad("missing edge offset out of range");
    }
    Ok(())
}

/// Whether the viewer has the least ID on its node.
pub(crate) fn least_here(mem: &AgentMemory, view: &RingView) -> bool {
    view.colocated.iter().all(|m| m.id >= mem.id)
}

/// One Look-Compute step of the top-level dispatch.
pub fn step(mem: &AgentMemory, view: &RingView, params: &Params) -> Result<Action, DkdError> {
    validate(mem, view, params)?;
    let mut m = mem.clone();
    if m.phase == Phase::Done {
        return Ok(Action::new(m, None));
    }
    if cells_k_dispersed(&view.cells, params.k) {
        m.phase = Phase::Done;
        return Ok(Action::new(m, None));
    }
    match m.chiral {
        None => achiral_2_chiral(m, view, params),
        Some(aligned) => {
            let frame = if aligned { view.clone() } else { view.reflected() };
            let mut action = if frame.has_multi() {
                dispersed_step(m, &frame)?
            } else {
                k_disperse_step(m, &frame, params.k)?
            };
            if !aligned {
                action.mv = match action.mv {
                    LocalMove::MoveLocalCw => LocalMove::MoveLocalCcw,
                    LocalMove::MoveLocalCcw => LocalMove::MoveLocalCw,
                    LocalMove::Stay => LocalMove::Stay,
                };
            }
            Ok(action)
        }
    }
}
