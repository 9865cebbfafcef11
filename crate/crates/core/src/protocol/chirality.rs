//! Chirality phase: dispatch on asymmetry and global direction, then one
//! procedure per state.

use crate::analysis::{global_direction_of, symmetry_of, ChainMap, SymmetryClass};
use crate::error::DkdError;
use crate::ring::{Cell, Direction, RingView};

use super::{least_here, Action, AgentMemory, Params, State};

/// Everything a procedure needs, in the agent's working frame.
struct Ctx<'a> {
    n: usize,
    view: &'a RingView,
    map: ChainMap,
    sym: SymmetryClass,
    /// Index of the viewer's chain.
    me: usize,
}

impl Ctx<'_> {
    fn chain(&self) -> &crate::analysis::Chain {
        &self.map.chains[self.me]
    }

    fn missing_inside_mine(&self) -> bool {
        self.view.missing_edge_offset.is_some_and(|j| self.chain().has_internal_edge(self.n, j))
    }

    /// Inward direction when the viewer sits at a terminal of a chain of
    /// length at least one.
    fn inward(&self) -> Option<Direction> {
        let c = self.chain();
        if c.degenerate || c.length == 0 {
            None
        } else if c.start == 0 {
            Some(Direction::Cw)
        } else if c.end == 0 {
            Some(Direction::Ccw)
        } else {
            None
        }
    }

    fn outward(&self) -> Option<Direction> {
        self.inward().map(Direction::reverse)
    }
}

pub fn achiral_2_chiral(mut m: AgentMemory, view: &RingView, params: &Params) -> Result<Action, DkdError> {
    if let SymmetryClass::Asymmetric { direction, .. } = symmetry_of(&view.cells, view.missing_edge_offset) {
        m.adopt(direction == Direction::Cw);
        return Ok(Action::new(m, None));
    }
    let local = ChainMap::new(&view.cells)?;
    if let Some(d) = global_direction_of(&local.chains) {
        m.adopt(d == Direction::Cw);
        return Ok(Action::new(m, None));
    }

    let flip = m.flip;
    let reflected;
    let wv = if flip {
        reflected = view.reflected();
        &reflected
    } else {
        view
    };
    let map = if flip { ChainMap::new(&wv.cells)? } else { local };
    let me = map.chain_at(0).ok_or(DkdError::MalformedView("viewer outside every chain".into()))?;
    let ctx = Ctx { n: params.n, view: wv, sym: symmetry_of(&wv.cells, wv.missing_edge_offset), map, me };

    let dir = match m.state {
        State::Init => guider(&mut m, &ctx),
        State::Oscillate => get_directed(&mut m, &ctx),
        State::PreMergeI => preprocess(&mut m, &ctx),
        State::MergeI => merge_1(&mut m, &ctx),
        State::MergeII => merge_2(&mut m, &ctx),
        State::Roundabout => round_the_ring_0(&mut m, &ctx),
        State::PreRoundabout => round_the_ring_1(&mut m, &ctx),
        State::ZeroMergeOne => merge_0_to_1(&mut m, &ctx),
    };
    Ok(Action::new(m, dir.map(|d| if flip { d.reverse() } else { d })))
}

fn guider(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let map = &ctx.map;
    let next = if map.any_directed() {
        if map.all_fc() {
            if map.classes.iter().all(|c| c.visibly_directed) {
                State::MergeII
            } else {
                State::Oscillate
            }
        } else {
            State::PreMergeI
        }
    } else if map.chains.iter().any(|c| c.length <= 1) {
        State::PreMergeI
    } else {
        State::Oscillate
    };
    m.reset_to(next);
    None
}

fn preprocess(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let chain = ctx.chain();
    match m.round {
        0 => {
            m.round += 1;
            (chain.length == 0 && ctx.view.self_count > 1 && least_here(m, ctx.view)).then_some(Direction::Cw)
        }
        1 => {
            m.round += 1;
            let both_multi = chain.length == 1 && chain.terminals == (Cell::Multi, Cell::Multi);
            if both_multi && least_here(m, ctx.view) {
                ctx.outward()
            } else {
                None
            }
        }
        _ => {
            let chains = &ctx.map.chains;
            let next = if chains.iter().all(|c| c.is_singleton_zero()) {
                State::Roundabout
            } else if chains.iter().all(|c| c.is_singleton_one()) {
                State::PreRoundabout
            } else if chains.iter().all(|c| c.is_singleton_zero() || c.is_singleton_one()) {
                State::ZeroMergeOne
            } else {
                State::MergeI
            };
            m.reset_to(next);
            None
        }
    }
}

fn round_the_ring_0(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    if (m.round as usize) < ctx.n {
        m.round += 1;
        // Only agents still alone on their own 0-chain keep circling.
        (ctx.chain().is_singleton_zero()).then_some(Direction::Cw)
    } else {
        if ctx.map.chains.iter().all(|c| c.is_singleton_zero()) {
            let flip = m.flip;
            m.adopt(!flip);
        } else {
            m.reset_to(State::Init);
        }
        None
    }
}

fn round_the_ring_1(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let b = m.id_bits;
    let r = m.round;
    let n = ctx.n as u32;
    if r < b {
        m.round += 1;
        if let SymmetryClass::Symmetric { witness } = ctx.sym {
            let mine = witness.contains(ctx.n, 0) && witness.length == 1;
            m.reset_to(State::Init);
            return if mine { ctx.outward() } else { None };
        }
        let merged = ctx.chain().length == 0 && ctx.view.self_count > 1;
        if !merged && ctx.chain().length == 1 && m.id_bit(r + 1) {
            return ctx.inward();
        }
        None
    } else if r == b {
        m.round += 1;
        if ctx.view.self_count > 1 && least_here(m, ctx.view) {
            m.move_flag = true;
            return Some(Direction::Cw);
        }
        None
    } else if r == b + 1 {
        m.round += 1;
        if !m.move_flag {
            let cells = &ctx.view.cells;
            if cells[1].is_occupied() {
                m.flip = false;
            } else if cells[ctx.n - 1].is_occupied() {
                m.flip = true;
            }
        }
        None
    } else if r <= b + 2 * n + 1 {
        m.round += 1;
        if ctx.sym.is_symmetric() && ctx.missing_inside_mine() {
            return None;
        }
        (ctx.chain().length < 2).then_some(Direction::Cw)
    } else {
        if ctx.map.chains.iter().all(|c| c.is_singleton_one()) {
            let flip = m.flip;
            m.adopt(!flip);
        } else {
            m.reset_to(State::Init);
        }
        None
    }
}

fn merge_0_to_1(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let map = &ctx.map;
    let any_zero = map.chains.iter().any(|c| c.length == 0);
    let any_fc = (0..map.len()).any(|i| map.is_fc(i));
    if !any_zero || any_fc {
        m.reset_to(State::Init);
        return None;
    }
    if ctx.chain().length != 0 {
        return None;
    }
    let gap_to_one = |d: Direction| {
        let other = map.neighbor(ctx.me, d)?;
        (map.chains[other].length == 1).then(|| map.gap(ctx.me, d)).flatten()
    };
    match (gap_to_one(Direction::Cw), gap_to_one(Direction::Ccw)) {
        (Some(a), Some(b)) if b < a => Some(Direction::Ccw),
        (Some(_), _) => Some(Direction::Cw),
        (None, Some(_)) => Some(Direction::Ccw),
        (None, None) => None,
    }
}

fn merge_1(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let map = &ctx.map;
    if map.all_fc() {
        m.reset_to(State::Init);
        return None;
    }
    let fc_side = |d: Direction| map.neighbor(ctx.me, d).is_some_and(|o| map.is_fc(o));
    let (cw, ccw) = (fc_side(Direction::Cw), fc_side(Direction::Ccw));
    let chain = ctx.chain();
    if chain.length == 0 && ctx.view.self_count == 1 {
        match (cw, ccw) {
            (true, _) => Some(Direction::Cw),
            (false, true) => Some(Direction::Ccw),
            (false, false) => None,
        }
    } else if chain.is_singleton_one() {
        let out = ctx.outward()?;
        match (cw, ccw) {
            (true, true) => Some(out),
            (true, false) if out == Direction::Cw => Some(out),
            (false, true) if out == Direction::Ccw => Some(out),
            _ => None,
        }
    } else {
        None
    }
}

fn get_directed(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let b = m.id_bits;
    let r = m.round;
    let chain = ctx.chain();
    let class = ctx.map.classes[ctx.me];
    let at_undirected_terminal = !chain.degenerate && chain.length >= 2 && !class.visibly_directed && ctx.inward().is_some();
    if r == 0 {
        m.round += 1;
        if at_undirected_terminal && ctx.view.self_count > 1 && !least_here(m, ctx.view) {
            return ctx.inward();
        }
        None
    } else if r <= 2 * b {
        m.round += 1;
        if r % 2 == 1 {
            let x = (r - 1) / 2;
            if at_undirected_terminal && !m.osc_wait && m.id_bit(x + 1) {
                m.ret = true;
                let inward = ctx.inward();
                // Working frame equals the private frame in this state.
                m.ret_dir = inward.map(Direction::reverse);
                return inward;
            }
            None
        } else if m.ret {
            if class.visibly_directed {
                m.osc_wait = true;
                None
            } else {
                m.ret = false;
                m.ret_dir.take()
            }
        } else {
            None
        }
    } else {
        m.reset_to(State::Init);
        None
    }
}

fn merge_2(m: &mut AgentMemory, ctx: &Ctx) -> Option<Direction> {
    let map = &ctx.map;
    let count = map.len();
    let mut facing = vec![false; count];
    if count >= 2 {
        for i in 0..count {
            let j = (i + 1) % count;
            if map.classes[i].direction == Some(Direction::Cw) && map.classes[j].direction == Some(Direction::Ccw) {
                facing[i] = true;
                facing[j] = true;
            }
        }
    }
    if !facing.iter().any(|&f| f) {
        m.reset_to(State::Init);
        return None;
    }
    if facing[ctx.me] && !ctx.missing_inside_mine() {
        map.classes[ctx.me].direction
    } else {
        None
    }
}
