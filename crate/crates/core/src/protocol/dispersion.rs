//! Post-chirality phases. Views passed here are already in the adopted
//! frame, so `Cw` is the agreed clockwise.

use crate::analysis::{cells_k_dispersed, ChainMap};
use crate::error::DkdError;
use crate::klink::KLinkLayout;
use crate::ring::{Cell, Direction, RingView};

use super::{least_here, Action, AgentMemory, Phase};

pub fn dispersed_step(mut m: AgentMemory, frame: &RingView) -> Result<Action, DkdError> {
    m.phase = Phase::Dispersion;
    let n = frame.n();
    let map = ChainMap::new(&frame.cells)?;
    let chain = map.chains[map.chain_at(0).ok_or(DkdError::EmptyView)?];
    let offsets: Vec<usize> = chain.cells(n).collect();
    let Some(mpos) = offsets.iter().position(|&c| frame.cells[c] == Cell::Multi) else {
        return Ok(Action::new(m, None));
    };
    let mine = offsets.iter().position(|&c| c == 0).expect("viewer in own chain");
    // Extended positions 0..=mpos lie on the arc T'..M, the rest on M..H'.
    let toward_head = frame
        .missing_edge_offset
        .and_then(|j| chain.extended_position(n, j))
        .is_none_or(|p| p <= mpos);
    let at_m_mover = mine == mpos && !least_here(&m, frame);
    let dir = if toward_head {
        (at_m_mover || mine > mpos).then_some(Direction::Cw)
    } else {
        (at_m_mover || mine < mpos).then_some(Direction::Ccw)
    };
    Ok(Action::new(m, dir))
}

pub fn k_disperse_step(mut m: AgentMemory, frame: &RingView, k: usize) -> Result<Action, DkdError> {
    if cells_k_dispersed(&frame.cells, k) {
        m.phase = Phase::Done;
        return Ok(Action::new(m, None));
    }
    if frame.has_multi() {
        return Err(DkdError::NotDispersed);
    }
    m.phase = Phase::KDispersion;
    let positions: Vec<usize> = frame.occupied().collect();
    let layout = KLinkLayout::new(frame.n(), k, positions);
    // Positions are sorted and the viewer sits at cell 0.
    let me = 0;
    let elected = layout.elected();
    let blocked = frame.missing_edge_offset.and_then(|j| elected.iter().copied().find(|&r| layout.positions[r] == j));
    let dir = match blocked {
        None => elected.contains(&me).then_some(Direction::Cw),
        Some(r) => {
            let from = layout.link_of(r);
            let count = layout.len();
            let target = (0..count).map(|i| (from + i) % count).find(|&j| layout.is_movable(j));
            target.and_then(|j| layout.nominee_sets(j).1.contains(&me).then_some(Direction::Ccw))
        }
    };
    Ok(Action::new(m, dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{localize, AgentId, GlobalConfiguration, LocalMove, Orientation};

    fn frame_of(n: usize, placement: &[(u64, usize)], me: u64, missing: Option<usize>) -> (AgentMemory, RingView) {
        let mut cfg = GlobalConfiguration::from_placement(n, placement.iter().map(|&(i, v)| (AgentId(i), v))).unwrap();
        cfg.set_missing_edge(missing.map(crate::ring::Edge)).unwrap();
        let mut mem = AgentMemory::with_bits(AgentId(me), 8);
        mem.adopt(true);
        let view = localize(&cfg, AgentId(me), Orientation::ALIGNED, |id| AgentMemory::new(id).public()).unwrap();
        (mem, view)
    }

    fn disperse(n: usize, p: &[(u64, usize)], me: u64, missing: Option<usize>) -> LocalMove {
        let (m, v) = frame_of(n, p, me, missing);
        dispersed_step(m, &v).unwrap().mv
    }

    #[test]
    fn dispersed_no_missing_edge() {
        // 3(1), 4(3), 5(1): M = 4.
        let p = [(1, 3), (2, 4), (3, 4), (4, 4), (5, 5)];
        assert_eq!(disperse(12, &p, 5, None), LocalMove::MoveLocalCw);
        assert_eq!(disperse(12, &p, 3, None), LocalMove::MoveLocalCw);
        assert_eq!(disperse(12, &p, 2, None), LocalMove::Stay);
        assert_eq!(disperse(12, &p, 1, None), LocalMove::Stay);
    }

    #[test]
    fn dispersed_missing_edge_past_m() {
        // 3(2), 4(1), 5(1) with (4,5) missing: M = 3, movers go CCW.
        let p = [(1, 3), (2, 3), (3, 4), (4, 5)];
        assert_eq!(disperse(12, &p, 2, Some(4)), LocalMove::MoveLocalCcw);
        assert_eq!(disperse(12, &p, 1, Some(4)), LocalMove::Stay);
        assert_eq!(disperse(12, &p, 4, Some(4)), LocalMove::Stay);
        // Edge before M keeps the clockwise rule.
        assert_eq!(disperse(12, &p, 2, Some(2)), LocalMove::MoveLocalCw);
        assert_eq!(disperse(12, &p, 4, Some(2)), LocalMove::MoveLocalCw);
    }

    #[test]
    fn dispersed_chain_without_multi_stays() {
        let p = [(1, 0), (2, 0), (3, 5), (4, 6)];
        assert_eq!(disperse(12, &p, 3, None), LocalMove::Stay);
    }

    fn kstep(n: usize, k: usize, nodes: &[usize], me_node: usize, missing: Option<usize>) -> LocalMove {
        let p: Vec<_> = nodes.iter().map(|&v| (v as u64 + 1, v)).collect();
        let (m, v) = frame_of(n, &p, me_node as u64 + 1, missing);
        k_disperse_step(m, &v, k).unwrap().mv
    }

    #[test]
    fn k_disperse_elected_move() {
        let nodes = [0, 8, 14, 16];
        let moves: Vec<_> = nodes.iter().map(|&v| kstep(18, 3, &nodes, v, None)).collect();
        use LocalMove::*;
        assert_eq!(moves, vec![MoveLocalCw, MoveLocalCw, Stay, Stay]);

        let nodes = [0, 5, 10, 12];
        let moves: Vec<_> = nodes.iter().map(|&v| kstep(16, 4, &nodes, v, None)).collect();
        assert_eq!(moves, vec![MoveLocalCw, MoveLocalCw, Stay, MoveLocalCw]);
    }

    #[test]
    fn k_disperse_blocked_falls_back_to_ccw() {
        // Edge (8,9) blocks the elected agent at 8; its link {8} is movable,
        // so its counterclockwise nominees move.
        let nodes = [0, 8, 14, 16];
        let moves: Vec<_> = nodes.iter().map(|&v| kstep(18, 3, &nodes, v, Some(8))).collect();
        use LocalMove::*;
        // ns_ccw({8}) = all minus heads KS_1 = {0}: agents at 8, 14, 16.
        assert_eq!(moves, vec![Stay, MoveLocalCcw, MoveLocalCcw, MoveLocalCcw]);
    }

    #[test]
    fn k_dispersed_view_is_done() {
        let (m, v) = frame_of(12, &[(1, 0), (2, 3), (3, 6), (4, 9)], 1, None);
        let a = k_disperse_step(m, &v, 3).unwrap();
        assert_eq!(a.memory.phase, Phase::Done);
    }
}
