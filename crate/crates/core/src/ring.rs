//! Ring topology, the global configuration store and the orientation-local
//! view transform.
//!
//! Everything an agent reasons over is produced by [`localize`]: the view is
//! rotated so that the agent sits at cell 0 and reflected when the agent's
//! private clockwise disagrees with the engine's. Nothing in a [`RingView`]
//! reveals which of the two happened.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DkdError;
use crate::protocol::PublicMemory;

/// Node position on the ring, always in `0..n`.
pub type NodeIndex = usize;

/// Unique agent identifier in `[1, n^c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Cw,
    Ccw,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Cw => Direction::Ccw,
            Direction::Ccw => Direction::Cw,
        }
    }

    /// Offset of one step in this direction, modulo `n`.
    pub fn step(self, n: usize) -> usize {
        match self {
            Direction::Cw => 1,
            Direction::Ccw => n - 1,
        }
    }
}

/// Whether an agent's private clockwise coincides with the engine's clockwise.
/// Fixed for the lifetime of the agent and never exposed to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orientation {
    pub local_cw_is_global_cw: bool,
}

impl Orientation {
    pub const ALIGNED: Orientation = Orientation { local_cw_is_global_cw: true };
    pub const FLIPPED: Orientation = Orientation { local_cw_is_global_cw: false };

    pub fn to_global(self, d: Direction) -> Direction {
        if self.local_cw_is_global_cw {
            d
        } else {
            d.reverse()
        }
    }

    pub fn to_local(self, d: Direction) -> Direction {
        // The map is an involution.
        self.to_global(d)
    }
}

/// An edge of the ring, named by its clockwise-lower endpoint: `Edge(u)`
/// joins `u` and `u + 1 (mod n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Edge(pub NodeIndex);

impl Edge {
    pub fn endpoints(self, n: usize) -> (NodeIndex, NodeIndex) {
        (self.0, (self.0 + 1) % n)
    }

    /// The edge crossed when leaving `from` in direction `d`.
    pub fn leaving(n: usize, from: NodeIndex, d: Direction) -> Edge {
        match d {
            Direction::Cw => Edge(from),
            Direction::Ccw => Edge((from + n - 1) % n),
        }
    }

    /// `(u,v)` encoding used in traces.
    pub fn encode(self, n: usize) -> String {
        let (u, v) = self.endpoints(n);
        format!("({u},{v})")
    }

    pub fn decode(text: &str, n: usize) -> Result<Edge, DkdError> {
        let bad = || DkdError::Parse { line: 0, msg: format!("malformed edge {text:?}") };
        let inner = text.trim().strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        let (u, v) = inner.split_once(',').ok_or_else(bad)?;
        let u: usize = u.trim().parse().map_err(|_| bad())?;
        let v: usize = v.trim().parse().map_err(|_| bad())?;
        if u >= n || v != (u + 1) % n {
            return Err(bad());
        }
        Ok(Edge(u))
    }
}

/// Hops from `u` to `v` walking in direction `d`.
pub fn ring_distance(n: usize, u: NodeIndex, v: NodeIndex, d: Direction) -> usize {
    match d {
        Direction::Cw => (v + n - u) % n,
        Direction::Ccw => (u + n - v) % n,
    }
}

/// Inclusive node sequence of the arc from `u` to `v` in direction `d`.
pub fn arc_nodes(n: usize, u: NodeIndex, v: NodeIndex, d: Direction) -> Vec<NodeIndex> {
    let len = ring_distance(n, u, v, d);
    let step = d.step(n);
    (0..=len).map(|i| (u + i * step) % n).collect()
}

/// Ground-truth state of the ring at one instant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GlobalConfiguration {
    n: usize,
    missing: Option<Edge>,
    occupancy: Vec<Vec<AgentId>>,
}

impl GlobalConfiguration {
    pub fn new(n: usize) -> Result<Self, DkdError> {
        if n < 3 {
            return Err(DkdError::InvalidScenario(format!("ring size {n} < 3")));
        }
        Ok(Self { n, missing: None, occupancy: vec![Vec::new(); n] })
    }

    pub fn from_placement(
        n: usize,
        placement: impl IntoIterator<Item = (AgentId, NodeIndex)>,
    ) -> Result<Self, DkdError> {
        let mut cfg = Self::new(n)?;
        for (id, node) in placement {
            cfg.place(id, node)?;
        }
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn missing_edge(&self) -> Option<Edge> {
        self.missing
    }

    pub fn set_missing_edge(&mut self, edge: Option<Edge>) -> Result<(), DkdError> {
        if let Some(e) = edge {
            if e.0 >= self.n {
                return Err(DkdError::EdgeOutOfRange { edge: e.0, n: self.n });
            }
        }
        self.missing = edge;
        Ok(())
    }

    pub fn place(&mut self, id: AgentId, node: NodeIndex) -> Result<(), DkdError> {
        if node >= self.n {
            return Err(DkdError::NodeOutOfRange { node, n: self.n });
        }
        if self.node_of(id).is_some() {
            return Err(DkdError::DuplicateAgent(id));
        }
        let slot = &mut self.occupancy[node];
        let at = slot.binary_search(&id).unwrap_err();
        slot.insert(at, id);
        Ok(())
    }

    /// Agents at `node`, sorted by ID.
    pub fn agents_at(&self, node: NodeIndex) -> &[AgentId] {
        &self.occupancy[node]
    }

    pub fn count(&self, node: NodeIndex) -> usize {
        self.occupancy[node].len()
    }

    pub fn node_of(&self, id: AgentId) -> Option<NodeIndex> {
        self.occupancy.iter().position(|slot| slot.binary_search(&id).is_ok())
    }

    pub fn agent_count(&self) -> usize {
        self.occupancy.iter().map(Vec::len).sum()
    }

    pub fn agents(&self) -> impl Iterator<Item = (AgentId, NodeIndex)> + '_ {
        self.occupancy
            .iter()
            .enumerate()
            .flat_map(|(node, slot)| slot.iter().map(move |&id| (id, node)))
    }

    pub fn positions(&self) -> BTreeMap<AgentId, NodeIndex> {
        self.agents().collect()
    }

    pub fn occupied_nodes(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        (0..self.n).filter(|&v| !self.occupancy[v].is_empty())
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.occupancy.iter().map(|slot| Cell::from_count(slot.len())).collect()
    }

    /// Applies simultaneous moves; `targets` maps every agent to its new node.
    pub(crate) fn relocate(&mut self, targets: &BTreeMap<AgentId, NodeIndex>) {
        for slot in &mut self.occupancy {
            slot.clear();
        }
        for (&id, &node) in targets {
            self.occupancy[node].push(id);
        }
        // BTreeMap iteration keeps every slot sorted.
    }
}

/// Weak occupancy class of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Empty,
    Singleton,
    Multi,
}

impl Cell {
    pub fn from_count(count: usize) -> Cell {
        match count {
            0 => Cell::Empty,
            1 => Cell::Singleton,
            _ => Cell::Multi,
        }
    }

    pub fn is_occupied(self) -> bool {
        self != Cell::Empty
    }
}

/// Snapshot of the ring in some frame.
///
/// Agent views come from [`localize`]: cell 0 is the viewer's node and
/// increasing indices follow the viewer's private clockwise. Engine views come
/// from [`RingView::global`] and use the engine's frame with no viewer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingView {
    pub cells: Vec<Cell>,
    pub self_index: Option<usize>,
    pub self_count: usize,
    pub colocated: Vec<PublicMemory>,
    /// Offset `j` stands for the edge between cells `j` and `j + 1`.
    pub missing_edge_offset: Option<usize>,
}

impl RingView {
    /// Engine-frame view of a configuration.
    pub fn global(cfg: &GlobalConfiguration) -> RingView {
        RingView {
            cells: cfg.cells(),
            self_index: None,
            self_count: 0,
            colocated: Vec::new(),
            missing_edge_offset: cfg.missing_edge().map(|e| e.0),
        }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    /// The same view with clockwise and counterclockwise exchanged. The
    /// viewer stays at cell 0.
    pub fn reflected(&self) -> RingView {
        let n = self.n();
        let cells = (0..n).map(|i| self.cells[(n - i) % n]).collect();
        RingView {
            cells,
            self_index: self.self_index.map(|s| (n - s) % n),
            self_count: self.self_count,
            colocated: self.colocated.clone(),
            missing_edge_offset: self.missing_edge_offset.map(|j| (2 * n - j - 1) % n),
        }
    }

    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| self.cells[i].is_occupied())
    }

    pub fn has_multi(&self) -> bool {
        self.cells.contains(&Cell::Multi)
    }
}

/// Builds the orientation-local view of `agent`. `read` supplies the
/// readable memory of each co-located agent.
pub fn localize(
    cfg: &GlobalConfiguration,
    agent: AgentId,
    orientation: Orientation,
    read: impl Fn(AgentId) -> PublicMemory,
) -> Result<RingView, DkdError> {
    let n = cfg.n();
    let home = cfg.node_of(agent).ok_or(DkdError::UnknownAgent(agent))?;
    let aligned = orientation.local_cw_is_global_cw;
    let to_global = |i: usize| if aligned { (home + i) % n } else { (home + n - i) % n };
    let cells = (0..n).map(|i| Cell::from_count(cfg.count(to_global(i)))).collect();
    let missing_edge_offset = cfg.missing_edge().map(|Edge(g)| {
        if aligned {
            (g + n - home) % n
        } else {
            // Global edge (g, g+1) sits between local cells home-g and home-g-1.
            (home + 2 * n - g - 1) % n
        }
    });
    let here = cfg.agents_at(home);
    Ok(RingView {
        cells,
        self_index: Some(0),
        self_count: here.len(),
        colocated: here.iter().map(|&id| read(id)).collect(),
        missing_edge_offset,
    })
}

/// Move intent expressed in an agent's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalMove {
    Stay,
    MoveLocalCw,
    MoveLocalCcw,
}

/// Move intent in the engine's frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalMove {
    Stay,
    MoveGlobalCw,
    MoveGlobalCcw,
}

impl LocalMove {
    pub fn toward(d: Direction) -> LocalMove {
        match d {
            Direction::Cw => LocalMove::MoveLocalCw,
            Direction::Ccw => LocalMove::MoveLocalCcw,
        }
    }

    pub fn direction(self) -> Option<Direction> {
        match self {
            LocalMove::Stay => None,
            LocalMove::MoveLocalCw => Some(Direction::Cw),
            LocalMove::MoveLocalCcw => Some(Direction::Ccw),
        }
    }
}

impl GlobalMove {
    pub fn direction(self) -> Option<Direction> {
        match self {
            GlobalMove::Stay => None,
            GlobalMove::MoveGlobalCw => Some(Direction::Cw),
            GlobalMove::MoveGlobalCcw => Some(Direction::Ccw),
        }
    }
}

pub fn delocalize_move(orientation: Orientation, action: LocalMove) -> GlobalMove {
    match action.direction().map(|d| orientation.to_global(d)) {
        None => GlobalMove::Stay,
        Some(Direction::Cw) => GlobalMove::MoveGlobalCw,
        Some(Direction::Ccw) => GlobalMove::MoveGlobalCcw,
    }
}

pub fn relocalize_move(orientation: Orientation, action: GlobalMove) -> LocalMove {
    match action.direction() {
        None => LocalMove::Stay,
        Some(d) => LocalMove::toward(orientation.to_local(d)),
    }
}
