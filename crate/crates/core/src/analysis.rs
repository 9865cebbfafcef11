//! Chains, chain classes, symmetry classes, global direction and the
//! progress potentials Φ and ψ.
//!
//! All functions work on a cell vector in some frame. Directions in results
//! are relative to that frame: `Cw` means increasing cell index.

use serde::{Deserialize, Serialize};

use crate::error::DkdError;
use crate::ring::{Cell, Direction, GlobalConfiguration, RingView};

/// A maximal run of occupied cells, always stored in frame-CW order from
/// `start` to `end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chain {
    pub start: usize,
    pub end: usize,
    pub dir: Direction,
    pub length: usize,
    pub terminals: (Cell, Cell),
    /// Every node is occupied; there are no terminals in the usual sense.
    pub degenerate: bool,
}

impl Chain {
    /// Cells of the chain from `start` to `end`.
    pub fn cells(&self, n: usize) -> impl Iterator<Item = usize> {
        let start = self.start;
        (0..=self.length).map(move |i| (start + i) % n)
    }

    pub fn contains(&self, n: usize, cell: usize) -> bool {
        (cell + n - self.start) % n <= self.length
    }

    /// Position of edge offset `j` along the extended arc, counted from the
    /// CCW outer neighbor: 0 is the edge into `start`, `length + 1` the edge
    /// out of `end`.
    pub fn extended_position(&self, n: usize, j: usize) -> Option<usize> {
        if self.degenerate {
            return None;
        }
        let p = (j + n + 1 - self.start) % n;
        (p <= self.length + 1).then_some(p)
    }

    /// Whether edge offset `j` lies strictly inside the chain arc.
    pub fn has_internal_edge(&self, n: usize, j: usize) -> bool {
        if self.degenerate {
            return true;
        }
        matches!(self.extended_position(n, j), Some(p) if p >= 1 && p <= self.length)
    }

    pub fn is_singleton_zero(&self) -> bool {
        self.length == 0 && self.terminals.0 == Cell::Singleton
    }

    pub fn is_singleton_one(&self) -> bool {
        !self.degenerate && self.length == 1 && self.terminals == (Cell::Singleton, Cell::Singleton)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Feasibility {
    Fc,
    Nfc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainClass {
    pub length: usize,
    pub visibly_directed: bool,
    pub direction: Option<Direction>,
    pub feasibility: Feasibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    Symmetric { witness: Chain },
    Asymmetric { witness: Chain, direction: Direction },
    Neutral,
}

impl SymmetryClass {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, SymmetryClass::Symmetric { .. })
    }

    pub fn is_asymmetric(&self) -> bool {
        matches!(self, SymmetryClass::Asymmetric { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Metrics {
    pub phi: usize,
    pub z0: usize,
    pub z1: usize,
    pub psi: usize,
    pub chains_total: usize,
    pub directed_cw: usize,
    pub directed_ccw: usize,
}

pub fn chains_of(cells: &[Cell]) -> Result<Vec<Chain>, DkdError> {
    let n = cells.len();
    let Some(gap) = cells.iter().position(|c| !c.is_occupied()) else {
        if n == 0 {
            return Err(DkdError::EmptyView);
        }
        return Ok(vec![Chain {
            start: 0,
            end: n - 1,
            dir: Direction::Cw,
            length: n - 1,
            terminals: (cells[0], cells[n - 1]),
            degenerate: true,
        }]);
    };
    let mut chains = Vec::new();
    let mut run: Option<usize> = None;
    for step in 1..=n {
        let i = (gap + step) % n;
        match (cells[i].is_occupied(), run) {
            (true, None) => run = Some(i),
            (false, Some(start)) => {
                let end = (i + n - 1) % n;
                let length = (end + n - start) % n;
                chains.push(Chain {
                    start,
                    end,
                    dir: Direction::Cw,
                    length,
                    terminals: (cells[start], cells[end]),
                    degenerate: false,
                });
                run = None;
            }
            _ => {}
        }
    }
    if chains.is_empty() {
        return Err(DkdError::EmptyView);
    }
    // Start from the chain containing cell 0, or the first one after it.
    // Without a chain over cell 0 no chain wraps, so the smallest start wins.
    let first = chains.iter().position(|c| c.contains(n, 0)).unwrap_or_else(|| {
        (0..chains.len()).min_by_key(|&i| chains[i].start).unwrap_or(0)
    });
    chains.rotate_left(first);
    Ok(chains)
}

pub fn decompose_chains(view: &RingView) -> Result<Vec<Chain>, DkdError> {
    chains_of(&view.cells)
}

pub fn class_of(chain: &Chain) -> ChainClass {
    let (a, b) = chain.terminals;
    let directed = !chain.degenerate
        && chain.length >= 1
        && matches!((a, b), (Cell::Singleton, Cell::Multi) | (Cell::Multi, Cell::Singleton));
    let direction = directed.then(|| if a == Cell::Singleton { chain.dir } else { chain.dir.reverse() });
    let fc = !chain.degenerate && (chain.length >= 2 || directed);
    ChainClass {
        length: chain.length,
        visibly_directed: directed,
        direction,
        feasibility: if fc { Feasibility::Fc } else { Feasibility::Nfc },
    }
}

pub fn classify_chain(_view: &RingView, chain: &Chain) -> ChainClass {
    class_of(chain)
}

pub fn symmetry_of(cells: &[Cell], missing: Option<usize>) -> SymmetryClass {
    let Some(j) = missing else {
        return SymmetryClass::Neutral;
    };
    let n = cells.len();
    let Ok(chains) = chains_of(cells) else {
        return SymmetryClass::Neutral;
    };
    for chain in chains {
        let Some(p) = chain.extended_position(n, j) else {
            continue;
        };
        // Extended-arc distances are p and length + 1 - p.
        let far = chain.length + 1 - p;
        return if p == far {
            SymmetryClass::Symmetric { witness: chain }
        } else {
            let direction = if p < far { Direction::Cw } else { Direction::Ccw };
            SymmetryClass::Asymmetric { witness: chain, direction }
        };
    }
    SymmetryClass::Neutral
}

pub fn classify_symmetry(view: &RingView) -> SymmetryClass {
    symmetry_of(&view.cells, view.missing_edge_offset)
}

/// Direction from the extended-arc endpoint nearer to the missing edge,
/// toward the edge.
pub fn asymmetry_direction(view: &RingView, witness: &Chain) -> Result<Direction, DkdError> {
    let n = view.n();
    let p = view
        .missing_edge_offset
        .and_then(|j| witness.extended_position(n, j))
        .ok_or(DkdError::NotAsymmetric)?;
    let far = witness.length + 1 - p;
    match p.cmp(&far) {
        std::cmp::Ordering::Less => Ok(Direction::Cw),
        std::cmp::Ordering::Greater => Ok(Direction::Ccw),
        std::cmp::Ordering::Equal => Err(DkdError::NotAsymmetric),
    }
}

pub fn directed_counts(chains: &[Chain]) -> (usize, usize) {
    chains.iter().fold((0, 0), |(cw, ccw), c| match class_of(c).direction {
        Some(Direction::Cw) => (cw + 1, ccw),
        Some(Direction::Ccw) => (cw, ccw + 1),
        None => (cw, ccw),
    })
}

pub fn global_direction_of(chains: &[Chain]) -> Option<Direction> {
    let (cw, ccw) = directed_counts(chains);
    match cw.cmp(&ccw) {
        std::cmp::Ordering::Greater => Some(Direction::Cw),
        std::cmp::Ordering::Less => Some(Direction::Ccw),
        std::cmp::Ordering::Equal => None,
    }
}

pub fn global_direction(view: &RingView) -> Option<Direction> {
    chains_of(&view.cells).ok().and_then(|c| global_direction_of(&c))
}

pub fn metrics_of(cells: &[Cell]) -> Metrics {
    let chains = chains_of(cells).unwrap_or_default();
    let mut m = Metrics {
        phi: 0,
        z0: 0,
        z1: 0,
        psi: cells.iter().filter(|c| !c.is_occupied()).count(),
        chains_total: chains.len(),
        directed_cw: 0,
        directed_ccw: 0,
    };
    for chain in &chains {
        let class = class_of(chain);
        match (class.length, class.direction) {
            (0, _) => m.z0 += 1,
            (1, None) if !chain.degenerate => m.z1 += 1,
            _ => {}
        }
        match class.direction {
            Some(Direction::Cw) => m.directed_cw += 1,
            Some(Direction::Ccw) => m.directed_ccw += 1,
            None => {}
        }
    }
    m.phi = m.z0 + m.z1;
    m
}

pub fn metrics(cfg: &GlobalConfiguration) -> Metrics {
    metrics_of(&cfg.cells())
}

pub fn is_dispersed(cfg: &GlobalConfiguration) -> bool {
    (0..cfg.n()).all(|v| cfg.count(v) <= 1)
}

/// Clockwise gaps between consecutive entries of sorted `positions`.
pub fn cw_gaps(n: usize, positions: &[usize]) -> Vec<usize> {
    let l = positions.len();
    (0..l)
        .map(|i| {
            let (a, b) = (positions[i], positions[(i + 1) % l]);
            if l == 1 {
                n
            } else {
                (b + n - a) % n
            }
        })
        .collect()
}

fn gaps_ok(n: usize, positions: &[usize], k: usize, strict: bool) -> bool {
    let gaps = cw_gaps(n, positions);
    let spaced = gaps.iter().all(|&g| g >= k);
    // Waiver: all gaps > k is accepted as well.
    spaced && (!strict || gaps.contains(&k))
}

pub fn cells_k_dispersed(cells: &[Cell], k: usize) -> bool {
    if cells.contains(&Cell::Multi) {
        return false;
    }
    let occupied: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].is_occupied()).collect();
    !occupied.is_empty() && gaps_ok(cells.len(), &occupied, k, false)
}

/// Distance-k-dispersion with the all-gaps-exceed-k waiver.
pub fn is_k_dispersed(cfg: &GlobalConfiguration, k: usize) -> bool {
    cells_k_dispersed(&cfg.cells(), k)
}

/// Distance-k-dispersion requiring some gap to equal `k` exactly.
pub fn is_k_dispersed_strict(cfg: &GlobalConfiguration, k: usize) -> bool {
    let occupied: Vec<usize> = cfg.occupied_nodes().collect();
    is_dispersed(cfg) && !occupied.is_empty() && gaps_ok(cfg.n(), &occupied, k, true)
}

/// Chains with their classes and a cell-to-chain index.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub n: usize,
    pub chains: Vec<Chain>,
    pub classes: Vec<ChainClass>,
    owner: Vec<Option<usize>>,
}

impl ChainMap {
    pub fn new(cells: &[Cell]) -> Result<Self, DkdError> {
        let n = cells.len();
        let chains = chains_of(cells)?;
        let classes = chains.iter().map(class_of).collect();
        let mut owner = vec![None; n];
        for (idx, chain) in chains.iter().enumerate() {
            for cell in chain.cells(n) {
                owner[cell] = Some(idx);
            }
        }
        Ok(Self { n, chains, classes, owner })
    }

    pub fn chain_at(&self, cell: usize) -> Option<usize> {
        self.owner[cell]
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Neighbor chain in direction `d`, if distinct from `idx`.
    pub fn neighbor(&self, idx: usize, d: Direction) -> Option<usize> {
        let m = self.chains.len();
        if m < 2 {
            return None;
        }
        Some(match d {
            Direction::Cw => (idx + 1) % m,
            Direction::Ccw => (idx + m - 1) % m,
        })
    }

    /// Number of empty cells between chain `idx` and its neighbor in `d`.
    pub fn gap(&self, idx: usize, d: Direction) -> Option<usize> {
        let other = self.neighbor(idx, d)?;
        let (a, b) = match d {
            Direction::Cw => (self.chains[idx].end, self.chains[other].start),
            Direction::Ccw => (self.chains[other].end, self.chains[idx].start),
        };
        Some((b + self.n - a) % self.n - 1)
    }

    pub fn is_fc(&self, idx: usize) -> bool {
        self.classes[idx].feasibility == Feasibility::Fc
    }

    pub fn any_directed(&self) -> bool {
        self.classes.iter().any(|c| c.visibly_directed)
    }

    pub fn all_fc(&self) -> bool {
        (0..self.len()).all(|i| self.is_fc(i))
    }
}
