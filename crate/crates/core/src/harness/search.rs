//! Exhaustive bounded-depth search over adversary choices.
//!
//! Every round branches on `n + 1` choices (no edge, or one of the `n`
//! edges). States are memoized exactly, without canonicalization, and keyed
//! without the absolute round so that revisiting a state on the current path
//! is detected as a livelock.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::engine::{apply_round, monitor_invariants, AgentProgram, SimulationState};
use crate::error::DkdError;
use crate::ring::{AgentId, Edge, Orientation};

use super::scenario::{AgentSpec, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub depth: u64,
    pub all_placements: bool,
    /// Upper bound on memoized states.
    pub max_states: usize,
}

impl SearchConfig {
    pub const DEFAULT_MAX_STATES: usize = 8_000_000;

    pub fn new(n: usize, l: usize, k: usize, depth: u64) -> Self {
        Self { n, l, k, depth, all_placements: false, max_states: Self::DEFAULT_MAX_STATES }
    }
}

/// A replayable failing run: the scenario carries the scripted adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub scenario: Scenario,
    pub edges: Vec<Option<Edge>>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Every branch terminated; `max_depth` is the longest run seen.
    AllTerminate { max_depth: u64 },
    /// Every branch terminated but `frontier` placements have runs longer
    /// than the depth cap.
    DepthExhausted { frontier: usize, max_depth: u64 },
    Violation(Counterexample),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub verdict: Verdict,
    pub placements: usize,
    pub states: usize,
}

impl SearchReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::AllTerminate { .. })
    }
}

fn placement(n: usize, k: usize, agents: &[(u64, usize, bool)]) -> Scenario {
    let agents = agents
        .iter()
        .map(|&(id, node, cw)| AgentSpec { id: AgentId(id), node, orientation: Orientation { local_cw_is_global_cw: cw } })
        .collect();
    Scenario::new(n, k, agents, AdversarySpec::None)
}

/// All placements with agent 1 fixed at node 0 (so up to rotation), IDs
/// `1..=l`, every orientation assignment.
pub fn all_placements(n: usize, l: usize, k: usize) -> Vec<Scenario> {
    let mut out = Vec::new();
    let others = l.saturating_sub(1) as u32;
    for nodes in 0..n.pow(others) {
        for mask in 0..(1u32 << l) {
            let mut agents = vec![(1, 0, mask & 1 == 1)];
            let mut rest = nodes;
            for i in 1..l {
                agents.push((i as u64 + 1, rest % n, mask >> i & 1 == 1));
                rest /= n;
            }
            out.push(placement(n, k, &agents));
        }
    }
    out
}

/// A fixed set covering multiplicities, chains, near-dispersed starts and
/// mixed orientations.
pub fn representative_placements(n: usize, l: usize, k: usize) -> Vec<Scenario> {
    let shapes: Vec<Vec<usize>> = vec![
        vec![0; l],
        (0..l).map(|i| usize::from(i > 0)).collect(),
        (0..l).collect(),
        (0..l).map(|i| if i == 0 { 0 } else { (i * n / l) % n }).collect(),
        (0..l).map(|i| (2 * i) % n).collect(),
        (0..l).map(|i| if i + 1 == l { n / 2 } else { 0 }).collect(),
        (0..l).map(|i| if i < 2 { i } else { (n / 2 + i) % n }).collect(),
    ];
    let patterns: Vec<Vec<bool>> =
        vec![vec![true; l], (0..l).map(|i| i % 2 == 0).collect(), (0..l).map(|i| i == 0).collect()];
    let mut out = Vec::new();
    for shape in &shapes {
        for pat in &patterns {
            let agents: Vec<(u64, usize, bool)> =
                shape.iter().zip(pat).enumerate().map(|(i, (&v, &o))| (i as u64 + 1, v, o)).collect();
            out.push(placement(n, k, &agents));
        }
    }
    let ids: Vec<(u64, usize, bool)> = (0..l).map(|i| ((l - i) as u64 * 3 + 1, usize::from(i == 1), i != 1)).collect();
    out.push(placement(n, k, &ids));
    out.retain(|sc| sc.validate().is_ok());
    out.dedup();
    out
}

type Key = Box<[u8]>;

fn key_of(state: &SimulationState) -> Key {
    let mut b = Vec::with_capacity(state.memories.len() * 12);
    for (id, m) in &state.memories {
        b.extend_from_slice(&(id.0 as u32).to_le_bytes());
        b.push(state.cfg.node_of(*id).unwrap_or(usize::MAX) as u8);
        b.push(u8::from(state.orientations[id].local_cw_is_global_cw));
        b.push(m.state as u8);
        b.push(m.phase as u8);
        b.extend_from_slice(&m.round.to_le_bytes());
        let flags = u8::from(m.osc_wait)
            | u8::from(m.ret) << 1
            | u8::from(m.move_flag) << 2
            | u8::from(m.chiral.is_some()) << 3
            | u8::from(m.chiral == Some(true)) << 4
            | u8::from(m.flip) << 5
            | u8::from(m.ret_dir.is_some()) << 6
            | u8::from(m.ret_dir == Some(crate::ring::Direction::Cw)) << 7;
        b.push(flags);
    }
    b.into_boxed_slice()
}

enum Mark {
    OnPath,
    /// Longest remaining run to termination.
    Done(u64),
}

/// A successor outcome.
enum Step {
    Next(Option<Edge>, SimulationState),
    Fail(Option<Edge>, String),
}

fn successors(state: &SimulationState, program: &dyn AgentProgram) -> Vec<Step> {
    let n = state.cfg.n();
    let mut out = Vec::with_capacity(n + 1);
    let mut seen: Vec<Key> = Vec::with_capacity(n + 1);
    for edge in std::iter::once(None).chain((0..n).map(|u| Some(Edge(u)))) {
        match apply_round(state, program, edge) {
            Err(e) => return vec![Step::Fail(edge, format!("engine error: {e}"))],
            Ok((next, _)) => {
                let found = monitor_invariants(state, &next);
                if let Some(v) = found.first() {
                    return vec![Step::Fail(edge, format!("{}: {}", v.monitor, v.detail))];
                }
                let key = key_of(&next);
                if !seen.contains(&key) {
                    seen.push(key);
                    out.push(Step::Next(edge, next));
                }
            }
        }
    }
    out
}

struct Frame {
    key: Key,
    via: Option<Edge>,
    children: Vec<Step>,
    next: usize,
    best: u64,
}

enum Explored {
    Longest(u64),
    Failed { edges: Vec<Option<Edge>>, detail: String },
}

fn explore(
    root: SimulationState,
    program: &dyn AgentProgram,
    memo: &mut HashMap<Key, Mark>,
    max_states: usize,
) -> Result<Explored, DkdError> {
    let root_key = key_of(&root);
    if let Some(Mark::Done(d)) = memo.get(&root_key) {
        return Ok(Explored::Longest(*d));
    }
    let open = |state: &SimulationState, key: Key, via, memo: &mut HashMap<Key, Mark>| {
        memo.insert(key.clone(), Mark::OnPath);
        let children = if state.all_done() { Vec::new() } else { successors(state, program) };
        Frame { key, via, children, next: 0, best: 0 }
    };
    let mut stack = vec![open(&root, root_key, None, memo)];
    let path = |stack: &[Frame], last: Option<Edge>| {
        let mut edges: Vec<Option<Edge>> = stack.iter().skip(1).map(|f| f.via).collect();
        edges.push(last);
        edges
    };
    while let Some(top) = stack.last_mut() {
        if top.next == top.children.len() {
            let frame = stack.pop().expect("non-empty");
            memo.insert(frame.key, Mark::Done(frame.best));
            if let Some(parent) = stack.last_mut() {
                parent.best = parent.best.max(frame.best + 1);
            } else {
                return Ok(Explored::Longest(frame.best));
            }
            continue;
        }
        let i = top.next;
        top.next += 1;
        let (edge, child) = match &top.children[i] {
            Step::Fail(edge, detail) => {
                let (edge, detail) = (*edge, detail.clone());
                return Ok(Explored::Failed { edges: path(&stack, edge), detail });
            }
            Step::Next(edge, s) => (*edge, s),
        };
        let key = key_of(child);
        match memo.get(&key) {
            Some(Mark::Done(d)) => {
                let d = *d;
                let top = stack.last_mut().expect("non-empty");
                top.best = top.best.max(d + 1);
            }
            Some(Mark::OnPath) => {
                return Ok(Explored::Failed {
                    edges: path(&stack, edge),
                    detail: "livelock: the adversary can repeat a state forever".into(),
                });
            }
            None => {
                if memo.len() >= max_states {
                    return Err(DkdError::MemoryBudget(max_states));
                }
                let child = child.clone();
                let frame = open(&child, key, edge, memo);
                stack.push(frame);
            }
        }
    }
    unreachable!("the root frame returns")
}

/// Shortest adversary sequence from `root` whose last round trips a
/// monitor or the engine.
fn shortest_failure(root: &SimulationState, program: &dyn AgentProgram, limit: usize) -> Option<Failure> {
    let mut parent: HashMap<Key, Option<(Key, Option<Edge>)>> = HashMap::new();
    let mut queue = VecDeque::new();
    let rk = key_of(root);
    parent.insert(rk.clone(), None);
    queue.push_back((rk, root.clone()));
    while let Some((key, state)) = queue.pop_front() {
        if state.all_done() {
            continue;
        }
        for step in successors(&state, program) {
            match step {
                Step::Fail(edge, detail) => {
                    let mut edges = vec![edge];
                    let mut cur = key.clone();
                    while let Some(Some((prev, e))) = parent.get(&cur) {
                        edges.push(*e);
                        cur = prev.clone();
                    }
                    edges.reverse();
                    return Some(Failure { edges, detail });
                }
                Step::Next(edge, next) => {
                    let nk = key_of(&next);
                    if !parent.contains_key(&nk) {
                        if parent.len() >= limit {
                            return None;
                        }
                        parent.insert(nk.clone(), Some((key.clone(), edge)));
                        queue.push_back((nk, next));
                    }
                }
            }
        }
    }
    None
}

struct Failure {
    edges: Vec<Option<Edge>>,
    detail: String,
}

fn counterexample(sc: &Scenario, failure: Failure) -> Counterexample {
    let script: BTreeMap<u64, Edge> =
        failure.edges.iter().enumerate().filter_map(|(i, e)| e.map(|e| (i as u64, e))).collect();
    let mut scenario = sc.clone();
    scenario.adversary = AdversarySpec::Scripted(script);
    scenario.max_rounds = Some(failure.edges.len() as u64);
    Counterexample { scenario, edges: failure.edges, detail: failure.detail }
}

/// Explores every placement of the chosen set under every adversary
/// sequence.
pub fn exhaustive_search(cfg: &SearchConfig, program: &dyn AgentProgram) -> Result<SearchReport, DkdError> {
    let set = if cfg.all_placements {
        all_placements(cfg.n, cfg.l, cfg.k)
    } else {
        representative_placements(cfg.n, cfg.l, cfg.k)
    };
    search_placements(&set, cfg.depth, cfg.max_states, program)
}

pub fn search_placements(
    set: &[Scenario],
    depth: u64,
    max_states: usize,
    program: &dyn AgentProgram,
) -> Result<SearchReport, DkdError> {
    let mut memo: HashMap<Key, Mark> = HashMap::new();
    let mut max_depth = 0;
    let mut frontier = 0;
    for sc in set {
        let root = SimulationState::from_scenario(sc)?;
        match explore(root.clone(), program, &mut memo, max_states)? {
            Explored::Longest(d) => {
                max_depth = max_depth.max(d);
                frontier += usize::from(d > depth);
            }
            Explored::Failed { edges, detail } => {
                let states = memo.len();
                drop(memo);
                let failure = if detail.starts_with("livelock") {
                    Failure { edges, detail }
                } else {
                    shortest_failure(&root, program, max_states).unwrap_or(Failure { edges, detail })
                };
                return Ok(SearchReport {
                    verdict: Verdict::Violation(counterexample(sc, failure)),
                    placements: set.len(),
                    states,
                });
            }
        }
    }
    let verdict = if frontier > 0 {
        Verdict::DepthExhausted { frontier, max_depth }
    } else {
        Verdict::AllTerminate { max_depth }
    };
    Ok(SearchReport { verdict, placements: set.len(), states: memo.len() })
}
