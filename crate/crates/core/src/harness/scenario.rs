//! Scenario files.
//!
//! ```text
//! # comment
//! n=12 k=3 c=2 seed=1
//! max_rounds=5000
//! adversary random p=0.5 seed=7
//! agent 5 0 cw
//! agent 9 0 ccw
//! agent 2 7 cw
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::error::DkdError;
use crate::protocol::id_bits;
use crate::ring::{AgentId, NodeIndex, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: AgentId,
    pub node: NodeIndex,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n: usize,
    pub k: usize,
    pub c: u32,
    pub agents: Vec<AgentSpec>,
    pub adversary: AdversarySpec,
    pub max_rounds: Option<u64>,
    pub seed: u64,
}

pub const DEFAULT_C: u32 = 2;

impl Scenario {
    pub fn new(n: usize, k: usize, agents: Vec<AgentSpec>, adversary: AdversarySpec) -> Self {
        Self { n, k, c: DEFAULT_C, agents, adversary, max_rounds: None, seed: 0 }
    }

    pub fn l(&self) -> usize {
        self.agents.len()
    }

    /// Largest admissible ID, `n^c`, saturated to `u64`.
    pub fn id_limit(&self) -> u64 {
        (self.n as u64).checked_pow(self.c).unwrap_or(u64::MAX)
    }

    /// Explicit cap, or `300 * l * (n + B)`.
    pub fn round_cap(&self) -> u64 {
        self.max_rounds
            .unwrap_or(300 * self.l() as u64 * (self.n as u64 + u64::from(id_bits(self.n, self.c))))
    }

    pub fn validate(&self) -> Result<(), DkdError> {
        check(self).map_err(|(_, msg)| DkdError::InvalidScenario(msg))
    }

    /// Random placement: distinct uniform IDs in `[1, n^c]`, uniform nodes
    /// with collisions allowed, uniform orientations.
    pub fn random(n: usize, l: usize, k: usize, adversary: AdversarySpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sc = Self { seed, ..Self::new(n, k, Vec::new(), adversary) };
        let limit = sc.id_limit();
        let mut ids = BTreeSet::new();
        while ids.len() < l {
            ids.insert(rng.gen_range(1..=limit));
        }
        let mut ids: Vec<u64> = ids.into_iter().collect();
        ids.shuffle(&mut rng);
        sc.agents = ids
            .into_iter()
            .map(|id| AgentSpec {
                id: AgentId(id),
                node: rng.gen_range(0..n),
                orientation: Orientation { local_cw_is_global_cw: rng.gen_bool(0.5) },
            })
            .collect();
        sc
    }

    /// Text form accepted by [`parse_scenario`].
    pub fn emit(&self) -> String {
        let mut s = format!("n={} k={} c={} seed={}\n", self.n, self.k, self.c, self.seed);
        if let Some(m) = self.max_rounds {
            let _ = writeln!(s, "max_rounds={m}");
        }
        let _ = writeln!(s, "adversary {}", self.adversary);
        for a in &self.agents {
            let o = if a.orientation.local_cw_is_global_cw { "cw" } else { "ccw" };
            let _ = writeln!(s, "agent {} {} {o}", a.id, a.node);
        }
        s
    }
}

/// Constraint check; errors carry the offending line (0 when global).
fn check(sc: &Scenario) -> Result<(), (usize, String)> {
    check_lines(sc, &[])
}

fn check_lines(sc: &Scenario, agent_lines: &[usize]) -> Result<(), (usize, String)> {
    let line_of = |i: usize| agent_lines.get(i).copied().unwrap_or(0);
    if sc.n < 3 {
        return Err((0, format!("n={} must be at least 3", sc.n)));
    }
    if sc.k < 1 {
        return Err((0, "k must be at least 1".into()));
    }
    if sc.c < 1 {
        return Err((0, "c must be at least 1".into()));
    }
    let limit = sc.id_limit();
    let mut seen = BTreeSet::new();
    for (i, a) in sc.agents.iter().enumerate() {
        if a.id.0 < 1 || a.id.0 > limit {
            return Err((line_of(i), format!("id {} outside [1, {limit}]", a.id)));
        }
        if !seen.insert(a.id) {
            return Err((line_of(i), format!("duplicate agent id {}", a.id)));
        }
        if a.node >= sc.n {
            return Err((line_of(i), format!("node {} out of range for n={}", a.node, sc.n)));
        }
    }
    let l = sc.l();
    let last = agent_lines.last().copied().unwrap_or(0);
    if l < 3 {
        return Err((last, format!("l={l} agents, need at least 3")));
    }
    if l > sc.n / sc.k {
        return Err((last, format!("l={l} exceeds floor(n/k)={}", sc.n / sc.k)));
    }
    sc.adversary.validate(sc.n).map_err(|e| (0, e.to_string()))
}

pub fn parse_scenario(text: &str) -> Result<Scenario, DkdError> {
    let err = |line: usize, msg: String| DkdError::Parse { line, msg };
    let (mut n, mut k, mut c, mut seed, mut max_rounds) = (None, None, None, None, None);
    let mut adversary = None;
    let mut agents = Vec::new();
    let mut agent_lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("adversary") {
            let rest = rest.trim_start();
            let rest = rest.strip_prefix('=').unwrap_or(rest);
            if adversary.is_some() {
                return Err(err(line_no, "adversary given twice".into()));
            }
            adversary = Some(AdversarySpec::parse(rest).map_err(|m| err(line_no, m))?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("agent ") {
            let f: Vec<&str> = rest.split_whitespace().collect();
            let [id, node, o] = f.as_slice() else {
                return Err(err(line_no, "expected: agent <id> <node> <cw|ccw>".into()));
            };
            let id: u64 = id.parse().map_err(|_| err(line_no, format!("bad id {id:?}")))?;
            let node: usize = node.parse().map_err(|_| err(line_no, format!("bad node {node:?}")))?;
            let orientation = match *o {
                "cw" => Orientation::ALIGNED,
                "ccw" => Orientation::FLIPPED,
                other => return Err(err(line_no, format!("bad orientation {other:?}"))),
            };
            agents.push(AgentSpec { id: AgentId(id), node, orientation });
            agent_lines.push(line_no);
            continue;
        }
        for token in line.split_whitespace() {
            let (key, value) =
                token.split_once('=').ok_or_else(|| err(line_no, format!("expected key=value, got {token:?}")))?;
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(line_no, format!("bad value for {key}: {v:?}")));
            let slot = match key {
                "n" => &mut n,
                "k" => &mut k,
                "c" => &mut c,
                "seed" => &mut seed,
                "max_rounds" => &mut max_rounds,
                other => return Err(err(line_no, format!("unknown key {other:?}"))),
            };
            if slot.replace(num(value)?).is_some() {
                return Err(err(line_no, format!("{key} given twice")));
            }
        }
    }
    let sc = Scenario {
        n: n.ok_or_else(|| err(0, "missing n".into()))? as usize,
        k: k.unwrap_or(1) as usize,
        c: c.unwrap_or(u64::from(DEFAULT_C)) as u32,
        agents,
        adversary: adversary.unwrap_or(AdversarySpec::None),
        max_rounds,
        seed: seed.unwrap_or(0),
    };
    check_lines(&sc, &agent_lines).map_err(|(line, msg)| err(line, msg))?;
    Ok(sc)
}
