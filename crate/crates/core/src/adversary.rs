//! Per-round edge removal strategies.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{global_direction_of, chains_of, symmetry_of, SymmetryClass};
use crate::engine::{compute_round, AgentProgram, SimulationState};
use crate::error::DkdError;
use crate::protocol::Phase;
use crate::ring::Edge;

/// Serialized through its text form, e.g. `"random p=0.5 seed=7"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AdversarySpec {
    None,
    Fixed(Edge),
    Scripted(BTreeMap<u64, Edge>),
    Random { p: f64, seed: u64 },
    Blocker,
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::None => write!(f, "none"),
            AdversarySpec::Fixed(e) => write!(f, "fixed {}", e.0),
            AdversarySpec::Scripted(script) => {
                write!(f, "script")?;
                for (r, e) in script {
                    write!(f, " {r}:{}", e.0)?;
                }
                Ok(())
            }
            AdversarySpec::Random { p, seed } => write!(f, "random p={p} seed={seed}"),
            AdversarySpec::Blocker => write!(f, "blocker"),
        }
    }
}

impl From<AdversarySpec> for String {
    fn from(spec: AdversarySpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for AdversarySpec {
    type Error = String;

    fn try_from(text: String) -> Result<Self, String> {
        AdversarySpec::parse(&text)
    }
}

impl AdversarySpec {
    /// Parses `none`, `fixed u`, `script r:u ...`, `random p=.. seed=..` or
    /// `blocker`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut words = text.split_whitespace();
        let kind = words.next().ok_or("empty adversary")?;
        let rest: Vec<&str> = words.collect();
        let num = |s: &str, what: &str| s.parse::<u64>().map_err(|_| format!("bad {what} {s:?}"));
        match kind {
            "none" if rest.is_empty() => Ok(AdversarySpec::None),
            "blocker" if rest.is_empty() => Ok(AdversarySpec::Blocker),
            "fixed" if rest.len() == 1 => Ok(AdversarySpec::Fixed(Edge(num(rest[0], "edge")? as usize))),
            "script" => {
                let mut script = BTreeMap::new();
                for item in rest {
                    let (r, u) = item.split_once(':').ok_or_else(|| format!("bad script entry {item:?}"))?;
                    if script.insert(num(r, "round")?, Edge(num(u, "edge")? as usize)).is_some() {
                        return Err(format!("round {r} scripted twice"));
                    }
                }
                Ok(AdversarySpec::Scripted(script))
            }
            "random" => {
                let (mut p, mut seed) = (None, None);
                for item in rest {
                    match item.split_once('=') {
                        Some(("p", v)) => {
                            let v: f64 = v.parse().map_err(|_| format!("bad probability {v:?}"))?;
                            if !(0.0..=1.0).contains(&v) {
                                return Err(format!("probability {v} outside [0, 1]"));
                            }
                            p = Some(v);
                        }
                        Some(("seed", v)) => seed = Some(num(v, "seed")?),
                        _ => return Err(format!("bad random option {item:?}")),
                    }
                }
                Ok(AdversarySpec::Random { p: p.ok_or("random needs p=")?, seed: seed.unwrap_or(0) })
            }
            other => Err(format!("unknown adversary {other:?}")),
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), DkdError> {
        let check = |e: &Edge| if e.0 < n { Ok(()) } else { Err(DkdError::EdgeOutOfRange { edge: e.0, n }) };
        match self {
            AdversarySpec::Fixed(e) => check(e),
            AdversarySpec::Scripted(s) => s.values().try_for_each(check),
            _ => Ok(()),
        }
    }
}

/// A strategy instance with its private state.
pub struct Adversary {
    spec: AdversarySpec,
    rng: Option<ChaCha8Rng>,
}

impl Adversary {
    pub fn new(spec: AdversarySpec) -> Self {
        let rng = match spec {
            AdversarySpec::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        Self { spec, rng }
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    /// Edge to remove in round `round` (0-based) given the pre-round state.
    pub fn decide(
        &mut self,
        round: u64,
        state: &SimulationState,
        program: &dyn AgentProgram,
    ) -> Result<Option<Edge>, DkdError> {
        let n = state.cfg.n();
        Ok(match &self.spec {
            AdversarySpec::None => None,
            AdversarySpec::Fixed(e) => Some(*e),
            AdversarySpec::Scripted(script) => script.get(&round).copied(),
            AdversarySpec::Random { p, .. } => {
                let rng = self.rng.as_mut().expect("seeded");
                let remove = rng.gen_bool(*p);
                let edge = rng.gen_range(0..n);
                remove.then_some(Edge(edge))
            }
            AdversarySpec::Blocker => blocker(state, program)?,
        })
    }
}

/// One-round lookahead: among edges that change the round's outcome, prefer
/// ones that make the view symmetric. While chirality is pending never hand
/// out an asymmetric view.
pub fn blocker(state: &SimulationState, program: &dyn AgentProgram) -> Result<Option<Edge>, DkdError> {
    let cells = state.cfg.cells();
    let pending = state.memories.values().any(|m| m.phase == Phase::Chirality);
    if pending && chains_of(&cells).ok().and_then(|c| global_direction_of(&c)).is_some() {
        return Ok(None);
    }
    let baseline = compute_round(state, program, None)?;
    let mut fallback = None;
    for u in 0..state.cfg.n() {
        let sym = symmetry_of(&cells, Some(u));
        if pending && sym.is_asymmetric() {
            continue;
        }
        let outcome = compute_round(state, program, Some(Edge(u)))?;
        if outcome.positions == baseline.positions && outcome.memories == baseline.memories {
            continue;
        }
        if matches!(sym, SymmetryClass::Symmetric { .. }) {
            return Ok(Some(Edge(u)));
        }
        fallback.get_or_insert(Edge(u));
    }
    Ok(fallback)
}
