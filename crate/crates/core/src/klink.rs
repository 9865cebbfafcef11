//! k-Links over a dispersed configuration in a fixed clockwise frame.
//!
//! [`KLinkLayout`] works on bare sorted positions so that agents can run it
//! on their own view; the `cfg`-level wrappers attach agent identities and
//! use the engine's clockwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::{cw_gaps, is_dispersed};
use crate::error::DkdError;
use crate::ring::{AgentId, GlobalConfiguration, NodeIndex};

/// One maximal k-Link as a span of indices into the sorted position list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkSpan {
    /// Index of the tail agent.
    pub first: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KLinkLayout {
    pub n: usize,
    pub k: usize,
    /// Occupied positions in increasing (clockwise) order.
    pub positions: Vec<usize>,
    /// Links in clockwise order, starting with the smallest tail position.
    pub links: Vec<LinkSpan>,
    gaps: Vec<usize>,
}

impl KLinkLayout {
    pub fn new(n: usize, k: usize, mut positions: Vec<usize>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        let l = positions.len();
        let gaps = cw_gaps(n, &positions);
        let mut links = Vec::new();
        match (0..l).find(|&i| gaps[i] >= k) {
            None => {
                if l > 0 {
                    links.push(LinkSpan { first: 0, size: l });
                }
            }
            Some(brk) => {
                let mut first = (brk + 1) % l;
                let mut size = 0;
                for step in 0..l {
                    let i = (brk + 1 + step) % l;
                    size += 1;
                    if gaps[i] >= k {
                        links.push(LinkSpan { first, size });
                        first = (i + 1) % l;
                        size = 0;
                    }
                }
            }
        }
        let mut layout = Self { n, k, positions, links, gaps };
        let start = (0..layout.links.len())
            .min_by_key(|&j| layout.positions[layout.links[j].first])
            .unwrap_or(0);
        layout.links.rotate_left(start);
        layout
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Agent indices of link `j` in clockwise order.
    pub fn members(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        let span = self.links[j];
        let l = self.positions.len();
        (0..span.size).map(move |i| (span.first + i) % l)
    }

    pub fn tail(&self, j: usize) -> usize {
        self.links[j].first
    }

    pub fn head(&self, j: usize) -> usize {
        let span = self.links[j];
        (span.first + span.size - 1) % self.positions.len()
    }

    /// Link index containing agent index `a`.
    pub fn link_of(&self, a: usize) -> usize {
        (0..self.len()).find(|&j| self.members(j).any(|m| m == a)).expect("agent in some link")
    }

    /// Clockwise gap from agent `a` to the next agent.
    pub fn gap_after(&self, a: usize) -> usize {
        self.gaps[a]
    }

    pub fn is_movable(&self, j: usize) -> bool {
        self.gap_after(self.head(j)) > self.k
    }

    /// Returns `(ns_cw, ns_ccw)` as agent indices.
    pub fn nominee_sets(&self, j: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let all: BTreeSet<usize> = (0..self.positions.len()).collect();
        let complement = |s: &BTreeSet<usize>| all.difference(s).copied().collect::<BTreeSet<_>>();
        if self.links[j].size >= 2 {
            let cw = BTreeSet::from([self.head(j)]);
            let ccw = complement(&cw);
            return (cw, ccw);
        }
        let m = self.len();
        // Walk counterclockwise: KS_0 = j, KS_1 = j - 1, ...
        let walk = |i: usize| (j + m - i % m) % m;
        let Some(x) = (1..m).find(|&i| self.links[walk(i)].size >= 2) else {
            let cw = BTreeSet::from([self.head(j)]);
            let ccw = complement(&cw);
            return (cw, ccw);
        };
        let heads = |from: usize, to: usize| (from..=to).map(|i| self.head(walk(i))).collect::<BTreeSet<_>>();
        match (1..=x).rev().find(|&i| self.is_movable(walk(i))) {
            None => {
                let cw = heads(0, x);
                let ccw = complement(&cw);
                (cw, ccw)
            }
            Some(z) => {
                let cw = heads(0, z - 1);
                let ccw = complement(&heads(z, x));
                (cw, ccw)
            }
        }
    }

    /// Union of clockwise nominee sets over movable links.
    pub fn elected(&self) -> BTreeSet<usize> {
        (0..self.len()).filter(|&j| self.is_movable(j)).flat_map(|j| self.nominee_sets(j).0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLink {
    pub agents: Vec<AgentId>,
    pub tail: NodeIndex,
    pub head: NodeIndex,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NomineePair {
    pub ns_cw: BTreeSet<AgentId>,
    pub ns_ccw: BTreeSet<AgentId>,
}

/// Layout of a dispersed configuration in the engine frame, plus the agent
/// at each sorted position.
fn layout(cfg: &GlobalConfiguration, k: usize) -> Result<(KLinkLayout, Vec<AgentId>), DkdError> {
    if !is_dispersed(cfg) {
        return Err(DkdError::NotDispersed);
    }
    let nodes: Vec<NodeIndex> = cfg.occupied_nodes().collect();
    let ids = nodes.iter().map(|&v| cfg.agents_at(v)[0]).collect();
    Ok((KLinkLayout::new(cfg.n(), k, nodes), ids))
}

fn to_link(layout: &KLinkLayout, ids: &[AgentId], j: usize) -> KLink {
    KLink {
        agents: layout.members(j).map(|a| ids[a]).collect(),
        tail: layout.positions[layout.tail(j)],
        head: layout.positions[layout.head(j)],
        size: layout.links[j].size,
    }
}

pub fn decompose_klinks(cfg: &GlobalConfiguration, k: usize) -> Result<Vec<KLink>, DkdError> {
    let (layout, ids) = layout(cfg, k)?;
    Ok((0..layout.len()).map(|j| to_link(&layout, &ids, j)).collect())
}

fn index_of(links: &[KLink], link: &KLink) -> Result<usize, DkdError> {
    links
        .iter()
        .position(|l| l == link)
        .ok_or_else(|| DkdError::InvalidScenario("link is not a maximal k-Link of this configuration".into()))
}

pub fn is_movable(cfg: &GlobalConfiguration, k: usize, link: &KLink) -> Result<bool, DkdError> {
    let (layout, ids) = layout(cfg, k)?;
    let links: Vec<_> = (0..layout.len()).map(|j| to_link(&layout, &ids, j)).collect();
    Ok(layout.is_movable(index_of(&links, link)?))
}

pub fn nominee_sets(cfg: &GlobalConfiguration, k: usize, link: &KLink) -> Result<NomineePair, DkdError> {
    let (layout, ids) = layout(cfg, k)?;
    let links: Vec<_> = (0..layout.len()).map(|j| to_link(&layout, &ids, j)).collect();
    let (cw, ccw) = layout.nominee_sets(index_of(&links, link)?);
    Ok(NomineePair {
        ns_cw: cw.into_iter().map(|a| ids[a]).collect(),
        ns_ccw: ccw.into_iter().map(|a| ids[a]).collect(),
    })
}

pub fn elected_agent_set(cfg: &GlobalConfiguration, k: usize) -> Result<BTreeSet<AgentId>, DkdError> {
    let (layout, ids) = layout(cfg, k)?;
    Ok(layout.elected().into_iter().map(|a| ids[a]).collect())
}
