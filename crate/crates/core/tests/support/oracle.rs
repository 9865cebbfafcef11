//! Brute-force evaluators written directly from the definitions, used as
//! independent oracles for the analysis functions. Each `verify_*` sweeps an
//! exhaustive grid and reports the first disagreement.

#![allow(dead_code)]

use std::collections::BTreeSet;

use dkd_core::{
    classify_chain, classify_symmetry, decompose_chains, decompose_klinks, elected_agent_set, is_movable,
    nominee_sets, AgentId, Cell, Direction, Edge, Feasibility, GlobalConfiguration, RingView, SymmetryClass,
};

/// Every vector of per-node agent counts with total in `1..=max_agents`.
pub fn count_vectors(n: usize, max_agents: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            if cur.iter().sum::<usize>() > 0 {
                out.push(cur.clone());
            }
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(n, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_agents, &mut Vec::new(), &mut out);
    out
}

/// Agents get IDs `1, 2, ...` in node order.
pub fn cfg_from_counts(counts: &[usize]) -> GlobalConfiguration {
    let mut next = 1;
    let mut placement = Vec::new();
    for (v, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            placement.push((AgentId(next), v));
            next += 1;
        }
    }
    GlobalConfiguration::from_placement(counts.len(), placement).unwrap()
}

fn cell(c: usize) -> Cell {
    match c {
        0 => Cell::Empty,
        1 => Cell::Singleton,
        _ => Cell::Multi,
    }
}

/// Clockwise distance.
fn d(n: usize, u: usize, v: usize) -> usize {
    (v + n - u) % n
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ArcChain {
    pub start: usize,
    pub length: usize,
}

/// Arcs `(u, v)` clockwise whose nodes are all occupied and whose outer
/// neighbors are empty; the full ring when every node is occupied.
pub fn brute_chains(counts: &[usize]) -> BTreeSet<ArcChain> {
    let n = counts.len();
    let occ = |v: usize| counts[v % n] > 0;
    let mut out = BTreeSet::new();
    if (0..n).all(occ) {
        out.insert(ArcChain { start: 0, length: n - 1 });
        return out;
    }
    for u in 0..n {
        for length in 0..n {
            let inside = (0..=length).all(|i| occ(u + i));
            let before = !occ(u + n - 1);
            let after = !occ(u + length + 1);
            if inside && before && after {
                out.insert(ArcChain { start: u, length });
            }
        }
    }
    out
}

/// Exactly one terminal Singleton and the other Multi; points from the
/// Singleton toward the Multi.
fn brute_direction(counts: &[usize], ch: &ArcChain) -> Option<Direction> {
    let n = counts.len();
    if ch.length == 0 {
        return None;
    }
    let (a, b) = (counts[ch.start], counts[(ch.start + ch.length) % n]);
    match (a, b) {
        (1, m) if m >= 2 => Some(Direction::Cw),
        (m, 1) if m >= 2 => Some(Direction::Ccw),
        _ => None,
    }
}

pub fn verify_chains(max_n: usize, max_agents: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n in 3..=max_n {
        for counts in count_vectors(n, max_agents) {
            let cfg = cfg_from_counts(&counts);
            let view = RingView::global(&cfg);
            let got = decompose_chains(&view).map_err(|e| format!("{counts:?}: {e}"))?;
            let want = brute_chains(&counts);
            let got_set: BTreeSet<ArcChain> =
                got.iter().map(|c| ArcChain { start: c.start, length: c.length }).collect();
            if got_set != want || got.len() != want.len() {
                return Err(format!("chains of {counts:?}: got {got_set:?}, want {want:?}"));
            }
            let degenerate = counts.iter().all(|&c| c > 0);
            let first = &got[0];
            let starts_ok = if want.iter().any(|c| (0..=c.length).any(|i| (c.start + i) % n == 0)) {
                (0..=first.length).any(|i| (first.start + i) % n == 0)
            } else {
                want.iter().all(|c| c.start >= first.start)
            };
            if !starts_ok {
                return Err(format!("chain order of {counts:?}: first is {first:?}"));
            }
            for c in &got {
                let arc = ArcChain { start: c.start, length: c.length };
                let terminals = (cell(counts[c.start]), cell(counts[(c.start + c.length) % n]));
                if c.degenerate != degenerate || c.terminals != terminals {
                    return Err(format!("chain fields of {counts:?}: {c:?}"));
                }
                let class = classify_chain(&view, c);
                let dir = if degenerate { None } else { brute_direction(&counts, &arc) };
                let fc = !degenerate && (c.length >= 2 || (c.length == 1 && dir.is_some()));
                let want_feas = if fc { Feasibility::Fc } else { Feasibility::Nfc };
                if class.direction != dir || class.visibly_directed != dir.is_some() || class.feasibility != want_feas
                {
                    return Err(format!("class of {c:?} in {counts:?}: {class:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Symmetric and asymmetric witnesses for the edge between `e` and `e + 1`.
pub fn brute_symmetry(counts: &[usize], e: usize) -> (Vec<ArcChain>, Vec<(ArcChain, Direction)>) {
    let n = counts.len();
    let mut sym = Vec::new();
    let mut asym = Vec::new();
    if counts.iter().all(|&c| c > 0) {
        return (sym, asym);
    }
    let (u1, v1) = (e, (e + 1) % n);
    for ch in brute_chains(counts) {
        let (u, v) = (ch.start, (ch.start + ch.length) % n);
        // Edge from u1 to u1 + 1 inside the chain arc.
        let in_arc = d(n, u, u1) < ch.length;
        if ch.length % 2 == 1 && in_arc && d(n, u, u1) == d(n, v1, v) {
            sym.push(ch.clone());
        }
        let (eu, ev) = ((u + n - 1) % n, (v + 1) % n);
        let ext_len = ch.length + 2;
        let in_ext = d(n, eu, u1) < ext_len;
        if in_ext {
            let (near, far) = (d(n, eu, u1), d(n, v1, ev));
            if near != far {
                let dir = if near < far { Direction::Cw } else { Direction::Ccw };
                asym.push((ch.clone(), dir));
            }
        }
    }
    (sym, asym)
}

pub fn verify_symmetry(max_n: usize, max_agents: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n in 3..=max_n {
        for counts in count_vectors(n, max_agents) {
            let mut cfg = cfg_from_counts(&counts);
            if classify_symmetry(&RingView::global(&cfg)) != SymmetryClass::Neutral {
                return Err(format!("{counts:?} without a missing edge is not neutral"));
            }
            for e in 0..n {
                cfg.set_missing_edge(Some(Edge(e))).unwrap();
                let got = classify_symmetry(&RingView::global(&cfg));
                let (sym, asym) = brute_symmetry(&counts, e);
                if !sym.is_empty() && !asym.is_empty() {
                    return Err(format!("{counts:?} edge {e}: both symmetric and asymmetric"));
                }
                let ok = match &got {
                    SymmetryClass::Symmetric { witness } => {
                        sym.contains(&ArcChain { start: witness.start, length: witness.length })
                    }
                    SymmetryClass::Asymmetric { witness, direction } => {
                        asym.contains(&(ArcChain { start: witness.start, length: witness.length }, *direction))
                    }
                    SymmetryClass::Neutral => sym.is_empty() && asym.is_empty(),
                };
                if !ok {
                    return Err(format!("{counts:?} edge {e}: got {got:?}, want sym {sym:?} asym {asym:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Maximal clockwise runs of agents (as node lists) with consecutive gaps
/// below `k`.
pub fn brute_links(n: usize, k: usize, nodes: &[usize]) -> Vec<Vec<usize>> {
    let l = nodes.len();
    let gap = |i: usize| if l == 1 { n } else { d(n, nodes[i % l], nodes[(i + 1) % l]) };
    if (0..l).all(|i| gap(i) < k) {
        return vec![nodes.to_vec()];
    }
    let mut out = Vec::new();
    for s in 0..l {
        for size in 1..=l {
            let internal = (0..size - 1).all(|i| gap(s + i) < k);
            let closed_before = gap(s + l - 1) >= k;
            let closed_after = gap(s + size - 1) >= k;
            if internal && closed_before && closed_after {
                out.push((0..size).map(|i| nodes[(s + i) % l]).collect());
            }
        }
    }
    out
}

fn brute_movable(n: usize, k: usize, links: &[Vec<usize>], j: usize) -> bool {
    let head = *links[j].last().unwrap();
    let next_tail = links[(j + 1) % links.len()][0];
    let g = if links.len() == 1 && links[0].len() == 1 { n } else { d(n, head, next_tail) };
    g > k
}

/// Nominee sets as node sets, links listed clockwise.
pub fn brute_nominees(n: usize, k: usize, links: &[Vec<usize>], j: usize) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let all: BTreeSet<usize> = links.iter().flatten().copied().collect();
    let head = |i: usize| *links[i].last().unwrap();
    let minus = |s: &BTreeSet<usize>| all.difference(s).copied().collect::<BTreeSet<_>>();
    if links[j].len() >= 2 {
        let cw = BTreeSet::from([head(j)]);
        return (cw.clone(), minus(&cw));
    }
    let m = links.len();
    let ks = |i: usize| (j + m * m - i) % m;
    let x = (1..m).find(|&i| links[ks(i)].len() >= 2);
    let Some(x) = x else {
        let cw = BTreeSet::from([head(j)]);
        return (cw.clone(), minus(&cw));
    };
    let movable: Vec<usize> = (1..=x).filter(|&y| brute_movable(n, k, links, ks(y))).collect();
    let heads = |a: usize, b: usize| (a..=b).map(|i| head(ks(i))).collect::<BTreeSet<_>>();
    match movable.last() {
        None => {
            let cw = heads(0, x);
            (cw.clone(), minus(&cw))
        }
        Some(&z) => (heads(0, z - 1), minus(&heads(z, x))),
    }
}

pub fn verify_klinks(max_n: usize, max_agents: usize) -> Result<usize, String> {
    let mut checked = 0;
    for n in 3..=max_n {
        for counts in count_vectors(n, max_agents) {
            if counts.iter().any(|&c| c > 1) {
                let cfg = cfg_from_counts(&counts);
                if decompose_klinks(&cfg, 1).is_ok() || elected_agent_set(&cfg, 1).is_ok() {
                    return Err(format!("{counts:?}: non-dispersed input accepted"));
                }
                continue;
            }
            let cfg = cfg_from_counts(&counts);
            let nodes: Vec<usize> = (0..n).filter(|&v| counts[v] == 1).collect();
            let id_at = |v: usize| cfg.agents_at(v)[0];
            for k in 1..=3 {
                let got = decompose_klinks(&cfg, k).map_err(|e| e.to_string())?;
                let mut want = brute_links(n, k, &nodes);
                want.sort_by_key(|link| link[0]);
                let got_nodes: Vec<Vec<usize>> =
                    got.iter().map(|l| l.agents.iter().map(|&a| cfg.node_of(a).unwrap()).collect()).collect();
                if got_nodes != want {
                    return Err(format!("links of {nodes:?} n={n} k={k}: got {got_nodes:?}, want {want:?}"));
                }
                for (j, link) in got.iter().enumerate() {
                    if link.tail != want[j][0] || link.head != *want[j].last().unwrap() || link.size != want[j].len() {
                        return Err(format!("link fields {link:?}"));
                    }
                    let mv = is_movable(&cfg, k, link).map_err(|e| e.to_string())?;
                    if mv != brute_movable(n, k, &want, j) {
                        return Err(format!("movable {link:?} n={n} k={k}: got {mv}"));
                    }
                    let pair = nominee_sets(&cfg, k, link).map_err(|e| e.to_string())?;
                    let (cw, ccw) = brute_nominees(n, k, &want, j);
                    let to_ids = |s: &BTreeSet<usize>| s.iter().map(|&v| id_at(v)).collect::<BTreeSet<AgentId>>();
                    if pair.ns_cw != to_ids(&cw) || pair.ns_ccw != to_ids(&ccw) {
                        return Err(format!("nominees of {link:?} in {nodes:?} n={n} k={k}: got {pair:?}"));
                    }
                }
                let eas = elected_agent_set(&cfg, k).map_err(|e| e.to_string())?;
                let want_eas: BTreeSet<AgentId> = (0..want.len())
                    .filter(|&j| brute_movable(n, k, &want, j))
                    .flat_map(|j| brute_nominees(n, k, &want, j).0)
                    .map(id_at)
                    .collect();
                if eas != want_eas {
                    return Err(format!("EAS of {nodes:?} n={n} k={k}: got {eas:?}, want {want_eas:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}
