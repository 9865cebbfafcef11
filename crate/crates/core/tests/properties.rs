//! Property tests: frame invariance of the analysis, view reflection, move
//! translation, scenario round-trips, and k-link gap properties on exhaustive
//! small grids.

use std::collections::BTreeMap;

use dkd_core::analysis::{self, chains_of, class_of, cw_gaps, metrics_of};
use dkd_core::harness::parse_scenario;
use dkd_core::klink::KLinkLayout;
use dkd_core::ring::{delocalize_move, localize, relocalize_move};
use dkd_core::{
    classify_symmetry, global_direction, AdversarySpec, AgentId, AgentMemory, Cell, Direction, Edge, Feasibility,
    GlobalConfiguration, GlobalMove, Orientation, PublicMemory, RingView, Scenario, SymmetryClass,
};
use proptest::prelude::*;

fn read(id: AgentId) -> PublicMemory {
    AgentMemory::new(id).public()
}

prop_compose! {
    fn configuration()(n in 3usize..=14)(
        n in Just(n),
        nodes in prop::collection::vec(0..n, 1..=6),
        missing in prop::option::of(0..n),
    ) -> GlobalConfiguration {
        let mut cfg = GlobalConfiguration::from_placement(
            n,
            nodes.iter().enumerate().map(|(i, &v)| (AgentId(i as u64 + 1), v)),
        ).unwrap();
        cfg.set_missing_edge(missing.map(Edge)).unwrap();
        cfg
    }
}

fn kind(c: &SymmetryClass) -> u8 {
    match c {
        SymmetryClass::Symmetric { .. } => 0,
        SymmetryClass::Asymmetric { .. } => 1,
        SymmetryClass::Neutral => 2,
    }
}

fn chain_profile(cells: &[Cell]) -> Vec<(usize, Feasibility)> {
    let mut v: Vec<_> = chains_of(cells).unwrap().iter().map(|c| (c.length, class_of(c).feasibility)).collect();
    v.sort_by_key(|&(l, f)| (l, f == Feasibility::Fc));
    v
}

proptest! {
    #[test]
    fn analysis_is_frame_invariant(cfg in configuration(), pick in 0usize..6, cw in any::<bool>()) {
        let agent = AgentId((pick % cfg.agent_count()) as u64 + 1);
        let o = Orientation { local_cw_is_global_cw: cw };
        let local = localize(&cfg, agent, o, read).unwrap();
        let global = RingView::global(&cfg);

        let (ls, gs) = (classify_symmetry(&local), classify_symmetry(&global));
        prop_assert_eq!(kind(&ls), kind(&gs));
        if let (SymmetryClass::Asymmetric { direction: ld, .. }, SymmetryClass::Asymmetric { direction: gd, .. }) = (ls, gs) {
            prop_assert_eq!(o.to_global(ld), gd);
        }
        let (lg, gg) = (global_direction(&local), global_direction(&global));
        prop_assert_eq!(lg.map(|d| o.to_global(d)), gg);

        let (lm, gm) = (metrics_of(&local.cells), metrics_of(&global.cells));
        prop_assert_eq!((lm.phi, lm.z0, lm.z1, lm.psi, lm.chains_total), (gm.phi, gm.z0, gm.z1, gm.psi, gm.chains_total));
        let (lcw, lccw) = if cw { (lm.directed_cw, lm.directed_ccw) } else { (lm.directed_ccw, lm.directed_cw) };
        prop_assert_eq!((lcw, lccw), (gm.directed_cw, gm.directed_ccw));
        prop_assert_eq!(chain_profile(&local.cells), chain_profile(&global.cells));
    }

    #[test]
    fn reflection_swaps_orientation(cfg in configuration(), pick in 0usize..6) {
        let agent = AgentId((pick % cfg.agent_count()) as u64 + 1);
        let aligned = localize(&cfg, agent, Orientation::ALIGNED, read).unwrap();
        let flipped = localize(&cfg, agent, Orientation::FLIPPED, read).unwrap();
        prop_assert_eq!(&flipped.reflected(), &aligned);
        prop_assert_eq!(&aligned.reflected().reflected(), &aligned);
    }

    #[test]
    fn potentials(cfg in configuration()) {
        let cells = cfg.cells();
        let m = metrics_of(&cells);
        let n = cfg.n();
        let l = cfg.agent_count();
        prop_assert_eq!(m.phi, m.z0 + m.z1);
        prop_assert!(m.psi >= n.saturating_sub(l));
        if l <= n {
            prop_assert_eq!(m.psi == n - l, analysis::is_dispersed(&cfg));
        }
        // The all-occupied ring is neither a 0-chain, a 1-chain nor FC.
        if cells.contains(&Cell::Empty) {
            let all_fc = chains_of(&cells).unwrap().iter().all(|c| class_of(c).feasibility == Feasibility::Fc);
            prop_assert_eq!(m.phi == 0, all_fc);
        }
    }

    #[test]
    fn chains_partition_occupied_cells(cfg in configuration()) {
        let cells = cfg.cells();
        let n = cells.len();
        let chains = chains_of(&cells).unwrap();
        for (v, cell) in cells.iter().enumerate() {
            let owners = chains.iter().filter(|c| c.contains(n, v)).count();
            prop_assert_eq!(owners, usize::from(cell.is_occupied()));
        }
        for c in chains.iter().filter(|c| !c.degenerate) {
            prop_assert_eq!(cells[(c.start + n - 1) % n], Cell::Empty);
            prop_assert_eq!(cells[(c.end + 1) % n], Cell::Empty);
        }
    }

    #[test]
    fn move_translation_round_trips(cw in any::<bool>(), mv in 0u8..3) {
        let o = Orientation { local_cw_is_global_cw: cw };
        let g = [GlobalMove::Stay, GlobalMove::MoveGlobalCw, GlobalMove::MoveGlobalCcw][mv as usize];
        prop_assert_eq!(delocalize_move(o, relocalize_move(o, g)), g);
    }

    #[test]
    fn scenario_text_round_trips(
        n in 9usize..30,
        l in 3usize..6,
        k in 1usize..3,
        seed in any::<u64>(),
        adv in 0u8..5,
        p in 0.0f64..=1.0,
        cap in prop::option::of(1u64..100_000),
    ) {
        let adversary = match adv {
            0 => AdversarySpec::None,
            1 => AdversarySpec::Fixed(Edge((seed % n as u64) as usize)),
            2 => AdversarySpec::Scripted(BTreeMap::from([(seed % 7, Edge(1)), (seed % 7 + 3, Edge(0))])),
            3 => AdversarySpec::Random { p, seed },
            _ => AdversarySpec::Blocker,
        };
        prop_assume!(l <= n / k);
        let mut sc = Scenario::random(n, l, k, adversary, seed);
        sc.max_rounds = cap;
        prop_assert_eq!(parse_scenario(&sc.emit()).unwrap(), sc.clone());
        let json = serde_json::to_string(&sc).unwrap();
        prop_assert_eq!(serde_json::from_str::<Scenario>(&json).unwrap(), sc);
    }
}

/// Every dispersed placement of `l` agents with one at node 0.
fn dispersed_placements(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, l: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for v in from..n {
            cur.push(v);
            rec(n, l, v + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, l, 1, &mut vec![0], &mut out);
    out
}

fn k_dispersed(n: usize, k: usize, pos: &[usize]) -> bool {
    cw_gaps(n, pos).iter().all(|&g| g >= k)
}

#[test]
fn klink_gap_properties_exhaustive() {
    let mut checked = 0;
    for n in 3..=10 {
        for l in 1..=4.min(n) {
            for pos in dispersed_placements(n, l) {
                for k in 1..=3 {
                    let layout = KLinkLayout::new(n, k, pos.clone());
                    let gaps = cw_gaps(n, &layout.positions);

                    // Partition with intra gaps < k and inter gaps >= k.
                    let mut seen = vec![0; l];
                    for j in 0..layout.len() {
                        let members: Vec<usize> = layout.members(j).collect();
                        for &a in &members {
                            seen[a] += 1;
                        }
                        for w in members.windows(2) {
                            assert!(gaps[w[0]] < k);
                        }
                        if layout.len() > 1 {
                            assert!(gaps[layout.head(j)] >= k);
                        }
                    }
                    assert!(seen.iter().all(|&s| s == 1), "{pos:?} k={k}");

                    let movable = (0..layout.len()).any(|j| layout.is_movable(j));
                    let eas = layout.elected();
                    assert_eq!(movable, !eas.is_empty());
                    if n >= l * k && !k_dispersed(n, k, &pos) {
                        assert!(movable, "no movable link: n={n} k={k} {pos:?}");
                    }

                    // Moving exactly the elected set one step clockwise.
                    let moved: Vec<usize> = (0..l)
                        .map(|a| if eas.contains(&a) { (layout.positions[a] + 1) % n } else { layout.positions[a] })
                        .collect();
                    for a in 0..l {
                        let b = (a + 1) % l;
                        if l == 1 {
                            break;
                        }
                        let before = gaps[a];
                        let after = (moved[b] + n - moved[a]) % n;
                        if before >= k {
                            assert!(after >= k, "gap broke: n={n} k={k} {pos:?} agent {a}");
                        } else {
                            assert!(after >= before, "gap shrank: n={n} k={k} {pos:?} agent {a}");
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn global_direction_translates_through_orientation() {
    // n=12, chains (0:S,1:M), (5:S,6:M), (9:M,10:S): two clockwise, one not.
    let cfg = GlobalConfiguration::from_placement(
        12,
        [(1, 0), (2, 1), (3, 1), (4, 5), (5, 6), (6, 6), (7, 9), (8, 9), (9, 10)].map(|(a, v)| (AgentId(a), v)),
    )
    .unwrap();
    assert_eq!(global_direction(&RingView::global(&cfg)), Some(Direction::Cw));
    let v = localize(&cfg, AgentId(4), Orientation::FLIPPED, read).unwrap();
    assert_eq!(global_direction(&v), Some(Direction::Ccw));
}
