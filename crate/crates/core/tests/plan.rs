use std::collections::HashMap;

use mgredist::grid::{GlobalGrid, ProcessorGrid};
use mgredist::model::{MachineParams, RedistMode};
use mgredist::plan::{
    enumerate_coarse_grids, parse_path_line, parse_paths, Heuristic, PlanConfig, Planner,
    RedistState,
};

fn pg(x: usize, y: usize) -> ProcessorGrid {
    ProcessorGrid::new(&[x, y]).unwrap()
}

fn planner(grid: [usize; 2], procs: [usize; 2], mode: RedistMode) -> Planner {
    let cfg = PlanConfig {
        mode,
        ..PlanConfig::default()
    };
    Planner::new(
        GlobalGrid::new(&grid).unwrap(),
        ProcessorGrid::new(&procs).unwrap(),
        MachineParams::blue_waters(),
        cfg,
    )
    .unwrap()
}

fn weak64x32(mode: RedistMode) -> Planner {
    planner([568 * 64, 71 * 32], [64, 32], mode)
}

/// Every complete processor-grid sequence of the search graph.
fn all_sequences(p: &Planner) -> Vec<Vec<ProcessorGrid>> {
    fn walk(
        p: &Planner,
        s: RedistState,
        seq: &mut Vec<ProcessorGrid>,
        out: &mut Vec<Vec<ProcessorGrid>>,
    ) {
        if s.procs.is_single() {
            out.push(seq.clone());
            return;
        }
        let (depth, cands) = p.takeover(&s);
        for c in cands {
            seq.push(c.procs);
            walk(
                p,
                RedistState {
                    procs: c.procs,
                    depth,
                },
                seq,
                out,
            );
            seq.pop();
        }
    }
    let mut out = Vec::new();
    walk(p, p.initial(), &mut vec![p.fine_procs()], &mut out);
    out
}

#[test]
fn heuristic_never_overestimates() {
    for (grid, procs) in [
        ([2048, 1024], [16, 8]),
        ([4544, 568], [8, 8]),
        ([999, 3000], [4, 32]),
    ] {
        for mode in [RedistMode::NonRedundant, RedistMode::Redundant] {
            let p = planner(grid, procs, mode);
            let mut to_go: HashMap<RedistState, f64> = HashMap::new();
            for seq in all_sequences(&p) {
                let path = p.evaluate_path(&seq).unwrap();
                assert!(path.is_valid());
                for (k, st) in path.states.iter().enumerate() {
                    let rest: f64 = path.transitions[k..].iter().map(|t| t.cost).sum();
                    let key = RedistState {
                        procs: st.procs,
                        depth: st.depth,
                    };
                    let e = to_go.entry(key).or_insert(f64::INFINITY);
                    *e = e.min(rest);
                }
            }
            for (s, best) in to_go {
                assert!(p.heuristic(&s) <= best * (1.0 + 1e-12), "{s:?}");
            }
        }
    }
}

#[test]
fn astar_agrees_with_brute_force() {
    for (grid, procs) in [
        ([1024, 1024], [32, 32]),
        ([5000, 300], [16, 4]),
        ([77, 1234], [3, 12]),
    ] {
        for mode in [RedistMode::NonRedundant, RedistMode::Redundant] {
            let p = planner(grid, procs, mode);
            let (a, sa) = p.search_astar().unwrap();
            let (b, sb) = p.search_brute().unwrap();
            assert_eq!(a.total, b.total);
            assert!(sa.expanded_nodes <= sb.expanded_nodes);
            let best = all_sequences(&p)
                .iter()
                .map(|s| p.evaluate_path(s).unwrap().total)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(a.total, best);
        }
    }
}

#[test]
fn weighted_heuristic_still_finds_a_path() {
    let mut p = planner([4096, 4096], [16, 16], RedistMode::NonRedundant);
    p.cfg.heuristic = Heuristic::Weighted {
        grid_weight: 1.0,
        proc_weight: 1.0,
    };
    let (path, _) = p.search_astar().unwrap();
    assert!(path.is_valid());
    assert!(path.procs().last().unwrap().is_single());
}

#[test]
fn brute_force_visits_two_to_the_h_nodes() {
    for h in 0..=8 {
        let n = 1usize << h;
        for local in [4, 8, 16] {
            let p = planner([local * n, local * n], [n, 1], RedistMode::NonRedundant);
            assert_eq!(
                p.search_brute().unwrap().1.expanded_nodes,
                n as u64,
                "h={h} local={local}"
            );
        }
    }
}

#[test]
fn enumeration_of_the_wide_coarse_grid() {
    let c = enumerate_coarse_grids(&pg(16, 8), &GlobalGrid::new(&[1136, 71]).unwrap());
    let got: Vec<String> = c
        .iter()
        .map(|c| format!("{} {}", c.procs, c.local))
        .collect();
    assert_eq!(
        got,
        [
            "1x1 1136x71",
            "2x1 568x71",
            "4x1 284x71",
            "8x1 142x71",
            "16x1 71x71",
            "16x2 71x36",
            "16x4 71x18"
        ]
    );
}

#[test]
fn fixture_ranking_and_flags() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/weak64x32.paths"
    ))
    .unwrap();
    let paths = parse_paths(&text).unwrap();
    assert_eq!(paths.len(), 9);
    for mode in [RedistMode::NonRedundant, RedistMode::Redundant] {
        let p = weak64x32(mode);
        let eval: Vec<_> = paths
            .iter()
            .map(|(l, s)| (l.as_str(), p.evaluate_path(s).unwrap()))
            .collect();
        let cost = |l: &str| eval.iter().find(|(k, _)| *k == l).unwrap().1.total;
        for (l, e) in &eval {
            if *l != "1" {
                assert!(e.total > cost("1"));
            }
            if *l != "0" {
                assert!(e.total < cost("0"));
            }
            assert_eq!(e.is_valid(), *l != "3", "path {l}");
        }
        let (best, _) = p.search_astar().unwrap();
        assert!(eval.iter().all(|(_, e)| best.total <= e.total));
    }
}

#[test]
fn level_procs_follow_the_path() {
    let p = weak64x32(RedistMode::NonRedundant);
    let (path, _) = p.search_astar().unwrap();
    let lp = p.level_procs(&path);
    assert_eq!(lp.len(), p.grids.len());
    assert_eq!(lp[0], pg(64, 32));
    assert!(lp.last().unwrap().is_single());
    assert!(lp.windows(2).all(|w| w[1].dims.le(&w[0].dims)));
    let m = p.cycle_model(&path);
    let c = mgredist::model::t_vcycle(&m, &p.machine);
    assert!((c.total - path.total).abs() <= 1e-12 * path.total);
}

#[test]
fn single_rank_needs_no_redistribution() {
    let p = planner([129, 129], [1, 1], RedistMode::NonRedundant);
    let (path, stats) = p.search_astar().unwrap();
    assert_eq!(path.procs(), vec![pg(1, 1)]);
    assert_eq!(path.transitions.len(), 1);
    assert!(stats.expanded_nodes >= 1);
}

#[test]
fn evaluate_rejects_malformed_paths() {
    let p = weak64x32(RedistMode::NonRedundant);
    assert!(p.evaluate_path(&[pg(32, 32)]).is_err());
    assert!(p.evaluate_path(&[pg(64, 32), pg(64, 64)]).is_err());
    assert!(p.evaluate_path(&[pg(64, 32), pg(1, 1), pg(1, 1)]).is_err());
}

#[test]
fn path_lines_parse() {
    let (label, procs) = parse_path_line("7: 64x32 → 2x1 -> 1x1").unwrap();
    assert_eq!(label.as_deref(), Some("7"));
    assert_eq!(procs, vec![pg(64, 32), pg(2, 1), pg(1, 1)]);
    assert!(parse_path_line("64x32 -> 0x1").is_err());
    assert!(parse_path_line("64y32").is_err());
    let unlabeled = parse_paths("# c\n\n4x4 -> 1x1\n2x2\n").unwrap();
    assert_eq!(unlabeled[1].0, "1");
}
