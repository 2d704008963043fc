mod common;

use common::Oracle;
use mgredist::grid::{
    agglomerate_blocks, level_grids, CoarsestRule, Dims, GlobalGrid, ProcessorGrid,
};
use mgredist::model::{t_agglomerate, t_exchange, t_vcycle, CycleModel, MachineParams, RedistMode};
use proptest::prelude::*;

fn model(grid: &[usize], procs: &[usize], mode: RedistMode) -> CycleModel {
    let grids = level_grids(&GlobalGrid::new(grid).unwrap(), CoarsestRule::default());
    let mut lp = vec![ProcessorGrid::new(procs).unwrap(); grids.len() - 1];
    lp.push(ProcessorGrid::single(grid.len()));
    CycleModel::from_assignment(&grids, &lp, mode, 2, 1)
}

#[test]
fn blue_waters_file_round_trips() {
    let m = MachineParams::blue_waters();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bw.machine");
    std::fs::write(&path, m.to_file_string()).unwrap();
    assert_eq!(MachineParams::load(&path).unwrap(), m);
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/bluewaters.machine");
    assert_eq!(MachineParams::load(fixture.as_ref()).unwrap(), m);
}

#[test]
fn machine_file_rejects_garbage() {
    assert!(MachineParams::parse("alpha_s = fast").is_err());
    assert!(
        MachineParams::parse("alpha_s = -1\nbeta_s_per_byte = 1\ngamma_s_per_flop = 1").is_err()
    );
}

#[test]
fn exchange_term_by_hand() {
    let m = MachineParams::blue_waters();
    let want = 4.0 * 0.65e-6 + 2.0 * (568.0 + 71.0) * 8.0 * 5.65e-9;
    assert!((t_exchange(&Dims::d2(568, 71), &m) - want).abs() < 1e-18);
}

#[test]
fn no_handoff_without_block() {
    let m = MachineParams::blue_waters();
    assert_eq!(t_agglomerate(None, RedistMode::NonRedundant, &m), 0.0);
    let p = ProcessorGrid::new(&[4, 4]).unwrap();
    let g = GlobalGrid::new(&[64, 64]).unwrap();
    let b = agglomerate_blocks(&p, &p, &g).unwrap();
    assert_eq!(t_agglomerate(Some(&b), RedistMode::Redundant, &m), 0.0);
}

#[test]
fn redundant_handoff_is_half() {
    let m = MachineParams::blue_waters();
    let b = agglomerate_blocks(
        &ProcessorGrid::new(&[16, 8]).unwrap(),
        &ProcessorGrid::new(&[16, 4]).unwrap(),
        &GlobalGrid::new(&[1136, 71]).unwrap(),
    )
    .unwrap();
    assert_eq!((b.block_size, b.local_points), (2, 71 * 18));
    let nr = t_agglomerate(Some(&b), RedistMode::NonRedundant, &m);
    let r = t_agglomerate(Some(&b), RedistMode::Redundant, &m);
    assert_eq!(nr, 2.0 * r);
}

#[test]
fn components_add_up() {
    let c = t_vcycle(
        &model(&[1025, 513], &[8, 4], RedistMode::NonRedundant),
        &MachineParams::blue_waters(),
    );
    let sum = c.smooth + c.residual + c.restrict + c.interp + c.agglomerate + c.cgsolve;
    assert_eq!(c.total, sum);
    assert!(c.messages > 0 && c.bytes > 0.0);
}

#[test]
fn zero_machine_costs_nothing() {
    let c = t_vcycle(
        &model(&[65, 65], &[2, 2], RedistMode::Redundant),
        &MachineParams::zero(),
    );
    assert_eq!(c.total, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_straight_line_oracle(
        nx in 3usize..3000, ny in 3usize..3000,
        px in 1usize..40, py in 1usize..40,
        redundant in any::<bool>(),
        a in 1e-8f64..1e-4, b in 1e-11f64..1e-7, g in 1e-12f64..1e-8,
    ) {
        let mode = if redundant { RedistMode::Redundant } else { RedistMode::NonRedundant };
        let cm = model(&[nx, ny], &[px, py], mode);
        let m = MachineParams::new(a, b, g).unwrap();
        let got = t_vcycle(&cm, &m);
        let grids: Vec<Dims> = level_grids(&GlobalGrid::new(&[nx, ny]).unwrap(), CoarsestRule::default())
            .iter().map(|g| g.dims).collect();
        let mut procs = vec![Dims::d2(px, py); grids.len() - 1];
        procs.push(Dims::d2(1, 1));
        let want = Oracle { alpha: a, beta: b, gamma: g, nu1: 2, nu2: 1, redundant }.vcycle(&grids, &procs);
        prop_assert_eq!(got.total.to_bits(), want[6].to_bits());
        prop_assert_eq!(got.cgsolve.to_bits(), want[5].to_bits());
    }

    #[test]
    fn monotone_in_machine_parameters(
        nx in 17usize..2000, ny in 17usize..2000, px in 1usize..16, py in 1usize..16,
        scale in 1.0f64..10.0, which in 0usize..3,
    ) {
        let cm = model(&[nx, ny], &[px, py], RedistMode::NonRedundant);
        let base = MachineParams::blue_waters();
        let mut up = base;
        match which {
            0 => up.alpha *= scale,
            1 => up.beta *= scale,
            _ => up.gamma *= scale,
        }
        prop_assert!(t_vcycle(&cm, &up).total >= t_vcycle(&cm, &base).total);
    }

    #[test]
    fn more_ranks_less_local_work(n in 65usize..2000, p in 1usize..8) {
        let m = MachineParams::blue_waters().compute_only();
        let few = t_vcycle(&model(&[n, n], &[p, p], RedistMode::NonRedundant), &m);
        let many = t_vcycle(&model(&[n, n], &[2 * p, 2 * p], RedistMode::NonRedundant), &m);
        prop_assert!(many.smooth <= few.smooth);
    }
}
