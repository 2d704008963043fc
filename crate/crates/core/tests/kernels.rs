mod common;

use common::{dense_a, dense_p, diffusion, max_rel, random_field, random_spd, rng, to_vec};
use mgredist::grid::{CoarsestRule, GlobalGrid};
use mgredist::kernels::{
    build_interp, galerkin, interp_correct, relax, residual, restrict_residual, Correction,
    CycleConfig, DenseCholesky, GridFunction, InterpMode, MGHierarchy,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

const MODES: [InterpMode; 2] = [InterpMode::Bilinear, InterpMode::OperatorInduced];

#[test]
fn galerkin_of_nine_point_matches_dense() {
    for n in [9, 11, 17] {
        let a = random_spd(n, n, n as u64);
        for mode in MODES {
            let p1 = build_interp(&a, mode).unwrap();
            let a1 = galerkin(&a, &p1).unwrap();
            let p2 = build_interp(&a1, mode).unwrap();
            let a2 = galerkin(&a1, &p2).unwrap();
            let d = dense_p(&p2);
            let want = d.transpose() * dense_a(&a1) * &d;
            assert!(max_rel(&dense_a(&a2), &want) < 1e-12, "{n} {mode:?}");
            assert!(a2.max_asymmetry() <= 1e-12 * a2.max_abs());
        }
    }
}

#[test]
fn residual_matches_dense() {
    let a = random_spd(13, 7, 1);
    let g = *a.grid();
    let (x, b) = (random_field(&g, 2), random_field(&g, 3));
    let r = residual(&a, &x, &b).unwrap();
    let want = to_vec(&b) - dense_a(&a) * to_vec(&x);
    assert!((to_vec(&r) - want).amax() < 1e-12);
}

#[test]
fn restriction_is_interpolation_transpose() {
    let a = random_spd(15, 9, 4);
    for mode in MODES {
        let p = build_interp(&a, mode).unwrap();
        let r = random_field(a.grid(), 5);
        let bc = restrict_residual(&p, &r).unwrap();
        let want = dense_p(&p).transpose() * to_vec(&r);
        assert!((to_vec(&bc) - want).amax() < 1e-12);
    }
}

#[test]
fn interpolation_adds_p_times_coarse() {
    let a = random_spd(11, 11, 6);
    let p = build_interp(&a, InterpMode::OperatorInduced).unwrap();
    let xf = random_field(a.grid(), 7);
    let xc = random_field(p.coarse_grid(), 8);
    let zero = GridFunction::zeros_on(a.grid());
    let out = interp_correct(&xf, &xc, &zero, &a, &p, false).unwrap();
    let want = to_vec(&xf) + dense_p(&p) * to_vec(&xc);
    assert!((to_vec(&out) - want).amax() < 1e-12);
}

#[test]
fn cholesky_matches_nalgebra() {
    let mut r = rng(9);
    for n in [1, 4, 9, 25] {
        let m = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
        let spd = &m * m.transpose() + DMatrix::identity(n, n) * n as f64;
        let b = DVector::from_fn(n, |_, _| r.gen_range(-1.0..1.0));
        let row_major: Vec<f64> = spd.transpose().iter().copied().collect();
        let x = DenseCholesky::factor(&row_major, n)
            .unwrap()
            .solve(b.as_slice());
        let want = spd.clone().cholesky().unwrap().solve(&b);
        assert!((DVector::from_vec(x) - want).amax() < 1e-12);
    }
}

#[test]
fn cholesky_rejects_indefinite() {
    assert!(DenseCholesky::factor(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
}

fn energy(a: &DMatrix<f64>, e: &DVector<f64>) -> f64 {
    e.dot(&(a * e)).sqrt()
}

#[test]
fn two_level_error_energy_never_grows() {
    for seed in 0..5 {
        let a = random_spd(9, 9, 100 + seed);
        let da = dense_a(&a);
        let g = *a.grid();
        let b = random_field(&g, 200 + seed);
        let exact = da.clone().cholesky().unwrap().solve(&to_vec(&b));
        let cycle = CycleConfig {
            nu1: 1,
            nu2: 1,
            correction: Correction::Plain,
        };
        let h = MGHierarchy::setup(
            a.clone(),
            InterpMode::OperatorInduced,
            CoarsestRule { max_extent: 5 },
            cycle,
        )
        .unwrap();
        assert_eq!(h.num_levels(), 2);
        let mut x = GridFunction::zeros_on(&g);
        let mut prev = energy(&da, &(to_vec(&x) - &exact));
        for _ in 0..5 {
            x = h.vcycle(&x, &b).unwrap();
            let now = energy(&da, &(to_vec(&x) - &exact));
            assert!(now <= prev * (1.0 + 1e-12), "seed {seed}: {now} > {prev}");
            prev = now;
        }
    }
}

#[test]
fn smoothing_reduces_error_energy() {
    let a = random_spd(12, 10, 11);
    let da = dense_a(&a);
    let b = random_field(a.grid(), 12);
    let exact = da.clone().cholesky().unwrap().solve(&to_vec(&b));
    let mut x = GridFunction::zeros_on(a.grid());
    let mut prev = energy(&da, &exact);
    for _ in 0..4 {
        relax(&a, &mut x, &b, 1).unwrap();
        let now = energy(&da, &(to_vec(&x) - &exact));
        assert!(now < prev);
        prev = now;
    }
}

#[test]
fn zero_rhs_stays_zero() {
    let g = GlobalGrid::new(&[33, 33]).unwrap();
    let (a, _) = diffusion(33, 16.0, 16.0, 0);
    let h = MGHierarchy::setup(
        a,
        InterpMode::OperatorInduced,
        CoarsestRule::default(),
        CycleConfig::default(),
    )
    .unwrap();
    let zero = GridFunction::zeros_on(&g);
    let (x, hist) = h.solve(&zero, &zero, 3).unwrap();
    assert_eq!(x.max_abs(), 0.0);
    assert!(hist.iter().all(|&r| r == 0.0));
}

#[test]
fn compensated_problem_converges_fast() {
    let (a, b) = diffusion(65, 16.0, 16.0, 1);
    let h = MGHierarchy::setup(
        a,
        InterpMode::OperatorInduced,
        CoarsestRule::default(),
        CycleConfig::default(),
    )
    .unwrap();
    let (_, hist) = h
        .solve(&GridFunction::zeros_on(h.fine().grid()), &b, 8)
        .unwrap();
    assert!(mgredist::kernels::reduction_factors(&hist)
        .iter()
        .all(|&f| f < 0.1));
}

#[test]
fn dump_round_trips() {
    let (a, _) = diffusion(17, 2.0, 1.0, 0);
    let h = MGHierarchy::setup(
        a,
        InterpMode::OperatorInduced,
        CoarsestRule::default(),
        CycleConfig::default(),
    )
    .unwrap();
    assert_eq!(MGHierarchy::load(&h.dump()).unwrap(), h);
}
