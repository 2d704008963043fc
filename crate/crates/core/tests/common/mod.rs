#![allow(dead_code)]

use mgredist::grid::{CoarsestRule, Dims, GlobalGrid};
use mgredist::kernels::galerkin::interp_column;
use mgredist::kernels::stencil::{C, E, N, S, W};
use mgredist::kernels::{
    discretize, CycleConfig, DiffusionProblem, GridFunction, InterpField, InterpMode, MGHierarchy,
    Rhs, StencilField, StencilPattern,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The anisotropic test problem with compensating cell aspect.
pub fn diffusion(n: usize, r: f64, aspect: f64, seed: u64) -> (StencilField, GridFunction) {
    let g = GlobalGrid::new(&[n, n]).unwrap();
    let mut rng = rng(seed);
    let f = (0..g.points()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let p = DiffusionProblem::unit_square(g, r, Rhs::Sampled(f)).with_cell_aspect(aspect);
    (discretize(&p).unwrap(), p.rhs_field())
}

pub fn hierarchy(a: StencilField, mode: InterpMode, cycle: CycleConfig) -> MGHierarchy {
    MGHierarchy::setup(a, mode, CoarsestRule::default(), cycle).unwrap()
}

/// Five-point operator from random positive edge conductances, with the
/// Dirichlet edges kept in the diagonal. Symmetric positive definite.
pub fn random_spd(nx: usize, ny: usize, seed: u64) -> StencilField {
    let mut rng = rng(seed);
    let g = GlobalGrid::new(&[nx, ny]).unwrap();
    // ex[i][j]: edge between (i-1, j) and (i, j), i = 0..=nx
    let ex: Vec<Vec<f64>> = (0..=nx)
        .map(|_| (0..ny).map(|_| rng.gen_range(0.1..10.0)).collect())
        .collect();
    let ey: Vec<Vec<f64>> = (0..nx)
        .map(|_| (0..=ny).map(|_| rng.gen_range(0.1..10.0)).collect())
        .collect();
    let mut a = StencilField::zeros(StencilPattern::FivePoint, g);
    for j in 0..ny {
        for i in 0..nx {
            let (w, e, s, n) = (ex[i][j], ex[i + 1][j], ey[i][j], ey[i][j + 1]);
            let row = a.row_mut(i, j);
            row[C] = w + e + s + n;
            row[W] = if i > 0 { -w } else { 0.0 };
            row[E] = if i + 1 < nx { -e } else { 0.0 };
            row[S] = if j > 0 { -s } else { 0.0 };
            row[N] = if j + 1 < ny { -n } else { 0.0 };
        }
    }
    a
}

pub fn dense_a(a: &StencilField) -> DMatrix<f64> {
    let n = a.grid().points();
    DMatrix::from_row_slice(n, n, &mgredist::kernels::to_dense(a))
}

/// Dense interpolation matrix, fine points by coarse points, first index fastest.
pub fn dense_p(p: &InterpField) -> DMatrix<f64> {
    let f = p.fine_grid().dims;
    let c = p.coarse_grid().dims;
    let mut m = DMatrix::zeros(f.product(), c.product());
    for cj in 0..c.get(1) {
        for ci in 0..c.get(0) {
            for (i, j, w) in interp_column(p, ci, cj) {
                m[(j * f.get(0) + i, cj * c.get(0) + ci)] = w;
            }
        }
    }
    m
}

pub fn to_vec(f: &GridFunction) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_vec(f.values())
}

pub fn random_field(g: &GlobalGrid, seed: u64) -> GridFunction {
    let mut rng = rng(seed);
    let v: Vec<f64> = (0..g.points()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    GridFunction::from_values(g, &v)
}

pub fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.amax().max(f64::MIN_POSITIVE);
    (a - b).amax() / scale
}

/// Straight-line re-evaluation of the V-cycle cost formulas from raw level
/// grids and per-level processor grids. Returns
/// `[smooth, residual, restrict, interp, agglomerate, cgsolve, total]`.
pub struct Oracle {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub nu1: usize,
    pub nu2: usize,
    pub redundant: bool,
}

fn clog2(n: usize) -> f64 {
    let mut k = 0;
    while (1usize << k) < n {
        k += 1;
    }
    k as f64
}

impl Oracle {
    fn exchange(&self, local: &[usize]) -> f64 {
        let d = local.len() as f64;
        let sum: usize = local.iter().sum();
        2.0 * d * self.alpha + 2.0 * sum as f64 * 8.0 * self.beta
    }

    fn handoff(&self, fine_p: &[usize], coarse_p: &[usize], coarse_n: &[usize]) -> f64 {
        let p: usize = fine_p
            .iter()
            .zip(coarse_p)
            .map(|(f, c)| f.div_ceil(*c))
            .product();
        if p <= 1 {
            return 0.0;
        }
        let nb: usize = coarse_n
            .iter()
            .zip(coarse_p)
            .map(|(n, c)| n.div_ceil(*c))
            .product();
        let pf = p as f64;
        let g = clog2(p) * self.alpha + nb as f64 * ((pf - 1.0) / pf) * 8.0 * self.beta;
        if self.redundant {
            g + 0.0
        } else {
            g + g
        }
    }

    pub fn vcycle(&self, grids: &[Dims], procs: &[Dims]) -> [f64; 7] {
        let last = grids.len() - 1;
        let nu = (self.nu1 + self.nu2) as f64;
        let (mut sm, mut re, mut rs, mut ip, mut ag) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut cg_handoff = 0.0;
        for k in 0..last {
            let g: Vec<usize> = grids[k].iter().collect();
            let p: Vec<usize> = procs[k].iter().collect();
            let local: Vec<usize> = g.iter().zip(&p).map(|(n, q)| n.div_ceil(*q)).collect();
            let n = local.iter().product::<usize>() as f64;
            let (ns, nc) = match (g.len(), k == 0) {
                (2, true) => (5.0, 2.0),
                (2, false) => (9.0, 4.0),
                _ => (27.0, 8.0),
            };
            let tex = self.exchange(&local);
            sm += 2.0 * ns * n * nu * self.gamma + nc * nu * tex;
            re += 2.0 * ns * n * self.gamma + tex;
            rs += 2.0 * ns * n * self.gamma;
            let cg: Vec<usize> = grids[k + 1].iter().collect();
            let cl: Vec<usize> = cg.iter().zip(&p).map(|(n, q)| n.div_ceil(*q)).collect();
            let ncp = cl.iter().product::<usize>() as f64;
            ip += if g.len() == 2 {
                let csum: usize = cl.iter().sum();
                (n + 20.0 * ncp + 6.0 * csum as f64) * self.gamma + tex
            } else {
                let (c0, c1, c2) = (cl[0] as f64, cl[1] as f64, cl[2] as f64);
                (n + 60.0 * ncp + 15.0 * c0 * c2 + 6.0 * c1 * c2 + c2) * self.gamma + tex
            };
            let next: Vec<usize> = procs[k + 1].iter().collect();
            let h = if next != p {
                self.handoff(&p, &next, &cg)
            } else {
                0.0
            };
            if k + 1 == last {
                cg_handoff = h;
                ag += 0.0;
            } else {
                ag += h;
            }
        }
        let nco = grids[last].product() as f64;
        let cgs = cg_handoff + nco * nco * self.gamma;
        let total = sm + re + rs + ip + ag + cgs;
        [sm, re, rs, ip, ag, cgs, total]
    }
}
