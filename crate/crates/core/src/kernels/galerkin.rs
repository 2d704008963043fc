//! Variational coarse operators `P^T A P` computed stencil by stencil.

use super::stencil::{slot_of, StencilField, StencilPattern};
use super::transfer::{InterpField, WEIGHT_OFFSETS};
use crate::error::KernelError;

/// Nonzero entries `(fine i, fine j, value)` of the interpolation column of
/// coarse point `(ci, cj)`.
pub fn interp_column(p: &InterpField, ci: usize, cj: usize) -> Vec<(usize, usize, f64)> {
    let fine = p.fine_grid().dims;
    let (fi, fj) = (2 * ci, 2 * cj);
    let mut out = Vec::with_capacity(9);
    out.push((fi, fj, 1.0));
    let w = p.weights(ci, cj);
    for (slot, &(di, dj)) in WEIGHT_OFFSETS.iter().enumerate() {
        let (i, j) = (fi as isize + di, fj as isize + dj);
        if i < 0 || j < 0 || i as usize >= fine.get(0) || j as usize >= fine.get(1) {
            continue;
        }
        if w[slot] != 0.0 {
            out.push((i as usize, j as usize, w[slot]));
        }
    }
    out
}

/// Coarse nine-point operator `P^T A_f P`.
pub fn galerkin(a: &StencilField, p: &InterpField) -> Result<StencilField, KernelError> {
    if a.grid() != p.fine_grid() {
        return Err(KernelError::Shape(format!(
            "operator on {} does not match interpolation fine grid {}",
            a.grid(),
            p.fine_grid()
        )));
    }
    let coarse = *p.coarse_grid();
    let (ncx, ncy) = (coarse.dims.get(0), coarse.dims.get(1));
    let mut ac = StencilField::zeros(StencilPattern::NinePoint, coarse);
    // v = A phi_J lives on the 5x5 fine patch around 2J
    let mut v = [[0.0f64; 5]; 5];
    for cj in 0..ncy {
        for ci in 0..ncx {
            let col = interp_column(p, ci, cj);
            let (bi, bj) = (2 * ci as isize - 2, 2 * cj as isize - 2);
            for row in v.iter_mut() {
                row.fill(0.0);
            }
            for &(gi, gj, phi) in &col {
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        let (fi, fj) = (gi as isize - di, gj as isize - dj);
                        if !a.contains(fi, fj) {
                            continue;
                        }
                        // entry of row f in direction g - f
                        let aij = a.entry(fi as usize, fj as usize, di, dj);
                        if aij != 0.0 {
                            v[(fi - bi) as usize][(fj - bj) as usize] += aij * phi;
                        }
                    }
                }
            }
            for dk in -1isize..=1 {
                for dl in -1isize..=1 {
                    let (ki, kj) = (ci as isize + dk, cj as isize + dl);
                    if ki < 0 || kj < 0 || ki as usize >= ncx || kj as usize >= ncy {
                        continue;
                    }
                    let mut dot = 0.0;
                    for (fi, fj, phi) in interp_column(p, ki as usize, kj as usize) {
                        let (li, lj) = (fi as isize - bi, fj as isize - bj);
                        if (0..5).contains(&li) && (0..5).contains(&lj) {
                            dot += phi * v[li as usize][lj as usize];
                        }
                    }
                    ac.row_mut(ki as usize, kj as usize)[slot_of(-dk, -dl)] = dot;
                }
            }
        }
    }
    Ok(ac)
}

/// Dense row-major matrix of an operator, points numbered first index fastest.
pub fn to_dense(a: &StencilField) -> Vec<f64> {
    let (nx, ny) = (a.nx(), a.ny());
    let n = nx * ny;
    let mut m = vec![0.0; n * n];
    for j in 0..ny {
        for i in 0..nx {
            for di in -1isize..=1 {
                for dj in -1isize..=1 {
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if !a.contains(ni, nj) {
                        continue;
                    }
                    let col = nj as usize * nx + ni as usize;
                    m[(j * nx + i) * n + col] = a.entry(i, j, di, dj);
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GlobalGrid;
    use crate::kernels::stencil::{discretize, DiffusionProblem, Rhs, C, E, N, NE, S, W};
    use crate::kernels::transfer::{build_interp, InterpMode};

    fn laplacian(n: usize) -> StencilField {
        let g = GlobalGrid::new(&[n, n]).unwrap();
        discretize(&DiffusionProblem::unit_square(g, 1.0, Rhs::Constant(0.0))).unwrap()
    }

    #[test]
    fn bilinear_laplacian_gives_classical_coarse_stencil() {
        let a = laplacian(9);
        let p = build_interp(&a, InterpMode::Bilinear).unwrap();
        let ac = galerkin(&a, &p).unwrap();
        let r = ac.row9(2, 2);
        // [-1/4 -1/2 -1/4; -1/2 3 -1/2; -1/4 -1/2 -1/4]
        assert!((r[C] - 3.0).abs() < 1e-14);
        for s in [W, E, S, N] {
            assert!((r[s] + 0.5).abs() < 1e-14);
        }
        assert!((r[NE] + 0.25).abs() < 1e-14);
        assert!(ac.max_asymmetry() <= 1e-13 * ac.max_abs());
    }

    #[test]
    fn dense_matches_stencil_apply() {
        let a = laplacian(4);
        let m = to_dense(&a);
        assert_eq!(m[0], 4.0);
        assert_eq!(m[1], -1.0);
        assert_eq!(m[4], -1.0);
        assert_eq!(m[5], 0.0);
    }
}
