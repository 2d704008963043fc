//! Interpolation weights, restriction and interpolate-and-correct.
//!
//! Weights live at coarse points in column form: slot `e` of coarse point
//! `(I, J)` is the weight with which that coarse value enters the fine point
//! `(2I+1, 2J)` east of it, slot `ne` the one for `(2I+1, 2J+1)`, and so on.
//! Restriction uses the same weights, so it is exactly the transpose of
//! interpolation.

use serde::{Deserialize, Serialize};

use super::field::GridFunction;
use super::stencil::{StencilField, C, E, N, NE, NW, S, SE, SW, W};
use crate::error::KernelError;
use crate::grid::GlobalGrid;

pub const INW: usize = 0;
pub const IN: usize = 1;
pub const INE: usize = 2;
pub const IW: usize = 3;
pub const IE: usize = 4;
pub const ISW: usize = 5;
pub const IS: usize = 6;
pub const ISE: usize = 7;

/// Fine-point offsets from `(2I, 2J)` for each weight slot.
pub const WEIGHT_OFFSETS: [(isize, isize); 8] = [
    (-1, 1),
    (0, 1),
    (1, 1),
    (-1, 0),
    (1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Relative threshold below which a collapsed diagonal counts as degenerate.
const DEGENERATE: f64 = 1e3 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InterpMode {
    Bilinear,
    OperatorInduced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterpField {
    coarse: GlobalGrid,
    fine: GlobalGrid,
    weights: Vec<[f64; 8]>,
    /// Fine points whose weights fell back to bilinear.
    pub fallbacks: Vec<(usize, usize)>,
}

impl InterpField {
    pub fn coarse_grid(&self) -> &GlobalGrid {
        &self.coarse
    }

    pub fn fine_grid(&self) -> &GlobalGrid {
        &self.fine
    }

    fn ncx(&self) -> usize {
        self.coarse.dims.get(0)
    }

    fn ncy(&self) -> usize {
        self.coarse.dims.get(1)
    }

    pub fn weights(&self, ci: usize, cj: usize) -> &[f64; 8] {
        &self.weights[cj * self.ncx() + ci]
    }

    pub fn weights_mut(&mut self, ci: usize, cj: usize) -> &mut [f64; 8] {
        let n = self.ncx();
        &mut self.weights[cj * n + ci]
    }

    /// Weight in `slot` of coarse point `(ci, cj)`, zero outside the coarse grid.
    #[inline]
    pub fn w(&self, ci: isize, cj: isize, slot: usize) -> f64 {
        if ci < 0 || cj < 0 || ci as usize >= self.ncx() || cj as usize >= self.ncy() {
            return 0.0;
        }
        self.weights(ci as usize, cj as usize)[slot]
    }

    /// Empty weights for a fine grid and its standard coarsening.
    pub fn zeros(fine: GlobalGrid) -> Result<Self, KernelError> {
        let coarse = fine.coarsen()?;
        Ok(InterpField {
            coarse,
            fine,
            weights: vec![[0.0; 8]; coarse.points()],
            fallbacks: Vec::new(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().flatten().all(|w| w.is_finite())
    }

    pub fn weight_range(&self) -> (f64, f64) {
        self.weights
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
                (lo.min(w), hi.max(w))
            })
    }
}

fn row_scale(r: &[f64; 9]) -> f64 {
    r.iter().map(|v| v.abs()).sum()
}

/// Which sides of an edge point's row lost their couplings to the Dirichlet
/// boundary: `perp` for the side that gets collapsed onto the diagonal, `par`
/// for the side along the coarse line.
#[derive(Clone, Copy, Default)]
struct Lost {
    perp: bool,
    par: bool,
}

/// Weights `(toward lower coarse, toward upper coarse)` for an edge fine point
/// lying on a coarse line in direction `dir` (0 = x, 1 = y).
///
/// Collapsing the perpendicular couplings onto the diagonal assumes the
/// solution is locally constant across the line. Next to a Dirichlet
/// boundary that coupling was eliminated into the diagonal, so its estimate
/// (the row excess, split by reflection if the row also lost a parallel
/// side) is taken back out of the collapsed diagonal.
fn collapse_edge(r: &[f64; 9], dir: usize, lost: Lost) -> Option<(f64, f64)> {
    let (lo, hi, mut cc, perp) = if dir == 0 {
        (
            r[W] + r[NW] + r[SW],
            r[E] + r[NE] + r[SE],
            r[C] + r[N] + r[S],
            r[S] + r[SW] + r[SE] + r[N] + r[NW] + r[NE],
        )
    } else {
        (
            r[S] + r[SW] + r[SE],
            r[N] + r[NW] + r[NE],
            r[C] + r[W] + r[E],
            r[W] + r[NW] + r[SW] + r[E] + r[NE] + r[SE],
        )
    };
    if lost.perp {
        let excess = r.iter().sum::<f64>().max(0.0);
        let share = if lost.par {
            let (p, q) = (perp.abs(), (lo + hi).abs());
            if p + q > 0.0 {
                p / (p + q)
            } else {
                0.0
            }
        } else {
            1.0
        };
        cc -= excess * share;
    }
    if cc.abs() < DEGENERATE * row_scale(r) || cc == 0.0 {
        return None;
    }
    Some((-lo / cc, -hi / cc))
}

/// Interpolation weights from a fine operator.
pub fn build_interp(a: &StencilField, mode: InterpMode) -> Result<InterpField, KernelError> {
    let fine = *a.grid();
    let mut p = InterpField::zeros(fine)?;
    let (nx, ny) = (a.nx(), a.ny());
    let (ncx, ncy) = (p.ncx(), p.ncy());

    // edge points on coarse rows: (2I+1, 2J)
    for cj in 0..ncy {
        for ci in 0..ncx {
            let (i, j) = (2 * ci + 1, 2 * cj);
            if i >= nx {
                continue;
            }
            let (lo, hi) = match mode {
                InterpMode::Bilinear => (0.5, 0.5),
                InterpMode::OperatorInduced => {
                    let lost = Lost {
                        perp: j == 0 || j + 1 == ny,
                        par: i + 1 == nx,
                    };
                    collapse_edge(&a.row9(i, j), 0, lost).unwrap_or_else(|| {
                        p.fallbacks.push((i, j));
                        (0.5, 0.5)
                    })
                }
            };
            p.weights_mut(ci, cj)[IE] = lo;
            if ci + 1 < ncx {
                p.weights_mut(ci + 1, cj)[IW] = hi;
            }
        }
    }
    // edge points on coarse columns: (2I, 2J+1)
    for cj in 0..ncy {
        for ci in 0..ncx {
            let (i, j) = (2 * ci, 2 * cj + 1);
            if j >= ny {
                continue;
            }
            let (lo, hi) = match mode {
                InterpMode::Bilinear => (0.5, 0.5),
                InterpMode::OperatorInduced => {
                    let lost = Lost {
                        perp: i == 0 || i + 1 == nx,
                        par: j + 1 == ny,
                    };
                    collapse_edge(&a.row9(i, j), 1, lost).unwrap_or_else(|| {
                        p.fallbacks.push((i, j));
                        (0.5, 0.5)
                    })
                }
            };
            p.weights_mut(ci, cj)[IN] = lo;
            if cj + 1 < ncy {
                p.weights_mut(ci, cj + 1)[IS] = hi;
            }
        }
    }
    // cell centres: (2I+1, 2J+1)
    for cj in 0..ncy {
        for ci in 0..ncx {
            let (i, j) = (2 * ci + 1, 2 * cj + 1);
            if i >= nx || j >= ny {
                continue;
            }
            let (ii, jj) = (ci as isize, cj as isize);
            let r = a.row9(i, j);
            let quarter = [0.25; 4];
            let w = match mode {
                InterpMode::Bilinear => quarter,
                InterpMode::OperatorInduced => {
                    if r[C].abs() < DEGENERATE * row_scale(&r) || r[C] == 0.0 {
                        p.fallbacks.push((i, j));
                        quarter
                    } else {
                        let sw = r[SW] + r[W] * p.w(ii, jj, IN) + r[S] * p.w(ii, jj, IE);
                        let se = r[SE] + r[E] * p.w(ii + 1, jj, IN) + r[S] * p.w(ii + 1, jj, IW);
                        let nw = r[NW] + r[W] * p.w(ii, jj + 1, IS) + r[N] * p.w(ii, jj + 1, IE);
                        let ne =
                            r[NE] + r[E] * p.w(ii + 1, jj + 1, IS) + r[N] * p.w(ii + 1, jj + 1, IW);
                        [-sw / r[C], -se / r[C], -nw / r[C], -ne / r[C]]
                    }
                }
            };
            p.weights_mut(ci, cj)[INE] = w[0];
            if ci + 1 < ncx {
                p.weights_mut(ci + 1, cj)[INW] = w[1];
            }
            if cj + 1 < ncy {
                p.weights_mut(ci, cj + 1)[ISE] = w[2];
            }
            if ci + 1 < ncx && cj + 1 < ncy {
                p.weights_mut(ci + 1, cj + 1)[ISW] = w[3];
            }
        }
    }
    if !p.fallbacks.is_empty() {
        log::info!(
            "{} interpolation point(s) on {} fell back to bilinear weights",
            p.fallbacks.len(),
            fine
        );
    }
    Ok(p)
}

/// `(P^T r)` at one coarse point. Needs `r` on the fine point `(2I, 2J)` and
/// its ghost ring.
#[inline]
pub fn restrict_at(p: &InterpField, r: &GridFunction, ci: usize, cj: usize) -> f64 {
    let w = p.weights(ci, cj);
    let (fi, fj) = (2 * ci as isize, 2 * cj as isize);
    let mut acc = r.at(fi, fj);
    for (slot, &(di, dj)) in WEIGHT_OFFSETS.iter().enumerate() {
        acc += w[slot] * r.at(fi + di, fj + dj);
    }
    acc
}

/// Restricts into the owned points of `bc`.
pub fn restrict_into(p: &InterpField, r: &GridFunction, bc: &mut GridFunction) {
    let pts: Vec<_> = bc.points().collect();
    for (ci, cj) in pts {
        bc.set(ci, cj, restrict_at(p, r, ci, cj));
    }
}

/// `b_c = P^T r` on a whole level.
pub fn restrict_residual(p: &InterpField, r: &GridFunction) -> Result<GridFunction, KernelError> {
    if r.extent().dims != p.fine.dims {
        return Err(KernelError::Shape(format!(
            "residual on {} does not match interpolation fine grid {}",
            r.extent().dims,
            p.fine
        )));
    }
    let mut bc = GridFunction::zeros_on(&p.coarse);
    restrict_into(p, r, &mut bc);
    Ok(bc)
}

/// New value of fine point `(i, j)` after adding the interpolated coarse
/// correction and, away from injected points, the local residual term `r/C`.
///
/// Needs `x_c` on the coarse neighbours of `(i, j)` and `x_f`, `r_f` at `(i, j)`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn interp_correct_at(
    p: &InterpField,
    a: &StencilField,
    xf: &GridFunction,
    xc: &GridFunction,
    rf: &GridFunction,
    i: usize,
    j: usize,
    with_residual: bool,
) -> f64 {
    let (ii, jj) = (i as isize, j as isize);
    let (ci, cj) = (ii.div_euclid(2), jj.div_euclid(2));
    let old = xf.at(ii, jj);
    let mut acc = match (i % 2, j % 2) {
        (0, 0) => return old + xc.at(ci, cj),
        (1, 0) => old + p.w(ci, cj, IE) * xc.at(ci, cj) + p.w(ci + 1, cj, IW) * xc.at(ci + 1, cj),
        (0, 1) => old + p.w(ci, cj, IN) * xc.at(ci, cj) + p.w(ci, cj + 1, IS) * xc.at(ci, cj + 1),
        _ => {
            old + p.w(ci, cj, INE) * xc.at(ci, cj)
                + p.w(ci + 1, cj, INW) * xc.at(ci + 1, cj)
                + p.w(ci, cj + 1, ISE) * xc.at(ci, cj + 1)
                + p.w(ci + 1, cj + 1, ISW) * xc.at(ci + 1, cj + 1)
        }
    };
    if with_residual {
        acc += rf.at(ii, jj) / a.center(i, j);
    }
    acc
}

/// `x_f += P x_c (+ r_f / C)` on a whole level.
pub fn interp_correct(
    xf: &GridFunction,
    xc: &GridFunction,
    rf: &GridFunction,
    a: &StencilField,
    p: &InterpField,
    with_residual: bool,
) -> Result<GridFunction, KernelError> {
    if xf.extent().dims != p.fine.dims || xc.extent().dims != p.coarse.dims {
        return Err(KernelError::Shape(
            "interpolation operands do not conform".into(),
        ));
    }
    let mut out = xf.clone();
    for (i, j) in xf.points() {
        if with_residual && a.center(i, j) == 0.0 {
            return Err(KernelError::ZeroCenter(i, j));
        }
        out.set(
            i,
            j,
            interp_correct_at(p, a, xf, xc, rf, i, j, with_residual),
        );
    }
    Ok(out)
}
