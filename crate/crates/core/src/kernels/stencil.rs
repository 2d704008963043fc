use serde::{Deserialize, Serialize};

use super::field::GridFunction;
use crate::error::KernelError;
use crate::grid::GlobalGrid;

/// Compass slots of a stencil row. Off-diagonal slots hold the actual matrix
/// entries (negative for M-matrices).
pub const C: usize = 0;
pub const W: usize = 1;
pub const E: usize = 2;
pub const S: usize = 3;
pub const N: usize = 4;
pub const SW: usize = 5;
pub const SE: usize = 6;
pub const NW: usize = 7;
pub const NE: usize = 8;

/// Offsets `(di, dj)` of each compass slot.
pub const OFFSETS: [(isize, isize); 9] = [
    (0, 0),
    (-1, 0),
    (1, 0),
    (0, -1),
    (0, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (1, 1),
];

pub fn slot_of(di: isize, dj: isize) -> usize {
    OFFSETS
        .iter()
        .position(|&o| o == (di, dj))
        .expect("offset within one point")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilPattern {
    FivePoint,
    NinePoint,
}

impl StencilPattern {
    pub fn points(self) -> usize {
        match self {
            StencilPattern::FivePoint => 5,
            StencilPattern::NinePoint => 9,
        }
    }

    /// Gauss-Seidel colours that make same-colour updates independent.
    pub fn colors(self) -> usize {
        match self {
            StencilPattern::FivePoint => 2,
            StencilPattern::NinePoint => 4,
        }
    }

    #[inline]
    pub fn color_of(self, i: usize, j: usize) -> usize {
        match self {
            StencilPattern::FivePoint => (i + j) % 2,
            StencilPattern::NinePoint => (i % 2) + 2 * (j % 2),
        }
    }
}

/// Per-point operator coefficients on a whole 2D level.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilField {
    pattern: StencilPattern,
    grid: GlobalGrid,
    coef: Vec<f64>,
}

impl StencilField {
    pub fn zeros(pattern: StencilPattern, grid: GlobalGrid) -> Self {
        assert_eq!(grid.dim(), 2, "numerics are two-dimensional");
        StencilField {
            pattern,
            grid,
            coef: vec![0.0; grid.points() * pattern.points()],
        }
    }

    pub fn pattern(&self) -> StencilPattern {
        self.pattern
    }

    pub fn grid(&self) -> &GlobalGrid {
        &self.grid
    }

    pub fn nx(&self) -> usize {
        self.grid.dims.get(0)
    }

    pub fn ny(&self) -> usize {
        self.grid.dims.get(1)
    }

    pub fn contains(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx() && (j as usize) < self.ny()
    }

    #[inline]
    pub fn row(&self, i: usize, j: usize) -> &[f64] {
        let n = self.pattern.points();
        let k = (j * self.nx() + i) * n;
        &self.coef[k..k + n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let n = self.pattern.points();
        let k = (j * self.nx() + i) * n;
        &mut self.coef[k..k + n]
    }

    /// The row padded to nine slots (corners zero for five-point rows).
    #[inline]
    pub fn row9(&self, i: usize, j: usize) -> [f64; 9] {
        let mut out = [0.0; 9];
        let r = self.row(i, j);
        out[..r.len()].copy_from_slice(r);
        out
    }

    /// Matrix entry between point `(i, j)` and its neighbour at `(di, dj)`;
    /// zero outside the grid or outside the pattern.
    pub fn entry(&self, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let slot = slot_of(di, dj);
        if slot >= self.pattern.points() || !self.contains(i as isize + di, j as isize + dj) {
            return 0.0;
        }
        self.row(i, j)[slot]
    }

    pub fn center(&self, i: usize, j: usize) -> f64 {
        self.row(i, j)[C]
    }

    /// Largest `|A(i->j) - A(j->i)|` over all neighbour pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.ny() {
            for i in 0..self.nx() {
                for (slot, &(di, dj)) in OFFSETS.iter().enumerate().skip(1) {
                    if slot >= self.pattern.points() {
                        break;
                    }
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if !self.contains(ni, nj) {
                        continue;
                    }
                    let back = self.entry(ni as usize, nj as usize, -di, -dj);
                    worst = worst.max((self.row(i, j)[slot] - back).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.coef.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(A x)` at one owned point of `x`.
    #[inline]
    pub fn apply_at(&self, x: &GridFunction, i: usize, j: usize) -> f64 {
        let s = self.row(i, j);
        let (ii, jj) = (i as isize, j as isize);
        let mut acc = s[C] * x.at(ii, jj);
        acc += s[W] * x.at(ii - 1, jj);
        acc += s[E] * x.at(ii + 1, jj);
        acc += s[S] * x.at(ii, jj - 1);
        acc += s[N] * x.at(ii, jj + 1);
        if self.pattern == StencilPattern::NinePoint {
            acc += s[SW] * x.at(ii - 1, jj - 1);
            acc += s[SE] * x.at(ii + 1, jj - 1);
            acc += s[NW] * x.at(ii - 1, jj + 1);
            acc += s[NE] * x.at(ii + 1, jj + 1);
        }
        acc
    }

    /// `y = A x` on the owned points of `x`.
    pub fn apply(&self, x: &GridFunction) -> GridFunction {
        let mut y = GridFunction::zeros(*x.extent());
        for (i, j) in x.points() {
            y.set(i, j, self.apply_at(x, i, j));
        }
        y
    }
}

/// Right-hand side of the model diffusion problem.
#[derive(Clone, Debug)]
pub enum Rhs {
    Constant(f64),
    /// Point values in row-major order (first index fastest).
    Sampled(Vec<f64>),
    Function(fn(f64, f64) -> f64),
}

/// `-div(D grad u) = f` with `D = diag(1/r, r)` and `u = 0` on the boundary.
#[derive(Clone, Debug)]
pub struct DiffusionProblem {
    pub grid: GlobalGrid,
    pub r: f64,
    pub hx: f64,
    pub hy: f64,
    pub rhs: Rhs,
}

impl DiffusionProblem {
    /// Interior points of the unit square with spacings `1/(N+1)`.
    pub fn unit_square(grid: GlobalGrid, r: f64, rhs: Rhs) -> Self {
        DiffusionProblem {
            grid,
            r,
            hx: 1.0 / (grid.dims.get(0) + 1) as f64,
            hy: 1.0 / (grid.dims.get(1) + 1) as f64,
            rhs,
        }
    }

    /// Stretches the cells so that `hy / hx = aspect`, keeping `hx`.
    pub fn with_cell_aspect(mut self, aspect: f64) -> Self {
        self.hy = self.hx * aspect;
        self
    }

    /// Cell-integrated right-hand side.
    pub fn rhs_field(&self) -> GridFunction {
        let mut b = GridFunction::zeros_on(&self.grid);
        let nx = self.grid.dims.get(0);
        let area = self.hx * self.hy;
        let pts: Vec<_> = b.points().collect();
        for (i, j) in pts {
            let f = match &self.rhs {
                Rhs::Constant(v) => *v,
                Rhs::Sampled(v) => v[j * nx + i],
                Rhs::Function(f) => f((i + 1) as f64 * self.hx, (j + 1) as f64 * self.hy),
            };
            b.set(i, j, f * area);
        }
        b
    }
}

/// Five-point finite-volume operator of a [`DiffusionProblem`].
pub fn discretize(p: &DiffusionProblem) -> Result<StencilField, KernelError> {
    if !(p.r > 0.0) || !p.r.is_finite() {
        return Err(KernelError::BadAnisotropy(p.r));
    }
    if p.grid.dim() != 2 || p.grid.dims.smallest() < 3 {
        return Err(KernelError::Shape(format!(
            "discretization needs a 2D grid of at least 3x3, got {}",
            p.grid
        )));
    }
    let mut a = StencilField::zeros(StencilPattern::FivePoint, p.grid);
    let wx = -(1.0 / p.r) * p.hy / p.hx;
    let wy = -p.r * p.hx / p.hy;
    let center = -(wx + wx + wy + wy);
    let (nx, ny) = (a.nx(), a.ny());
    for j in 0..ny {
        for i in 0..nx {
            let row = a.row_mut(i, j);
            row[C] = center;
            row[W] = if i > 0 { wx } else { 0.0 };
            row[E] = if i + 1 < nx { wx } else { 0.0 };
            row[S] = if j > 0 { wy } else { 0.0 };
            row[N] = if j + 1 < ny { wy } else { 0.0 };
        }
    }
    Ok(a)
}
