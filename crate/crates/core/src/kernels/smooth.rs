//! Coloured Gauss-Seidel and residual kernels.
//!
//! Every kernel works on the owned points of a [`GridFunction`] and reads
//! neighbours through its ghost ring, so the same code runs on a whole level
//! or on one rank's block.

use super::field::GridFunction;
use super::stencil::{StencilField, StencilPattern, C, E, N, NE, NW, S, SE, SW, W};
use crate::error::KernelError;

/// Updates every owned point of colour `color` in place.
pub fn relax_color(
    a: &StencilField,
    x: &mut GridFunction,
    b: &GridFunction,
    color: usize,
) -> Result<(), KernelError> {
    let pattern = a.pattern();
    let pts: Vec<(usize, usize)> = x
        .points()
        .filter(|&(i, j)| pattern.color_of(i, j) == color)
        .collect();
    for (i, j) in pts {
        let s = a.row(i, j);
        if s[C] == 0.0 {
            return Err(KernelError::ZeroCenter(i, j));
        }
        let (ii, jj) = (i as isize, j as isize);
        let mut sum = b.get(i, j);
        sum -= s[W] * x.at(ii - 1, jj);
        sum -= s[E] * x.at(ii + 1, jj);
        sum -= s[S] * x.at(ii, jj - 1);
        sum -= s[N] * x.at(ii, jj + 1);
        if pattern == StencilPattern::NinePoint {
            sum -= s[SW] * x.at(ii - 1, jj - 1);
            sum -= s[SE] * x.at(ii + 1, jj - 1);
            sum -= s[NW] * x.at(ii - 1, jj + 1);
            sum -= s[NE] * x.at(ii + 1, jj + 1);
        }
        x.set(i, j, sum / s[C]);
    }
    Ok(())
}

/// `sweeps` coloured Gauss-Seidel sweeps on a whole level.
pub fn relax(
    a: &StencilField,
    x: &mut GridFunction,
    b: &GridFunction,
    sweeps: usize,
) -> Result<(), KernelError> {
    check_whole(a, x)?;
    check_whole(a, b)?;
    for _ in 0..sweeps {
        for color in 0..a.pattern().colors() {
            relax_color(a, x, b, color)?;
        }
    }
    Ok(())
}

/// `r = b - A x` on the owned points of `x`.
pub fn residual_into(a: &StencilField, x: &GridFunction, b: &GridFunction, r: &mut GridFunction) {
    let pts: Vec<_> = x.points().collect();
    for (i, j) in pts {
        let ax = a.apply_at(x, i, j);
        r.set(i, j, b.get(i, j) - ax);
    }
}

pub fn residual(
    a: &StencilField,
    x: &GridFunction,
    b: &GridFunction,
) -> Result<GridFunction, KernelError> {
    check_whole(a, x)?;
    check_whole(a, b)?;
    let mut r = GridFunction::zeros(*x.extent());
    residual_into(a, x, b, &mut r);
    Ok(r)
}

pub(crate) fn check_whole(a: &StencilField, f: &GridFunction) -> Result<(), KernelError> {
    if f.extent().dims != a.grid().dims || f.x0() != 0 || f.y0() != 0 {
        return Err(KernelError::Shape(format!(
            "function on {} does not cover operator grid {}",
            f.extent().dims,
            a.grid()
        )));
    }
    Ok(())
}
