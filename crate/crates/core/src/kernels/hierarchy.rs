//! Multigrid hierarchy setup, the serial V-cycle and a plain-text dump format.
//!
//! Levels are stored finest first: `levels[0]` is the fine operator and the
//! last entry is the coarsest grid, which is solved directly.
//!
//! Dump format, one record per line, fields separated by single spaces:
//!
//! ```text
//! mgredist-hierarchy 1
//! cycle <nu1> <nu2> <with-residual|plain>
//! levels <count>
//! level <k> <nx> <ny> <5|9>
//! a <k> <i> <j> <slot> <value>      one line per stencil entry
//! p <k> <ci> <cj> <slot> <value>    weights from level k+1 into level k
//! ```
//!
//! Stencil slots follow `C W E S N SW SE NW NE`, interpolation slots
//! `NW N NE W E SW S SE`. Values are written in shortest round-trip form so a
//! load reproduces the dumped hierarchy bit for bit. Lines starting with `#`
//! are ignored.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cholesky::DenseCholesky;
use super::field::GridFunction;
use super::galerkin::{galerkin, to_dense};
use super::smooth::{check_whole, relax, residual};
use super::stencil::{StencilField, StencilPattern};
use super::transfer::{build_interp, interp_correct, restrict_residual, InterpField, InterpMode};
use crate::error::KernelError;
use crate::grid::{level_grids, CoarsestRule, GlobalGrid};

/// How the interpolated correction treats non-injected fine points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    /// `x += P x_c + r / C` away from coarse points.
    WithResidual,
    /// `x += P x_c`, the plain variational correction.
    Plain,
}

impl Correction {
    pub fn with_residual(self) -> bool {
        self == Correction::WithResidual
    }

    fn name(self) -> &'static str {
        match self {
            Correction::WithResidual => "with-residual",
            Correction::Plain => "plain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleConfig {
    pub nu1: usize,
    pub nu2: usize,
    pub correction: Correction,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            nu1: 2,
            nu2: 1,
            correction: Correction::WithResidual,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub a: StencilField,
    /// Interpolation from the next coarser level; `None` on the coarsest.
    pub p: Option<InterpField>,
}

impl Level {
    pub fn grid(&self) -> &GlobalGrid {
        self.a.grid()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MGHierarchy {
    pub levels: Vec<Level>,
    pub cycle: CycleConfig,
    coarse: DenseCholesky,
}

impl MGHierarchy {
    /// Builds interpolation and Galerkin operators down to the coarsest grid
    /// allowed by `rule`, then factors the coarsest operator.
    pub fn setup(
        a: StencilField,
        mode: InterpMode,
        rule: CoarsestRule,
        cycle: CycleConfig,
    ) -> Result<Self, KernelError> {
        let grids = level_grids(a.grid(), rule);
        let mut levels = Vec::with_capacity(grids.len());
        let mut current = a;
        for _ in 1..grids.len() {
            let p = build_interp(&current, mode)?;
            let next = galerkin(&current, &p)?;
            levels.push(Level {
                a: current,
                p: Some(p),
            });
            current = next;
        }
        levels.push(Level {
            a: current,
            p: None,
        });
        Self::from_levels(levels, cycle)
    }

    fn from_levels(levels: Vec<Level>, cycle: CycleConfig) -> Result<Self, KernelError> {
        let last = &levels[levels.len() - 1].a;
        let coarse = DenseCholesky::factor(&to_dense(last), last.grid().points())?;
        Ok(MGHierarchy {
            levels,
            cycle,
            coarse,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn grids(&self) -> Vec<GlobalGrid> {
        self.levels.iter().map(|l| *l.grid()).collect()
    }

    pub fn fine(&self) -> &StencilField {
        &self.levels[0].a
    }

    pub fn coarse_factor(&self) -> &DenseCholesky {
        &self.coarse
    }

    /// Direct solve on the coarsest grid.
    pub fn coarse_solve(&self, b: &GridFunction) -> GridFunction {
        let g = *self.levels[self.levels.len() - 1].grid();
        GridFunction::from_values(&g, &self.coarse.solve(&b.values()))
    }

    /// One V(nu1, nu2) cycle.
    pub fn vcycle(&self, x: &GridFunction, b: &GridFunction) -> Result<GridFunction, KernelError> {
        check_whole(self.fine(), x)?;
        check_whole(self.fine(), b)?;
        self.cycle_from(0, x.clone(), b)
    }

    fn cycle_from(
        &self,
        k: usize,
        mut x: GridFunction,
        b: &GridFunction,
    ) -> Result<GridFunction, KernelError> {
        let level = &self.levels[k];
        let Some(p) = &level.p else {
            return Ok(self.coarse_solve(b));
        };
        relax(&level.a, &mut x, b, self.cycle.nu1)?;
        let r = residual(&level.a, &x, b)?;
        let bc = restrict_residual(p, &r)?;
        let xc = GridFunction::zeros_on(p.coarse_grid());
        let xc = self.cycle_from(k + 1, xc, &bc)?;
        let mut x = interp_correct(
            &x,
            &xc,
            &r,
            &level.a,
            p,
            self.cycle.correction.with_residual(),
        )?;
        relax(&level.a, &mut x, b, self.cycle.nu2)?;
        Ok(x)
    }

    /// Runs `cycles` V-cycles and returns the iterate and the residual
    /// 2-norms before the first and after every cycle.
    pub fn solve(
        &self,
        x0: &GridFunction,
        b: &GridFunction,
        cycles: usize,
    ) -> Result<(GridFunction, Vec<f64>), KernelError> {
        let mut x = x0.clone();
        let mut hist = vec![residual(self.fine(), &x, b)?.norm2()];
        for _ in 0..cycles {
            x = self.vcycle(&x, b)?;
            hist.push(residual(self.fine(), &x, b)?.norm2());
        }
        Ok((x, hist))
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        let c = &self.cycle;
        writeln!(s, "mgredist-hierarchy 1").unwrap();
        writeln!(s, "cycle {} {} {}", c.nu1, c.nu2, c.correction.name()).unwrap();
        writeln!(s, "levels {}", self.levels.len()).unwrap();
        for (k, level) in self.levels.iter().enumerate() {
            let a = &level.a;
            writeln!(
                s,
                "level {k} {} {} {}",
                a.nx(),
                a.ny(),
                a.pattern().points()
            )
            .unwrap();
            for j in 0..a.ny() {
                for i in 0..a.nx() {
                    for (slot, v) in a.row(i, j).iter().enumerate() {
                        writeln!(s, "a {k} {i} {j} {slot} {v:e}").unwrap();
                    }
                }
            }
            if let Some(p) = &level.p {
                let cg = p.coarse_grid().dims;
                for cj in 0..cg.get(1) {
                    for ci in 0..cg.get(0) {
                        for (slot, v) in p.weights(ci, cj).iter().enumerate() {
                            writeln!(s, "p {k} {ci} {cj} {slot} {v:e}").unwrap();
                        }
                    }
                }
            }
        }
        s
    }

    pub fn load(text: &str) -> Result<Self, KernelError> {
        let mut cycle = None;
        let mut count = None;
        let mut levels: Vec<Level> = Vec::new();
        let mut seen_magic = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let err = |msg: String| KernelError::Format { line, msg };
            let t = raw.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = t.split_whitespace().collect();
            if !seen_magic {
                if f != ["mgredist-hierarchy", "1"] {
                    return Err(err("missing header 'mgredist-hierarchy 1'".into()));
                }
                seen_magic = true;
                continue;
            }
            let num = |k: usize| -> Result<usize, KernelError> {
                f.get(k)
                    .ok_or_else(|| err(format!("missing field {k}")))?
                    .parse::<usize>()
                    .map_err(|e| err(e.to_string()))
            };
            let val = |k: usize| -> Result<f64, KernelError> {
                let v = f
                    .get(k)
                    .ok_or_else(|| err(format!("missing field {k}")))?
                    .parse::<f64>()
                    .map_err(|e| err(e.to_string()))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err("non-finite value".into()))
                }
            };
            match f[0] {
                "cycle" => {
                    let correction = match f.get(3) {
                        Some(&"with-residual") => Correction::WithResidual,
                        Some(&"plain") => Correction::Plain,
                        other => return Err(err(format!("unknown correction {other:?}"))),
                    };
                    cycle = Some(CycleConfig {
                        nu1: num(1)?,
                        nu2: num(2)?,
                        correction,
                    });
                }
                "levels" => count = Some(num(1)?),
                "level" => {
                    if num(1)? != levels.len() {
                        return Err(err("levels out of order".into()));
                    }
                    let g = GlobalGrid::new(&[num(2)?, num(3)?])?;
                    let pattern = match num(4)? {
                        5 => StencilPattern::FivePoint,
                        9 => StencilPattern::NinePoint,
                        n => return Err(err(format!("unknown stencil size {n}"))),
                    };
                    if let Some(prev) = levels.last_mut() {
                        if prev.p.is_none() {
                            prev.p = Some(InterpField::zeros(*prev.grid())?);
                        }
                        if prev.p.as_ref().unwrap().coarse_grid() != &g {
                            return Err(err(format!("level grid {g} is not the coarsening")));
                        }
                    }
                    levels.push(Level {
                        a: StencilField::zeros(pattern, g),
                        p: None,
                    });
                }
                "a" | "p" => {
                    let k = num(1)?;
                    let (i, j, slot, v) = (num(2)?, num(3)?, num(4)?, val(5)?);
                    let level = levels
                        .get_mut(k)
                        .ok_or_else(|| err(format!("unknown level {k}")))?;
                    if f[0] == "a" {
                        let a = &mut level.a;
                        if i >= a.nx() || j >= a.ny() || slot >= a.pattern().points() {
                            return Err(err("stencil entry out of range".into()));
                        }
                        a.row_mut(i, j)[slot] = v;
                    } else {
                        // weights may precede the next level header
                        if level.p.is_none() {
                            level.p = Some(InterpField::zeros(*level.grid())?);
                        }
                        let p = level.p.as_mut().unwrap();
                        let cg = p.coarse_grid().dims;
                        if i >= cg.get(0) || j >= cg.get(1) || slot >= 8 {
                            return Err(err("weight out of range".into()));
                        }
                        p.weights_mut(i, j)[slot] = v;
                    }
                }
                other => return Err(err(format!("unknown record {other:?}"))),
            }
        }
        let cycle = cycle.ok_or(KernelError::Format {
            line: 0,
            msg: "missing cycle record".into(),
        })?;
        if levels.is_empty() || count != Some(levels.len()) {
            return Err(KernelError::Format {
                line: 0,
                msg: format!(
                    "level count {count:?} does not match {} levels",
                    levels.len()
                ),
            });
        }
        if levels[levels.len() - 1].p.is_some() {
            return Err(KernelError::Format {
                line: 0,
                msg: "coarsest level carries interpolation weights".into(),
            });
        }
        Self::from_levels(levels, cycle)
    }
}

/// Per-cycle residual reduction factors from a residual history.
pub fn reduction_factors(history: &[f64]) -> Vec<f64> {
    history.windows(2).map(|w| w[1] / w[0]).collect()
}
