//! Postal-model cost of a multigrid V-cycle with coarse-grid agglomeration.
//!
//! Every `t_*` function transcribes one term of the model literally, in the
//! printed operation order, so independent re-evaluations match bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::grid::{ceil_log2, Decomposition, Dims, GlobalGrid, ProcBlock, ProcessorGrid};

/// Bytes per grid value.
pub const WORD: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    /// Latency per message, seconds.
    pub alpha: f64,
    /// Inverse bandwidth, seconds per byte.
    pub beta: f64,
    /// Inverse flop rate, seconds per flop.
    pub gamma: f64,
}

impl MachineParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, ModelError> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::NegativeParam(name));
            }
        }
        Ok(MachineParams { alpha, beta, gamma })
    }

    /// Parameters measured on Blue Waters.
    pub fn blue_waters() -> Self {
        MachineParams {
            alpha: 0.65e-6,
            beta: 5.65e-9,
            gamma: 0.44e-9,
        }
    }

    pub fn zero() -> Self {
        MachineParams {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    /// Same machine with free communication.
    pub fn compute_only(&self) -> Self {
        MachineParams {
            alpha: 0.0,
            beta: 0.0,
            gamma: self.gamma,
        }
    }

    /// Parses `key = value` lines (`=`, `:` or whitespace separated) with
    /// keys `alpha_s`, `beta_s_per_byte` and `gamma_s_per_flop`. `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut vals: [Option<f64>; 3] = [None; 3];
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let t = raw.split('#').next().unwrap_or("").trim();
            if t.is_empty() {
                continue;
            }
            let (key, value) = t
                .split_once(['=', ':'])
                .or_else(|| t.split_once(char::is_whitespace))
                .ok_or_else(|| ModelError::MachineFormat {
                    line,
                    msg: format!("expected 'key = value', got {t:?}"),
                })?;
            let slot = match key.trim() {
                "alpha_s" => 0,
                "beta_s_per_byte" => 1,
                "gamma_s_per_flop" => 2,
                k => {
                    return Err(ModelError::MachineFormat {
                        line,
                        msg: format!("unknown key {k:?}"),
                    })
                }
            };
            if vals[slot].is_some() {
                return Err(ModelError::MachineFormat {
                    line,
                    msg: format!("duplicate key {:?}", key.trim()),
                });
            }
            let v = value
                .trim()
                .parse::<f64>()
                .map_err(|e| ModelError::MachineFormat {
                    line,
                    msg: format!("bad value {:?}: {e}", value.trim()),
                })?;
            vals[slot] = Some(v);
        }
        let get = |k: usize, name: &str| {
            vals[k].ok_or_else(|| ModelError::MachineFormat {
                line: 0,
                msg: format!("missing key {name}"),
            })
        };
        Self::new(
            get(0, "alpha_s")?,
            get(1, "beta_s_per_byte")?,
            get(2, "gamma_s_per_flop")?,
        )
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_string(&self) -> String {
        format!(
            "alpha_s = {:e}\nbeta_s_per_byte = {:e}\ngamma_s_per_flop = {:e}\n",
            self.alpha, self.beta, self.gamma
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RedistMode {
    /// Every block member receives the whole block problem and cycles on it.
    Redundant,
    /// One root per block cycles; the solution is scattered back.
    NonRedundant,
}

impl fmt::Display for RedistMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RedistMode::Redundant => "redundant",
            RedistMode::NonRedundant => "non-redundant",
        })
    }
}

/// Shape of one level on the processor grid that owns it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelShape {
    pub local_dims: Dims,
    pub global_dims: Dims,
    pub proc_dims: Dims,
    pub stencil_points: usize,
    pub colors: usize,
    pub nu1: usize,
    pub nu2: usize,
}

impl LevelShape {
    /// Balanced shape `ceil(N / p)`; the finest level carries the
    /// discretization stencil, coarser levels the Galerkin one.
    pub fn new(
        global: &GlobalGrid,
        procs: &ProcessorGrid,
        finest: bool,
        nu1: usize,
        nu2: usize,
    ) -> Self {
        let (stencil_points, colors) = match (global.dim(), finest) {
            (2, true) => (5, 2),
            (2, false) => (9, 4),
            _ => (27, 8),
        };
        LevelShape {
            local_dims: global.local_on(procs),
            global_dims: global.dims,
            proc_dims: procs.dims,
            stencil_points,
            colors,
            nu1,
            nu2,
        }
    }

    pub fn dim(&self) -> usize {
        self.local_dims.dim()
    }

    pub fn local_points(&self) -> usize {
        self.local_dims.product()
    }
}

/// Halo exchange of width one.
pub fn t_exchange(local: &Dims, m: &MachineParams) -> f64 {
    let d = local.dim() as f64;
    2.0 * d * m.alpha + 2.0 * local.sum() as f64 * WORD * m.beta
}

pub fn t_smooth(s: &LevelShape, m: &MachineParams) -> f64 {
    let ns = s.stencil_points as f64;
    let n = s.local_points() as f64;
    let nu = (s.nu1 + s.nu2) as f64;
    2.0 * ns * n * nu * m.gamma + s.colors as f64 * nu * t_exchange(&s.local_dims, m)
}

pub fn t_residual(s: &LevelShape, m: &MachineParams) -> f64 {
    let ns = s.stencil_points as f64;
    let n = s.local_points() as f64;
    2.0 * ns * n * m.gamma + t_exchange(&s.local_dims, m)
}

pub fn t_restrict(s: &LevelShape, m: &MachineParams) -> f64 {
    let ns = s.stencil_points as f64;
    let n = s.local_points() as f64;
    2.0 * ns * n * m.gamma
}

/// Interpolation and correction from `coarse_local` (coarse points per rank
/// on the same processor grid) into the level `fine`.
pub fn t_interp(fine: &Dims, coarse_local: &Dims, m: &MachineParams) -> f64 {
    let nf = fine.product() as f64;
    let c = coarse_local;
    if fine.dim() == 2 {
        let nc = c.product() as f64;
        (nf + 20.0 * nc + 6.0 * c.sum() as f64) * m.gamma + t_exchange(fine, m)
    } else {
        let (c0, c1, c2) = (c.get(0) as f64, c.get(1) as f64, c.get(2) as f64);
        let nc = c.product() as f64;
        (nf + 60.0 * nc + 15.0 * c0 * c2 + 6.0 * c1 * c2 + c2) * m.gamma + t_exchange(fine, m)
    }
}

/// Tree gather (or allgather) of a block's coarse problem.
pub fn t_gather(block: &ProcBlock, m: &MachineParams) -> f64 {
    let p = block.block_size as f64;
    let nb = block.local_points as f64;
    ceil_log2(block.block_size) as f64 * m.alpha + nb * ((p - 1.0) / p) * WORD * m.beta
}

pub fn t_scatter(block: &ProcBlock, mode: RedistMode, m: &MachineParams) -> f64 {
    match mode {
        RedistMode::Redundant => 0.0,
        RedistMode::NonRedundant => t_gather(block, m),
    }
}

/// Gather plus scatter when the level hands its coarse problem to fewer
/// ranks; `None` when the processor grid does not change.
pub fn t_agglomerate(block: Option<&ProcBlock>, mode: RedistMode, m: &MachineParams) -> f64 {
    match block {
        Some(b) if b.block_size > 1 => t_gather(b, m) + t_scatter(b, mode, m),
        _ => 0.0,
    }
}

/// Agglomeration onto the coarsest grid (if it happens there) plus the
/// Cholesky triangular solves.
pub fn t_cgsolve(
    coarse: &GlobalGrid,
    block: Option<&ProcBlock>,
    mode: RedistMode,
    m: &MachineParams,
) -> f64 {
    let n = coarse.points() as f64;
    t_agglomerate(block, mode, m) + n * n * m.gamma
}

/// One non-coarsest level of a modelled V-cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelLevel {
    pub shape: LevelShape,
    /// Local coarse dims used by interpolation, on this level's processor grid.
    pub coarse_local: Dims,
    /// Block parameters when the next coarser level lives on fewer ranks.
    pub agglomerate: Option<ProcBlock>,
}

/// Everything the cost model needs about one V-cycle under a fixed plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleModel {
    /// Finest first, excluding the coarsest grid.
    pub levels: Vec<ModelLevel>,
    pub coarsest: GlobalGrid,
    /// Agglomeration performed at the coarsest grid itself.
    pub coarse_block: Option<ProcBlock>,
    pub mode: RedistMode,
}

impl CycleModel {
    /// Builds the model for levels `grids` (finest first) where
    /// `procs[k]` owns `grids[k]`. The last grid is solved directly.
    pub fn from_assignment(
        grids: &[GlobalGrid],
        procs: &[ProcessorGrid],
        mode: RedistMode,
        nu1: usize,
        nu2: usize,
    ) -> Self {
        assert_eq!(grids.len(), procs.len());
        let last = grids.len() - 1;
        let mut levels = Vec::with_capacity(last);
        let mut coarse_block = None;
        for k in 0..last {
            let shape = LevelShape::new(&grids[k], &procs[k], k == 0, nu1, nu2);
            let coarse_local = grids[k + 1].local_on(&procs[k]);
            let block = if procs[k + 1] != procs[k] {
                Some(
                    crate::grid::agglomerate_blocks(&procs[k], &procs[k + 1], &grids[k + 1])
                        .expect("processor grids shrink along a plan"),
                )
            } else {
                None
            };
            let agglomerate = if k + 1 == last {
                coarse_block = block;
                None
            } else {
                block
            };
            levels.push(ModelLevel {
                shape,
                coarse_local,
                agglomerate,
            });
        }
        CycleModel {
            levels,
            coarsest: grids[last],
            coarse_block,
            mode,
        }
    }
}

/// Level-by-level model costs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelCost {
    pub smooth: f64,
    pub residual: f64,
    pub restrict: f64,
    pub interp: f64,
    pub agglomerate: f64,
}

impl LevelCost {
    pub fn of(level: &ModelLevel, mode: RedistMode, m: &MachineParams) -> Self {
        LevelCost {
            smooth: t_smooth(&level.shape, m),
            residual: t_residual(&level.shape, m),
            restrict: t_restrict(&level.shape, m),
            interp: t_interp(&level.shape.local_dims, &level.coarse_local, m),
            agglomerate: t_agglomerate(level.agglomerate.as_ref(), mode, m),
        }
    }

    /// Sum in the fixed order smooth, residual, restrict, interp, agglomerate.
    pub fn total(&self) -> f64 {
        self.smooth + self.residual + self.restrict + self.interp + self.agglomerate
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub smooth: f64,
    pub residual: f64,
    pub restrict: f64,
    pub interp: f64,
    pub agglomerate: f64,
    pub cgsolve: f64,
    pub total: f64,
    /// Messages implied by the exchange and collective terms, per rank
    /// along the critical path.
    pub messages: u64,
    /// Bytes implied by the same terms.
    pub bytes: f64,
}

/// Messages and bytes the model charges for one halo exchange.
pub fn exchange_traffic(local: &Dims) -> (u64, f64) {
    (2 * local.dim() as u64, 2.0 * local.sum() as f64 * WORD)
}

/// Messages and bytes the model charges for one gather.
pub fn gather_traffic(block: &ProcBlock) -> (u64, f64) {
    let p = block.block_size as f64;
    (
        ceil_log2(block.block_size) as u64,
        block.local_points as f64 * ((p - 1.0) / p) * WORD,
    )
}

fn agglomerate_traffic(block: Option<&ProcBlock>, mode: RedistMode) -> (u64, f64) {
    match block {
        Some(b) if b.block_size > 1 => {
            let (msg, bytes) = gather_traffic(b);
            match mode {
                RedistMode::Redundant => (msg, bytes),
                RedistMode::NonRedundant => (2 * msg, 2.0 * bytes),
            }
        }
        _ => (0, 0.0),
    }
}

/// Whole-cycle cost. Each component sums its per-level terms from the finest
/// level down; `total` adds the six components in declaration order.
pub fn t_vcycle(model: &CycleModel, m: &MachineParams) -> CostBreakdown {
    let mut out = CostBreakdown::default();
    for level in &model.levels {
        let c = LevelCost::of(level, model.mode, m);
        out.smooth += c.smooth;
        out.residual += c.residual;
        out.restrict += c.restrict;
        out.interp += c.interp;
        out.agglomerate += c.agglomerate;
        let s = &level.shape;
        let exchanges = (s.colors * (s.nu1 + s.nu2) + 2) as u64;
        let (msg, bytes) = exchange_traffic(&s.local_dims);
        out.messages += exchanges * msg;
        out.bytes += exchanges as f64 * bytes;
        let (msg, bytes) = agglomerate_traffic(level.agglomerate.as_ref(), model.mode);
        out.messages += msg;
        out.bytes += bytes;
    }
    out.cgsolve = t_cgsolve(&model.coarsest, model.coarse_block.as_ref(), model.mode, m);
    let (msg, bytes) = agglomerate_traffic(model.coarse_block.as_ref(), model.mode);
    out.messages += msg;
    out.bytes += bytes;
    out.total =
        out.smooth + out.residual + out.restrict + out.interp + out.agglomerate + out.cgsolve;
    out
}

/// Kind of logged communication.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficKind {
    Exchange,
    Gather,
    Allgather,
    Scatter,
}

impl fmt::Display for TrafficKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficKind::Exchange => "exchange",
            TrafficKind::Gather => "gather",
            TrafficKind::Allgather => "allgather",
            TrafficKind::Scatter => "scatter",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traffic {
    pub messages: u64,
    pub bytes: u64,
}

impl Traffic {
    pub fn add(&mut self, messages: u64, bytes: u64) {
        self.messages += messages;
        self.bytes += bytes;
    }
}

/// Message and byte totals per `(level, kind)` that the model's accounting
/// implies for one V-cycle on the exact decomposition: one message of
/// `face * 8` bytes per task and existing neighbour for each of the
/// `n_c (nu1 + nu2) + 2` exchanges of a level (the interpolation exchange
/// moves coarse values), and `ceil(log2 p_block)` messages carrying every
/// non-root piece at each block root for gathers, allgathers and scatters.
/// Redundant coarse cycles are counted once per replica.
pub fn implied_traffic(
    decomp: &Decomposition,
    level_procs: &[ProcessorGrid],
    colors: &[usize],
    nu1: usize,
    nu2: usize,
    mode: RedistMode,
) -> BTreeMap<(usize, TrafficKind), Traffic> {
    let mut out: BTreeMap<(usize, TrafficKind), Traffic> = BTreeMap::new();
    let last = level_procs.len() - 1;
    let mut mult = 1u64;
    for l in 0..last {
        let procs = &level_procs[l];
        let exchanges = (colors[l] * (nu1 + nu2) + 1) as u64;
        let (faces, points) = face_totals(decomp, procs, l);
        let (cfaces, cpoints) = face_totals(decomp, procs, l + 1);
        out.entry((l, TrafficKind::Exchange)).or_default().add(
            mult * (exchanges * faces + cfaces),
            mult * 8 * (exchanges * points + cpoints),
        );
        let next = &level_procs[l + 1];
        if next == procs {
            continue;
        }
        let mut replicas = 1u64;
        for coarse_coord in next.coords() {
            let members = decomp.block_members(procs, next, &coarse_coord);
            let p = members.len();
            replicas = p as u64;
            let pieces: u64 = members[1..]
                .iter()
                .map(|c| decomp.extent(procs, l + 1, c).dims.product() as u64)
                .sum();
            let messages = ceil_log2(p) as u64;
            let kinds: &[TrafficKind] = match mode {
                RedistMode::Redundant => &[TrafficKind::Allgather],
                RedistMode::NonRedundant => &[TrafficKind::Gather, TrafficKind::Scatter],
            };
            for &k in kinds {
                out.entry((l, k))
                    .or_default()
                    .add(mult * messages, mult * 8 * pieces);
            }
        }
        if mode == RedistMode::Redundant {
            mult *= replicas;
        }
    }
    out.retain(|_, t| t.messages > 0 || t.bytes > 0);
    out
}

/// Number of (task, neighbour) pairs and the total face points they exchange.
fn face_totals(decomp: &Decomposition, procs: &ProcessorGrid, depth: usize) -> (u64, u64) {
    let mut faces = 0u64;
    let mut points = 0u64;
    for coord in procs.coords() {
        let ext = decomp.extent(procs, depth, &coord);
        for d in 0..procs.dim() {
            let face: usize = (0..procs.dim())
                .filter(|&e| e != d)
                .map(|e| ext.dims.get(e))
                .product();
            let k = coord.get(d);
            let n = (k > 0) as u64 + (k + 1 < procs.dims.get(d)) as u64;
            faces += n;
            points += n * face as u64;
        }
    }
    (faces, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::agglomerate_blocks;

    fn bw() -> MachineParams {
        MachineParams::blue_waters()
    }

    fn shape(local: &[usize], ns: usize, nc: usize, nu1: usize, nu2: usize) -> LevelShape {
        let d = Dims::new(local);
        LevelShape {
            local_dims: d,
            global_dims: d,
            proc_dims: Dims::filled(d.dim(), 1),
            stencil_points: ns,
            colors: nc,
            nu1,
            nu2,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn exchange_example() {
        let t = t_exchange(&Dims::d2(10, 10), &bw());
        assert!(close(t, 4.408e-6), "{t}");
        assert_eq!(t_exchange(&Dims::d2(10, 10), &MachineParams::zero()), 0.0);
        let m = MachineParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(t_exchange(&Dims::new(&[3, 3, 3]), &m), 6.0);
        assert_eq!(t_exchange(&Dims::d2(3, 3), &m), 4.0);
    }

    #[test]
    fn smooth_examples() {
        let m = bw().compute_only();
        let s = shape(&[568, 71], 9, 4, 2, 1);
        assert!(close(t_smooth(&s, &m), 2.0 * 9.0 * 40328.0 * 3.0 * 0.44e-9));
        assert_eq!(t_smooth(&shape(&[568, 71], 9, 4, 0, 0), &bw()), 0.0);
        let extra = t_smooth(&shape(&[8, 8], 9, 4, 2, 1), &bw())
            - t_smooth(&shape(&[8, 8], 9, 3, 2, 1), &bw());
        assert!(close(extra, 3.0 * t_exchange(&Dims::d2(8, 8), &bw())));
    }

    #[test]
    fn residual_restrict_examples() {
        let unit = MachineParams::new(0.0, 0.0, 1.0).unwrap();
        let s = shape(&[4, 4], 9, 4, 2, 1);
        assert_eq!(t_residual(&s, &unit), 288.0);
        assert_eq!(t_restrict(&s, &unit), 288.0);
        let comm = MachineParams::new(1e-6, 1e-9, 0.0).unwrap();
        assert_eq!(t_residual(&s, &comm), t_exchange(&s.local_dims, &comm));
        assert_eq!(t_restrict(&s, &comm), 0.0);
    }

    #[test]
    fn interp_examples() {
        let unit = MachineParams::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(t_interp(&Dims::d2(9, 9), &Dims::d2(5, 5), &unit), 641.0);
        assert_eq!(
            t_interp(&Dims::new(&[9, 9, 9]), &Dims::new(&[5, 5, 5]), &unit),
            8759.0
        );
        assert_eq!(
            t_interp(&Dims::d2(9, 9), &Dims::d2(5, 5), &MachineParams::zero()),
            0.0
        );
    }

    #[test]
    fn gather_and_agglomerate() {
        let g = GlobalGrid::new(&[1136, 71]).unwrap();
        let fine = ProcessorGrid::new(&[16, 8]).unwrap();
        let coarse = ProcessorGrid::new(&[16, 4]).unwrap();
        let b = agglomerate_blocks(&fine, &coarse, &g).unwrap();
        assert_eq!((b.block_size, b.local_points), (2, 1278));
        let m = bw();
        assert!(close(
            t_gather(&b, &m),
            m.alpha + 1278.0 * 0.5 * 8.0 * m.beta
        ));
        let nr = t_agglomerate(Some(&b), RedistMode::NonRedundant, &m);
        let r = t_agglomerate(Some(&b), RedistMode::Redundant, &m);
        assert_eq!(nr, 2.0 * r);
        assert_eq!(t_agglomerate(None, RedistMode::NonRedundant, &m), 0.0);
        let one = ProcBlock::identity(&coarse, &g);
        assert_eq!(t_gather(&one, &m), 0.0);
        // all-to-one from 64x32
        let big = agglomerate_blocks(
            &ProcessorGrid::new(&[64, 32]).unwrap(),
            &ProcessorGrid::new(&[1, 1]).unwrap(),
            &g,
        )
        .unwrap();
        let nb = g.points() as f64;
        let each = 11.0 * m.alpha + nb * (2047.0 / 2048.0) * 8.0 * m.beta;
        assert!(close(
            t_agglomerate(Some(&big), RedistMode::NonRedundant, &m),
            2.0 * each
        ));
    }

    #[test]
    fn cgsolve_examples() {
        let unit = MachineParams::new(0.0, 0.0, 1.0).unwrap();
        let g3 = GlobalGrid::new(&[3, 3]).unwrap();
        assert_eq!(t_cgsolve(&g3, None, RedistMode::Redundant, &unit), 81.0);
        let g71 = GlobalGrid::new(&[71, 71]).unwrap();
        let t = t_cgsolve(&g71, None, RedistMode::Redundant, &bw());
        assert!((t - 1.118e-2).abs() < 1e-5, "{t}");
        assert_eq!(
            t_cgsolve(&g3, None, RedistMode::Redundant, &MachineParams::zero()),
            0.0
        );
    }

    #[test]
    fn single_level_is_cgsolve_only() {
        let g = GlobalGrid::new(&[3, 3]).unwrap();
        let model = CycleModel::from_assignment(
            &[g],
            &[ProcessorGrid::single(2)],
            RedistMode::Redundant,
            2,
            1,
        );
        let c = t_vcycle(&model, &bw());
        assert_eq!(c.total, c.cgsolve);
        assert_eq!(c.total, 81.0 * bw().gamma);
    }

    #[test]
    fn machine_file_round_trip() {
        let text = "# Blue Waters\nalpha_s = 0.65e-6\nbeta_s_per_byte: 5.65e-9\ngamma_s_per_flop 0.44e-9 # per flop\n";
        assert_eq!(MachineParams::parse(text).unwrap(), bw());
        assert_eq!(MachineParams::parse(&bw().to_file_string()).unwrap(), bw());
        assert!(MachineParams::parse("alpha_s = 1\nbeta_s_per_byte = 1\n").is_err());
        assert!(
            MachineParams::parse("alpha_s = -1\nbeta_s_per_byte = 1\ngamma_s_per_flop = 1")
                .is_err()
        );
        assert!(MachineParams::parse("delta = 1").is_err());
    }
}
