//! C ABI over the planner, the cost model, the serial hierarchy and the
//! simulated-distributed V-cycle.
//!
//! Every fallible call returns an [`MgrStatus`]; on failure the message is
//! kept per thread and can be fetched with [`mgr_last_error`]. Handles are
//! opaque and owned by the caller, who releases them with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mgredist::grid::{CoarsestRule, GlobalGrid, ProcessorGrid};
use mgredist::kernels::{
    discretize, CycleConfig, DiffusionProblem, GridFunction, InterpMode, MGHierarchy, Rhs,
};
use mgredist::model::{t_vcycle, MachineParams, RedistMode};
use mgredist::plan::{parse_path_line, PlanConfig, Planner, RedistPath};
use mgredist::sim::{SimOptions, Simulator};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MgrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Plan = 3,
    Numerical = 4,
    Simulation = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MgrMode {
    NonRedundant = 0,
    Redundant = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MgrInterp {
    OperatorInduced = 0,
    Bilinear = 1,
}

/// Seconds per message, per byte and per flop.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgrMachine {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Model cost of one V-cycle, split by component.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MgrCost {
    pub smooth: f64,
    pub residual: f64,
    pub restrict_: f64,
    pub interp: f64,
    pub agglomerate: f64,
    pub cgsolve: f64,
    pub total: f64,
}

/// Search graph for one fine grid, processor grid and machine.
pub struct MgrPlanner(Planner);

/// A costed redistribution path.
pub struct MgrPath(RedistPath);

/// Serial multigrid hierarchy of the anisotropic diffusion test problem.
pub struct MgrHierarchy(MGHierarchy);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: MgrStatus, msg: impl Into<String>) -> MgrStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> MgrStatus) -> MgrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MgrStatus::Internal, msg)
        }
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(MgrStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr, $v:expr) => {{
        if $p.is_null() {
            return fail(MgrStatus::NullPointer, concat!(stringify!($p), " is null"));
        }
        unsafe { *$p = $v };
    }};
}

unsafe fn dims<'a>(p: *const usize, dim: usize) -> Option<&'a [usize]> {
    if p.is_null() || !(2..=3).contains(&dim) {
        return None;
    }
    Some(std::slice::from_raw_parts(p, dim))
}

fn mode_of(m: MgrMode) -> RedistMode {
    match m {
        MgrMode::NonRedundant => RedistMode::NonRedundant,
        MgrMode::Redundant => RedistMode::Redundant,
    }
}

/// Latest error message on this thread, or null. The string is owned by the
/// caller and released with [`mgr_string_free`].
#[no_mangle]
pub extern "C" fn mgr_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(s) => s.clone().into_raw(),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mgr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Blue Waters model parameters.
#[no_mangle]
pub extern "C" fn mgr_machine_blue_waters() -> MgrMachine {
    let m = MachineParams::blue_waters();
    MgrMachine {
        alpha: m.alpha,
        beta: m.beta,
        gamma: m.gamma,
    }
}

/// Creates a planner for a fine grid of `dim` extents on a processor grid of
/// `dim` extents, with two pre- and one post-smoothing sweep.
///
/// # Safety
/// `grid` and `procs` must point to `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mgr_planner_new(
    grid: *const usize,
    procs: *const usize,
    dim: usize,
    machine: MgrMachine,
    mode: MgrMode,
    out: *mut *mut MgrPlanner,
) -> MgrStatus {
    guard(|| {
        let (Some(g), Some(p)) = (dims(grid, dim), dims(procs, dim)) else {
            return fail(
                MgrStatus::InvalidArgument,
                "grid and procs need 2 or 3 extents",
            );
        };
        let built = (|| -> Result<Planner, String> {
            let g = GlobalGrid::new(g).map_err(|e| e.to_string())?;
            let p = ProcessorGrid::new(p).map_err(|e| e.to_string())?;
            let m = MachineParams::new(machine.alpha, machine.beta, machine.gamma)
                .map_err(|e| e.to_string())?;
            let cfg = PlanConfig {
                mode: mode_of(mode),
                ..PlanConfig::default()
            };
            Planner::new(g, p, m, cfg).map_err(|e| e.to_string())
        })();
        match built {
            Ok(pl) => {
                out!(out, Box::into_raw(Box::new(MgrPlanner(pl))));
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `p` must come from [`mgr_planner_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn mgr_planner_free(p: *mut MgrPlanner) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Cheapest path by A* (or exhaustive search when `brute` is set). The node
/// count lands in `expanded` when it is not null.
///
/// # Safety
/// `p` must be a live planner; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mgr_planner_search(
    p: *const MgrPlanner,
    brute: bool,
    out: *mut *mut MgrPath,
    expanded: *mut u64,
) -> MgrStatus {
    guard(|| {
        let pl = &deref!(p).0;
        let res = if brute {
            pl.search_brute()
        } else {
            pl.search_astar()
        };
        match res {
            Ok((path, stats)) => {
                if !expanded.is_null() {
                    *expanded = stats.expanded_nodes;
                }
                out!(out, Box::into_raw(Box::new(MgrPath(path))));
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::Plan, e.to_string()),
        }
    })
}

/// Costs a path written like `64x32 -> 16x1 -> 1x1`.
///
/// # Safety
/// `p` must be a live planner, `text` a NUL-terminated string; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn mgr_planner_evaluate(
    p: *const MgrPlanner,
    text: *const c_char,
    out: *mut *mut MgrPath,
) -> MgrStatus {
    guard(|| {
        let pl = &deref!(p).0;
        if text.is_null() {
            return fail(MgrStatus::NullPointer, "text is null");
        }
        let Ok(s) = CStr::from_ptr(text).to_str() else {
            return fail(MgrStatus::InvalidArgument, "path text is not UTF-8");
        };
        let res = parse_path_line(s).and_then(|(_, procs)| pl.evaluate_path(&procs));
        match res {
            Ok(path) => {
                out!(out, Box::into_raw(Box::new(MgrPath(path))));
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::Plan, e.to_string()),
        }
    })
}

/// Model cost of one V-cycle under `path`.
///
/// # Safety
/// `p` and `path` must be live handles from the same planner.
#[no_mangle]
pub unsafe extern "C" fn mgr_planner_cycle_cost(
    p: *const MgrPlanner,
    path: *const MgrPath,
    out: *mut MgrCost,
) -> MgrStatus {
    guard(|| {
        let pl = &deref!(p).0;
        let path = &deref!(path).0;
        let c = t_vcycle(&pl.cycle_model(path), &pl.machine);
        out!(
            out,
            MgrCost {
                smooth: c.smooth,
                residual: c.residual,
                restrict_: c.restrict,
                interp: c.interp,
                agglomerate: c.agglomerate,
                cgsolve: c.cgsolve,
                total: c.total,
            }
        );
        MgrStatus::Ok
    })
}

/// # Safety
/// `p` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_free(p: *mut MgrPath) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Sum of the transition costs in seconds, or NaN for a null handle.
///
/// # Safety
/// `p` must be a live path or null.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_total(p: *const MgrPath) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.total)
}

/// Number of processor grids on the path, or 0 for a null handle.
///
/// # Safety
/// `p` must be a live path or null.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_len(p: *const MgrPath) -> usize {
    p.as_ref().map_or(0, |p| p.0.states.len())
}

/// Whether every hop is a search successor.
///
/// # Safety
/// `p` must be a live path or null.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_valid(p: *const MgrPath) -> bool {
    p.as_ref().is_some_and(|p| p.0.is_valid())
}

/// Processor grid `index` of the path and the level where it takes over.
///
/// # Safety
/// `p` must be a live path; `procs` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_state(
    p: *const MgrPath,
    index: usize,
    procs: *mut usize,
    dim: usize,
    depth: *mut usize,
) -> MgrStatus {
    guard(|| {
        let path = &deref!(p).0;
        let Some(s) = path.states.get(index) else {
            return fail(
                MgrStatus::InvalidArgument,
                format!("index {index} out of range"),
            );
        };
        if dim != s.procs.dim() {
            return fail(
                MgrStatus::InvalidArgument,
                format!("path grids have {} extents", s.procs.dim()),
            );
        }
        if procs.is_null() {
            return fail(MgrStatus::NullPointer, "procs is null");
        }
        for (k, v) in s.procs.dims.iter().enumerate() {
            *procs.add(k) = v;
        }
        if !depth.is_null() {
            *depth = s.depth;
        }
        MgrStatus::Ok
    })
}

/// Path in arrow notation with ASCII arrows, owned by the caller.
///
/// # Safety
/// `p` must be a live path or null.
#[no_mangle]
pub unsafe extern "C" fn mgr_path_to_string(p: *const MgrPath) -> *mut c_char {
    match p.as_ref() {
        Some(p) => {
            let s =
                p.0.procs()
                    .iter()
                    .map(|g| g.to_string())
                    .collect::<Vec<_>>()
                    .join(" -> ");
            CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
        }
        None => ptr::null_mut(),
    }
}

/// Builds the V(nu1, nu2) hierarchy of `-div(diag(1/r, r) grad u) = f` on an
/// `nx x ny` interior grid with cell aspect `hy/hx = aspect`. The
/// right-hand side is set per solve.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mgr_hierarchy_new(
    nx: usize,
    ny: usize,
    r: f64,
    aspect: f64,
    interp: MgrInterp,
    nu1: usize,
    nu2: usize,
    out: *mut *mut MgrHierarchy,
) -> MgrStatus {
    guard(|| {
        if aspect.is_nan() || aspect <= 0.0 {
            return fail(MgrStatus::InvalidArgument, "aspect must be positive");
        }
        let g = match GlobalGrid::new(&[nx, ny]) {
            Ok(g) => g,
            Err(e) => return fail(MgrStatus::InvalidArgument, e.to_string()),
        };
        let prob = DiffusionProblem::unit_square(g, r, Rhs::Constant(0.0)).with_cell_aspect(aspect);
        let mode = match interp {
            MgrInterp::OperatorInduced => InterpMode::OperatorInduced,
            MgrInterp::Bilinear => InterpMode::Bilinear,
        };
        let cycle = CycleConfig {
            nu1,
            nu2,
            ..CycleConfig::default()
        };
        match discretize(&prob)
            .and_then(|a| MGHierarchy::setup(a, mode, CoarsestRule::default(), cycle))
        {
            Ok(h) => {
                out!(out, Box::into_raw(Box::new(MgrHierarchy(h))));
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::Numerical, e.to_string()),
        }
    })
}

/// # Safety
/// `h` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mgr_hierarchy_free(h: *mut MgrHierarchy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of levels, or 0 for a null handle.
///
/// # Safety
/// `h` must be a live hierarchy or null.
#[no_mangle]
pub unsafe extern "C" fn mgr_hierarchy_levels(h: *const MgrHierarchy) -> usize {
    h.as_ref().map_or(0, |h| h.0.num_levels())
}

unsafe fn field(h: &MGHierarchy, v: *const f64, n: usize) -> Result<GridFunction, MgrStatus> {
    let g = h.fine().grid();
    if v.is_null() {
        return Err(fail(MgrStatus::NullPointer, "vector is null"));
    }
    if n != g.points() {
        return Err(fail(
            MgrStatus::InvalidArgument,
            format!("expected {} values, got {n}", g.points()),
        ));
    }
    Ok(GridFunction::from_values(
        g,
        std::slice::from_raw_parts(v, n),
    ))
}

unsafe fn store(f: &GridFunction, v: *mut f64) {
    for (k, x) in f.values().into_iter().enumerate() {
        *v.add(k) = x;
    }
}

/// One serial V-cycle; `x` (first index fastest) is updated in place.
///
/// # Safety
/// `x` and `b` must hold `n` values each.
#[no_mangle]
pub unsafe extern "C" fn mgr_hierarchy_vcycle(
    h: *const MgrHierarchy,
    x: *mut f64,
    b: *const f64,
    n: usize,
) -> MgrStatus {
    guard(|| {
        let h = &deref!(h).0;
        let (xf, bf) = match (field(h, x, n), field(h, b, n)) {
            (Ok(x), Ok(b)) => (x, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match h.vcycle(&xf, &bf) {
            Ok(next) => {
                store(&next, x);
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::Numerical, e.to_string()),
        }
    })
}

/// Runs `cycles` V-cycles on logical ranks following `path`, updating `x`
/// in place. `reconciled` reports whether the logged traffic equals the
/// traffic the cost model implies.
///
/// # Safety
/// Handles must be live, the planner's fine grid must be the hierarchy's,
/// and `x`, `b` must hold `n` values each.
#[no_mangle]
pub unsafe extern "C" fn mgr_simulate(
    h: *const MgrHierarchy,
    p: *const MgrPlanner,
    path: *const MgrPath,
    cycles: usize,
    x: *mut f64,
    b: *const f64,
    n: usize,
    reconciled: *mut bool,
) -> MgrStatus {
    guard(|| {
        let h = &deref!(h).0;
        let pl = &deref!(p).0;
        let path = &deref!(path).0;
        if pl.grids.len() != h.num_levels() || pl.grids[0] != *h.fine().grid() {
            return fail(
                MgrStatus::InvalidArgument,
                "planner and hierarchy grids differ",
            );
        }
        let (xf, bf) = match (field(h, x, n), field(h, b, n)) {
            (Ok(x), Ok(b)) => (x, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let run = (|| {
            let mut sim =
                Simulator::new(h, pl.level_procs(path), pl.cfg.mode, SimOptions::default())?;
            sim.set_state(&xf, &bf)?;
            for _ in 0..cycles {
                sim.cycle()?;
            }
            Ok::<_, mgredist::error::SimError>((sim.gather_x(), sim.reconcile(cycles as u64).ok()))
        })();
        match run {
            Ok((xn, ok)) => {
                store(&xn, x);
                if !reconciled.is_null() {
                    *reconciled = ok;
                }
                MgrStatus::Ok
            }
            Err(e) => fail(MgrStatus::Simulation, e.to_string()),
        }
    })
}
