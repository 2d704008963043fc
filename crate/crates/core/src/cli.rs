//! Command-line front end.
//!
//! Every command renders into a string so the binary only decides where the
//! text goes. JSON and CSV output leave out wall-clock times, which keeps
//! them byte-identical across runs of the same configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::grid::{CoarsestRule, Dims, GlobalGrid, ProcessorGrid};
use crate::kernels::{
    discretize, reduction_factors, residual, Correction, CycleConfig, DiffusionProblem,
    GridFunction, InterpMode, MGHierarchy, Rhs,
};
use crate::model::{t_vcycle, MachineParams, RedistMode};
use crate::plan::{
    enumerate_coarse_grids, parse_path_line, parse_paths, Heuristic, PlanConfig, Planner,
    RedistPath, SearchStats, TriggerConfig,
};
use crate::sim::{SimOptions, Simulator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_RECONCILE: i32 = 3;

/// Largest relative max-norm gap tolerated between serial and simulated iterates.
pub const SIM_TOLERANCE: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "mgredist",
    version,
    about = "Plan and simulate coarse-grid redistribution for structured multigrid"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for the cheapest redistribution path.
    Plan {
        #[command(flatten)]
        run: RunArgs,
        /// Level whose coarse-grid enumeration is listed (default: the first
        /// level that triggers a redistribution).
        #[arg(long)]
        enumerate_depth: Option<usize>,
        /// Use exhaustive search instead of A*.
        #[arg(long)]
        brute: bool,
    },
    /// Model cost of explicit redistribution paths, ranked.
    Paths {
        #[command(flatten)]
        run: RunArgs,
        /// Lines like `1: 64x32 -> 64x16 -> 1x1`, or the JSON written by `plan`.
        paths: PathBuf,
    },
    /// Solve the anisotropic diffusion test problem serially and on
    /// simulated ranks.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Search statistics over power-of-two rank counts.
    SearchBench {
        #[command(flatten)]
        run: RunArgs,
        /// Sweep 2^0 .. 2^max-exp ranks.
        #[arg(long, default_value_t = 12)]
        max_exp: u32,
    },
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Table,
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Global fine grid, e.g. 9088x568.
    #[arg(long)]
    pub grid: Option<Dims>,
    /// Processor grid, e.g. 16x8.
    #[arg(long = "proc")]
    pub procs: Option<Dims>,
    /// Local problem per rank; the global grid is local times processors.
    #[arg(long)]
    pub local: Option<Dims>,
    /// Machine parameter file.
    #[arg(long)]
    pub machine: Option<PathBuf>,
    /// Agglomeration mode (default: non-redundant).
    #[arg(long, value_enum)]
    pub mode: Option<RedistMode>,
    /// V-cycles to run or to cost (default: 10).
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Pre-smoothing sweeps (default: 2).
    #[arg(long)]
    pub nu1: Option<usize>,
    /// Post-smoothing sweeps (default: 1).
    #[arg(long)]
    pub nu2: Option<usize>,
    /// Interpolation operator (default: operator-induced).
    #[arg(long, value_enum)]
    pub interp: Option<InterpMode>,
    /// Redistribute once a local extent drops below this (default: 3).
    #[arg(long)]
    pub trigger_extent: Option<usize>,
    /// Redistribute once local points drop below this (default: 16).
    #[arg(long)]
    pub trigger_points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the random right-hand side (default: 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON configuration; values present in the file override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Diffusion anisotropy: D = diag(1/r, r).
    #[arg(long, default_value_t = 16.0)]
    pub r: f64,
    /// Cell aspect hy/hx.
    #[arg(long, default_value_t = 16.0)]
    pub aspect: f64,
    /// Use f = 0 instead of a seeded random right-hand side.
    #[arg(long)]
    pub zero_rhs: bool,
    #[arg(long, value_enum, default_value_t = Correction::WithResidual)]
    pub correction: Correction,
    /// Also write the simulated event counters as CSV.
    #[arg(long)]
    pub events: Option<PathBuf>,
}

/// Configuration file fields. Dimensions may be written as `"64x32"` or `[64, 32]`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    grid: Option<DimsSpec>,
    #[serde(rename = "proc")]
    procs: Option<DimsSpec>,
    local: Option<DimsSpec>,
    machine: Option<PathBuf>,
    mode: Option<RedistMode>,
    cycles: Option<usize>,
    nu1: Option<usize>,
    nu2: Option<usize>,
    interp: Option<InterpMode>,
    trigger_extent: Option<usize>,
    trigger_points: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DimsSpec {
    Text(String),
    List(Dims),
}

impl DimsSpec {
    fn dims(self) -> Result<Dims, String> {
        match self {
            DimsSpec::List(d) => Ok(d),
            DimsSpec::Text(s) => s.parse().map_err(|e| format!("{e}")),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: Dims,
    pub procs: Dims,
    pub local: Option<Dims>,
    pub machine: MachineParams,
    pub mode: RedistMode,
    pub cycles: usize,
    pub nu1: usize,
    pub nu2: usize,
    pub interp: InterpMode,
    pub trigger: TriggerConfig,
    pub seed: u64,
}

impl RunConfig {
    pub fn plan_config(&self) -> PlanConfig {
        PlanConfig {
            trigger: self.trigger,
            rule: CoarsestRule::default(),
            nu1: self.nu1,
            nu2: self.nu2,
            mode: self.mode,
            heuristic: Heuristic::ComputeBound,
        }
    }

    pub fn planner(&self) -> Result<Planner, String> {
        let g = GlobalGrid::from_dims(self.grid).map_err(|e| e.to_string())?;
        let p = ProcessorGrid::from_dims(self.procs).map_err(|e| e.to_string())?;
        Planner::new(g, p, self.machine, self.plan_config()).map_err(|e| e.to_string())
    }
}

/// Merges the config file over the flags and checks the result. The bench
/// sweeps its own grids, so `need_grid` is false there and `local` defaults
/// to 8x8.
pub fn resolve(args: &RunArgs, need_grid: bool) -> Result<RunConfig, String> {
    let mut a = args.clone();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let f: ConfigFile =
            serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))?;
        if let Some(d) = f.grid {
            a.grid = Some(d.dims()?);
        }
        if let Some(d) = f.procs {
            a.procs = Some(d.dims()?);
        }
        if let Some(d) = f.local {
            a.local = Some(d.dims()?);
        }
        a.machine = f.machine.or(a.machine);
        a.mode = f.mode.or(a.mode);
        a.cycles = f.cycles.or(a.cycles);
        a.nu1 = f.nu1.or(a.nu1);
        a.nu2 = f.nu2.or(a.nu2);
        a.interp = f.interp.or(a.interp);
        a.trigger_extent = f.trigger_extent.or(a.trigger_extent);
        a.trigger_points = f.trigger_points.or(a.trigger_points);
        a.seed = f.seed.or(a.seed);
    }

    let procs = a.procs.unwrap_or_else(|| {
        let d = a.grid.or(a.local).map_or(2, |g| g.dim());
        Dims::filled(d, 1)
    });
    let grid = if need_grid {
        match (a.grid, a.local) {
            (Some(g), None) => g,
            (None, Some(l)) => {
                if l.dim() != procs.dim() {
                    return Err(format!(
                        "--local {l} and --proc {procs} differ in dimension"
                    ));
                }
                Dims::new(
                    &l.iter()
                        .zip(procs.iter())
                        .map(|(l, p)| l * p)
                        .collect::<Vec<_>>(),
                )
            }
            (Some(_), Some(_)) => return Err("give either --grid or --local, not both".into()),
            (None, None) => return Err("one of --grid or --local is required".into()),
        }
    } else {
        if a.grid.is_some() {
            return Err("search-bench sweeps its own grids; use --local".into());
        }
        Dims::filled(procs.dim(), 1)
    };
    if grid.dim() != procs.dim() {
        return Err(format!(
            "grid {grid} and processor grid {procs} differ in dimension"
        ));
    }
    if grid.iter().chain(procs.iter()).any(|v| v == 0) {
        return Err("grid and processor dimensions must be positive".into());
    }
    if need_grid && !procs.le(&grid) {
        return Err(format!("processor grid {procs} exceeds grid {grid}"));
    }
    let machine = match &a.machine {
        Some(p) => MachineParams::load(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => MachineParams::blue_waters(),
    };
    let cfg = RunConfig {
        grid,
        procs,
        local: a.local,
        machine,
        mode: a.mode.unwrap_or(RedistMode::NonRedundant),
        cycles: a.cycles.unwrap_or(10),
        nu1: a.nu1.unwrap_or(2),
        nu2: a.nu2.unwrap_or(1),
        interp: a.interp.unwrap_or(InterpMode::OperatorInduced),
        trigger: TriggerConfig {
            min_extent: a.trigger_extent.unwrap_or(3),
            min_points: a.trigger_points.unwrap_or(16),
        },
        seed: a.seed.unwrap_or(0),
    };
    let counts = [
        ("--cycles", cfg.cycles),
        ("--nu1", cfg.nu1),
        ("--nu2", cfg.nu2),
        ("--trigger-extent", cfg.trigger.min_extent),
        ("--trigger-points", cfg.trigger.min_points),
    ];
    if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
        return Err(format!("{name} must be positive"));
    }
    debug!("resolved configuration {cfg:?}");
    Ok(cfg)
}

/// Rendered report plus exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn config_error(msg: impl Into<String>) -> Self {
        Outcome {
            output: String::new(),
            code: EXIT_CONFIG,
            diagnostics: vec![msg.into()],
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Plan {
            run,
            enumerate_depth,
            brute,
        } => match resolve(run, true) {
            Ok(cfg) => cmd_plan(&cfg, run.format, *enumerate_depth, *brute),
            Err(e) => Outcome::config_error(e),
        },
        Command::Paths { run, paths } => match resolve(run, true) {
            Ok(cfg) => cmd_paths(&cfg, run.format, paths),
            Err(e) => Outcome::config_error(e),
        },
        Command::Solve { run, problem } => match resolve(run, true) {
            Ok(cfg) => cmd_solve(&cfg, run.format, problem),
            Err(e) => Outcome::config_error(e),
        },
        Command::SearchBench { run, max_exp } => match resolve(run, false) {
            Ok(cfg) => cmd_search_bench(&cfg, run.format, *max_exp),
            Err(e) => Outcome::config_error(e),
        },
    }
}

/// Output target of a parsed command line.
pub fn out_path(cli: &Cli) -> Option<&Path> {
    let run = match &cli.command {
        Command::Plan { run, .. }
        | Command::Paths { run, .. }
        | Command::Solve { run, .. }
        | Command::SearchBench { run, .. } => run,
    };
    run.out.as_deref()
}

fn times(d: &Dims) -> String {
    d.to_string().replace('x', "×")
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn path_line(p: &RedistPath) -> String {
    p.procs()
        .iter()
        .map(|g| g.dims.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn stats_json(s: &SearchStats) -> serde_json::Value {
    json!({ "expanded_nodes": s.expanded_nodes, "path_length": s.path_length })
}

pub fn cmd_plan(
    cfg: &RunConfig,
    format: Format,
    enumerate_depth: Option<usize>,
    brute: bool,
) -> Outcome {
    let planner = match cfg.planner() {
        Ok(p) => p,
        Err(e) => return Outcome::config_error(e),
    };
    let init = planner.initial();
    let last = planner.coarsest_depth();
    let depth = enumerate_depth.unwrap_or_else(|| planner.trigger_depth(&init).unwrap_or(last));
    if depth > last {
        return Outcome::config_error(format!(
            "--enumerate-depth {depth} is below the coarsest level {last}"
        ));
    }
    let enum_grid = planner.grids[depth];
    let candidates = if init.procs.is_single() {
        Vec::new()
    } else {
        enumerate_coarse_grids(&init.procs, &enum_grid)
    };
    let searched = if brute {
        planner.search_brute()
    } else {
        planner.search_astar()
    };
    let (path, stats) = match searched {
        Ok(v) => v,
        Err(e) => return Outcome::config_error(e.to_string()),
    };
    let breakdown = t_vcycle(&planner.cycle_model(&path), &cfg.machine);
    let note = init.procs.is_single().then_some("no redistribution needed");
    info!("plan {} total {:e}", path.arrow(), path.total);

    let output = match format {
        Format::Json => pretty(&json!({
            "config": cfg,
            "levels": planner.grids.iter().map(|g| g.dims).collect::<Vec<_>>(),
            "enumeration": {
                "depth": depth,
                "grid": enum_grid.dims,
                "candidates": candidates.iter().map(|c| json!({
                    "procs": c.procs.dims, "local": c.local
                })).collect::<Vec<_>>(),
            },
            "search": if brute { "brute" } else { "astar" },
            "arrow": path.arrow(),
            "path_line": path_line(&path),
            "path": path,
            "level_procs": planner.level_procs(&path).iter().map(|p| p.dims).collect::<Vec<_>>(),
            "breakdown": breakdown,
            "stats": stats_json(&stats),
            "note": note,
        })),
        Format::Csv => {
            let mut rows = vec![[
                "hop",
                "from",
                "to",
                "start_level",
                "takeover_level",
                "takeover_grid",
                "level_cost",
                "handoff",
                "cost",
                "valid",
            ]
            .map(String::from)
            .to_vec()];
            for (k, t) in path.transitions.iter().enumerate() {
                rows.push(vec![
                    k.to_string(),
                    t.from.dims.to_string(),
                    t.to.map_or("solve".into(), |p| p.dims.to_string()),
                    t.start_depth.to_string(),
                    t.takeover_depth.to_string(),
                    t.takeover_grid.dims.to_string(),
                    format!("{:e}", t.levels),
                    format!("{:e}", t.handoff),
                    format!("{:e}", t.cost),
                    t.valid.to_string(),
                ]);
            }
            csv_text(rows)
        }
        Format::Table => {
            let mut s = String::new();
            writeln!(
                s,
                "Fine grid {} on {} ranks, {} levels, {} mode",
                times(&cfg.grid),
                times(&cfg.procs),
                planner.grids.len(),
                cfg.mode
            )
            .unwrap();
            if let Some(n) = note {
                writeln!(s, "{n}").unwrap();
            } else {
                writeln!(
                    s,
                    "\nCoarse processor grids at level {depth} (global {})",
                    times(&enum_grid.dims)
                )
                .unwrap();
                writeln!(s, "  {:<16}Agglomerated Local Problem", "Redistribution").unwrap();
                for c in &candidates {
                    writeln!(s, "  {:<16}{}", times(&c.procs.dims), times(&c.local)).unwrap();
                }
            }
            writeln!(s, "\nPath: {}", path.arrow()).unwrap();
            writeln!(
                s,
                "  {:<4}{:<10}{:<10}{:<8}{:<14}{:>12}{:>12}{:>12}",
                "hop", "from", "to", "levels", "takeover", "level cost", "handoff", "cost"
            )
            .unwrap();
            for (k, t) in path.transitions.iter().enumerate() {
                writeln!(
                    s,
                    "  {:<4}{:<10}{:<10}{:<8}{:<14}{:>12.4e}{:>12.4e}{:>12.4e}",
                    k,
                    times(&t.from.dims),
                    t.to.map_or("solve".into(), |p| times(&p.dims)),
                    format!("{}-{}", t.start_depth, t.takeover_depth),
                    times(&t.takeover_grid.dims),
                    t.levels,
                    t.handoff,
                    t.cost
                )
                .unwrap();
            }
            writeln!(s, "  total {:e} s", path.total).unwrap();
            writeln!(
                s,
                "\nV-cycle model: smooth {:.4e}  residual {:.4e}  restrict {:.4e}  interp {:.4e}  agglomerate {:.4e}  coarse solve {:.4e}  total {:.4e} s",
                breakdown.smooth,
                breakdown.residual,
                breakdown.restrict,
                breakdown.interp,
                breakdown.agglomerate,
                breakdown.cgsolve,
                breakdown.total
            )
            .unwrap();
            writeln!(
                s,
                "Search: {}, {} expanded nodes, {} states, {:.3} ms",
                if brute { "brute force" } else { "A*" },
                stats.expanded_nodes,
                stats.path_length,
                stats.wall_time * 1e3
            )
            .unwrap();
            s
        }
    };
    Outcome {
        output,
        code: EXIT_OK,
        diagnostics: Vec::new(),
    }
}

#[derive(Clone, Debug, Serialize)]
struct PathRow {
    label: String,
    path: String,
    total: Option<f64>,
    valid: bool,
    rank: Option<usize>,
    note: Option<String>,
}

fn read_paths(file: &Path) -> Result<Vec<(String, Vec<ProcessorGrid>)>, String> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| format!("cannot read {}: {e}", file.display()))?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", file.display()))?;
        let line = v["path_line"]
            .as_str()
            .ok_or_else(|| format!("{}: no path_line field", file.display()))?;
        let (_, procs) = parse_path_line(line).map_err(|e| e.to_string())?;
        return Ok(vec![("plan".into(), procs)]);
    }
    parse_paths(&text).map_err(|e| e.to_string())
}

pub fn cmd_paths(cfg: &RunConfig, format: Format, file: &Path) -> Outcome {
    let planner = match cfg.planner() {
        Ok(p) => p,
        Err(e) => return Outcome::config_error(e),
    };
    let paths = match read_paths(file) {
        Ok(p) if !p.is_empty() => p,
        Ok(_) => return Outcome::config_error(format!("{} lists no paths", file.display())),
        Err(e) => return Outcome::config_error(e),
    };
    let mut rows: Vec<PathRow> = paths
        .iter()
        .map(|(label, procs)| match planner.evaluate_path(procs) {
            Ok(p) => PathRow {
                label: label.clone(),
                path: p.arrow(),
                total: Some(p.total),
                valid: p.is_valid(),
                rank: None,
                note: p
                    .transitions
                    .iter()
                    .filter_map(|t| t.note.clone())
                    .reduce(|a, b| format!("{a}; {b}")),
            },
            Err(e) => PathRow {
                label: label.clone(),
                path: crate::plan::arrow(procs),
                total: None,
                valid: false,
                rank: None,
                note: Some(e.to_string()),
            },
        })
        .collect();
    let mut order: Vec<usize> = (0..rows.len())
        .filter(|&i| rows[i].total.is_some())
        .collect();
    order.sort_by(|&a, &b| rows[a].total.partial_cmp(&rows[b].total).unwrap());
    for (r, &i) in order.iter().enumerate() {
        rows[i].rank = Some(r + 1);
    }
    let invalid: Vec<String> = rows
        .iter()
        .filter(|r| !r.valid)
        .map(|r| format!("path {} is not a valid redistribution sequence", r.label))
        .collect();

    let output = match format {
        Format::Json => pretty(&json!({ "config": cfg, "paths": rows })),
        Format::Csv => {
            let mut out = vec![["label", "path", "total", "valid", "rank", "note"]
                .map(String::from)
                .to_vec()];
            for r in &rows {
                out.push(vec![
                    r.label.clone(),
                    r.path.clone(),
                    r.total.map_or(String::new(), |t| format!("{t:e}")),
                    r.valid.to_string(),
                    r.rank.map_or(String::new(), |k| k.to_string()),
                    r.note.clone().unwrap_or_default(),
                ]);
            }
            csv_text(out)
        }
        Format::Table => {
            let mut s = String::new();
            writeln!(
                s,
                "Fine grid {} on {} ranks, {} mode",
                times(&cfg.grid),
                times(&cfg.procs),
                cfg.mode
            )
            .unwrap();
            writeln!(
                s,
                "  {:<6}{:>6}{:>14}  {:<8}sequence",
                "path", "rank", "model (s)", "valid"
            )
            .unwrap();
            for r in &rows {
                writeln!(
                    s,
                    "  {:<6}{:>6}{:>14}  {:<8}{}",
                    r.label,
                    r.rank.map_or("-".into(), |k| k.to_string()),
                    r.total.map_or("-".into(), |t| format!("{t:.5e}")),
                    if r.valid { "yes" } else { "NO" },
                    r.path
                )
                .unwrap();
                if let Some(n) = r.note.as_ref().filter(|_| !r.valid) {
                    writeln!(s, "        {n}").unwrap();
                }
            }
            s
        }
    };
    Outcome {
        output,
        code: if invalid.is_empty() {
            EXIT_OK
        } else {
            EXIT_CONFIG
        },
        diagnostics: invalid,
    }
}

/// Test-problem right-hand side: seeded uniform values in [-1, 1], or zero.
pub fn test_rhs(grid: &GlobalGrid, seed: u64, zero: bool) -> Rhs {
    if zero {
        return Rhs::Constant(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Rhs::Sampled(
        (0..grid.points())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect(),
    )
}

/// Relative max-norm gap, absolute when the reference is zero.
pub fn rel_max_diff(a: &GridFunction, reference: &GridFunction) -> f64 {
    let scale = reference.max_abs();
    let diff = a
        .points()
        .map(|(i, j)| (a.get(i, j) - reference.get(i, j)).abs())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Whether the reduction factor reached 1 on three consecutive cycles.
pub fn diverged(factors: &[f64]) -> bool {
    factors.windows(3).any(|w| w.iter().all(|&f| f >= 1.0))
}

pub fn cmd_solve(cfg: &RunConfig, format: Format, problem: &ProblemArgs) -> Outcome {
    if cfg.grid.dim() != 2 {
        return Outcome::config_error("solve runs on two-dimensional grids");
    }
    if !(problem.r > 0.0 && problem.aspect > 0.0) {
        return Outcome::config_error("--r and --aspect must be positive");
    }
    let grid = GlobalGrid::from_dims(cfg.grid).expect("validated grid");
    let rhs = test_rhs(&grid, cfg.seed, problem.zero_rhs);
    let numerical = |e: String| Outcome {
        output: String::new(),
        code: EXIT_NUMERICAL,
        diagnostics: vec![e],
    };
    let prob = DiffusionProblem::unit_square(grid, problem.r, rhs).with_cell_aspect(problem.aspect);
    let a = match discretize(&prob) {
        Ok(a) => a,
        Err(e) => return numerical(e.to_string()),
    };
    let b = prob.rhs_field();
    let cycle = CycleConfig {
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        correction: problem.correction,
    };
    let h = match MGHierarchy::setup(a, cfg.interp, CoarsestRule::default(), cycle) {
        Ok(h) => h,
        Err(e) => return numerical(e.to_string()),
    };
    let planner = match cfg.planner() {
        Ok(p) => p,
        Err(e) => return Outcome::config_error(e),
    };
    let path = match planner.search_astar() {
        Ok((p, _)) => p,
        Err(e) => return Outcome::config_error(e.to_string()),
    };
    let level_procs = planner.level_procs(&path);
    let mut sim = match Simulator::new(&h, level_procs.clone(), cfg.mode, SimOptions::default()) {
        Ok(s) => s,
        Err(e) => return Outcome::config_error(e.to_string()),
    };

    let x0 = GridFunction::zeros_on(&grid);
    if let Err(e) = sim.set_state(&x0, &b) {
        return numerical(e.to_string());
    }
    let mut x = x0;
    let mut history = vec![residual(h.fine(), &x, &b).expect("whole grid").norm2()];
    let mut diffs = Vec::new();
    for _ in 0..cfg.cycles {
        x = match h.vcycle(&x, &b) {
            Ok(v) => v,
            Err(e) => return numerical(e.to_string()),
        };
        history.push(residual(h.fine(), &x, &b).expect("whole grid").norm2());
        if let Err(e) = sim.cycle() {
            return numerical(e.to_string());
        }
        diffs.push(rel_max_diff(&sim.gather_x(), &x));
    }
    let factors = reduction_factors(&history);
    let max_diff = diffs.iter().copied().fold(0.0, f64::max);
    let rec = sim.reconcile(cfg.cycles as u64);
    let log = sim.log();

    let mut diagnostics = Vec::new();
    let mut code = EXIT_OK;
    if !rec.ok() {
        code = EXIT_RECONCILE;
        for m in &rec.mismatches {
            diagnostics.push(format!(
                "level {} {}: logged {} messages / {} bytes, model implies {} / {}",
                m.level,
                m.kind,
                m.actual.messages,
                m.actual.bytes,
                m.expected.messages,
                m.expected.bytes
            ));
        }
    }
    if diverged(&factors) {
        code = EXIT_NUMERICAL;
        diagnostics.push("residual reduction factor at or above 1 for 3 consecutive cycles".into());
    }
    if !(max_diff <= SIM_TOLERANCE) {
        code = EXIT_NUMERICAL;
        diagnostics.push(format!(
            "simulated iterate differs from the serial one by {max_diff:e} (relative max norm)"
        ));
    }
    if let Some(p) = &problem.events {
        if let Err(e) = std::fs::write(p, log.to_csv()) {
            return Outcome::config_error(format!("cannot write {}: {e}", p.display()));
        }
    }

    let output = match format {
        Format::Json => pretty(&json!({
            "config": cfg,
            "problem": { "r": problem.r, "aspect": problem.aspect, "zero_rhs": problem.zero_rhs,
                         "correction": problem.correction },
            "levels": h.grids().iter().map(|g| g.dims).collect::<Vec<_>>(),
            "path": path.arrow(),
            "level_procs": level_procs.iter().map(|p| p.dims).collect::<Vec<_>>(),
            "residuals": history,
            "factors": factors,
            "max_rel_diff": max_diff,
            "reconciled": rec.ok(),
            "mismatches": rec.mismatches,
            "events": log.rows(),
        })),
        Format::Csv => {
            let mut rows = vec![["cycle", "residual", "factor", "sim_rel_diff"]
                .map(String::from)
                .to_vec()];
            rows.push(vec![
                "0".into(),
                format!("{:e}", history[0]),
                String::new(),
                String::new(),
            ]);
            for k in 0..cfg.cycles {
                rows.push(vec![
                    (k + 1).to_string(),
                    format!("{:e}", history[k + 1]),
                    format!("{:e}", factors[k]),
                    format!("{:e}", diffs[k]),
                ]);
            }
            csv_text(rows)
        }
        Format::Table => {
            let mut s = String::new();
            writeln!(
                s,
                "Diffusion r = {}, cell aspect {}, grid {}, {} levels, V({},{})",
                problem.r,
                problem.aspect,
                times(&cfg.grid),
                h.num_levels(),
                cfg.nu1,
                cfg.nu2
            )
            .unwrap();
            writeln!(s, "  {:<6}{:>14}{:>10}", "cycle", "residual", "factor").unwrap();
            writeln!(s, "  {:<6}{:>14.6e}", 0, history[0]).unwrap();
            for k in 0..cfg.cycles {
                writeln!(
                    s,
                    "  {:<6}{:>14.6e}{:>10.4}",
                    k + 1,
                    history[k + 1],
                    factors[k]
                )
                .unwrap();
            }
            writeln!(
                s,
                "\nSimulated on {} ranks: {}",
                times(&cfg.procs),
                path.arrow()
            )
            .unwrap();
            writeln!(s, "  max relative difference to serial: {max_diff:e}").unwrap();
            writeln!(
                s,
                "  events reconcile with the model: {}",
                if rec.ok() { "yes" } else { "NO" }
            )
            .unwrap();
            writeln!(
                s,
                "  {:<7}{:<11}{:>10}{:>14}",
                "level", "kind", "messages", "bytes"
            )
            .unwrap();
            for r in log.rows() {
                writeln!(
                    s,
                    "  {:<7}{:<11}{:>10}{:>14}",
                    r.level, r.kind, r.messages, r.bytes
                )
                .unwrap();
            }
            s
        }
    };
    Outcome {
        output,
        code,
        diagnostics,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub exp: u32,
    pub ranks: usize,
    pub procs: Dims,
    pub grid: Dims,
    pub brute_nodes: u64,
    pub astar_nodes: u64,
    pub brute_cost: f64,
    pub astar_cost: f64,
    #[serde(skip)]
    pub brute_time: f64,
    #[serde(skip)]
    pub astar_time: f64,
}

/// One bench row: `2^exp x 1` ranks on a grid of `local * 2^exp` per dimension.
pub fn bench_row(cfg: &RunConfig, local: Dims, exp: u32) -> Result<BenchRow, String> {
    let p = 1usize << exp;
    let procs = Dims::filled(local.dim(), 1).with(0, p);
    let grid = Dims::new(&local.iter().map(|l| l * p).collect::<Vec<_>>());
    let planner = RunConfig {
        grid,
        procs,
        ..cfg.clone()
    }
    .planner()?;
    let (bp, bs) = planner.search_brute().map_err(|e| e.to_string())?;
    let (ap, as_) = planner.search_astar().map_err(|e| e.to_string())?;
    Ok(BenchRow {
        exp,
        ranks: p,
        procs,
        grid,
        brute_nodes: bs.expanded_nodes,
        astar_nodes: as_.expanded_nodes,
        brute_cost: bp.total,
        astar_cost: ap.total,
        brute_time: bs.wall_time,
        astar_time: as_.wall_time,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn cmd_search_bench(cfg: &RunConfig, format: Format, max_exp: u32) -> Outcome {
    if max_exp > 20 {
        return Outcome::config_error("--max-exp above 20 is not supported");
    }
    let local = cfg
        .local
        .unwrap_or_else(|| Dims::filled(cfg.procs.dim(), 8));
    let results: Vec<Result<BenchRow, String>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..=max_exp)
            .map(|h| s.spawn(move || bench_row(cfg, local, h)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    let rows = match results.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(r) => r,
        Err(e) => return Outcome::config_error(e),
    };
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ranks > 1)
        .map(|r| (r.ranks as f64, r.astar_nodes as f64))
        .collect();
    let slope = (pts.len() >= 2).then(|| loglog_slope(&pts));

    let output = match format {
        Format::Json => pretty(&json!({
            "local": local,
            "rows": rows,
            "astar_exponent": slope,
        })),
        Format::Csv => {
            let mut out = vec![[
                "exp",
                "ranks",
                "procs",
                "grid",
                "brute_nodes",
                "astar_nodes",
                "brute_cost",
                "astar_cost",
            ]
            .map(String::from)
            .to_vec()];
            for r in &rows {
                out.push(vec![
                    r.exp.to_string(),
                    r.ranks.to_string(),
                    r.procs.to_string(),
                    r.grid.to_string(),
                    r.brute_nodes.to_string(),
                    r.astar_nodes.to_string(),
                    format!("{:e}", r.brute_cost),
                    format!("{:e}", r.astar_cost),
                ]);
            }
            csv_text(out)
        }
        Format::Table => {
            let mut s = String::new();
            writeln!(
                s,
                "  {:>4}{:>7}{:>14}{:>12}{:>10}{:>12}{:>12}",
                "h", "ranks", "grid", "brute", "A*", "brute ms", "A* ms"
            )
            .unwrap();
            for r in &rows {
                writeln!(
                    s,
                    "  {:>4}{:>7}{:>14}{:>12}{:>10}{:>12.3}{:>12.3}",
                    r.exp,
                    r.ranks,
                    r.grid.to_string(),
                    r.brute_nodes,
                    r.astar_nodes,
                    r.brute_time * 1e3,
                    r.astar_time * 1e3
                )
                .unwrap();
            }
            if let Some(k) = slope {
                writeln!(s, "A* expansions grow like ranks^{k:.3}").unwrap();
            }
            s
        }
    };
    let mismatched: Vec<String> = rows
        .iter()
        .filter(|r| r.brute_cost != r.astar_cost)
        .map(|r| {
            format!(
                "2^{}: A* cost {:e} differs from brute force {:e}",
                r.exp, r.astar_cost, r.brute_cost
            )
        })
        .collect();
    Outcome {
        output,
        code: EXIT_OK,
        diagnostics: mismatched,
    }
}
