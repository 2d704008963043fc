//! Coarse processor-grid enumeration and redistribution path search.
//!
//! A search state is a processor grid together with the level at which it
//! takes over the problem. From a state the problem is coarsened on the same
//! processor grid until the local problem becomes too small, and the
//! successors are the enumerated coarser processor grids at that level. A
//! single-rank state has one edge into the goal: the rest of the cycle on
//! one rank plus the direct solve.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::PlanError;
use crate::grid::{
    agglomerate_blocks, level_grids, CoarsestRule, Decomposition, Dims, GlobalGrid, ProcessorGrid,
};
use crate::model::{
    t_cgsolve, CycleModel, LevelCost, LevelShape, MachineParams, ModelLevel, RedistMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerConfig {
    pub min_extent: usize,
    pub min_points: usize,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            min_extent: 3,
            min_points: 16,
        }
    }
}

/// Whether a local problem is small enough to redistribute.
pub fn redistribution_trigger(local: &Dims, t: &TriggerConfig) -> bool {
    local.smallest() < t.min_extent || local.product() < t.min_points
}

/// A coarse processor grid and the agglomerated local problem it would own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub procs: ProcessorGrid,
    pub local: Dims,
}

/// Strictly coarser processor grids for agglomerating `grid` off `procs`,
/// from the single rank upwards. Each step doubles the dimension with the
/// largest agglomerated extent among those that stay within `procs`, ties
/// going to the lowest dimension.
pub fn enumerate_coarse_grids(procs: &ProcessorGrid, grid: &GlobalGrid) -> Vec<Candidate> {
    let mut out = Vec::new();
    let mut q = Dims::filled(procs.dim(), 1);
    loop {
        if q != procs.dims {
            let pg = ProcessorGrid::from_dims(q).expect("positive dims");
            out.push(Candidate {
                procs: pg,
                local: grid.local_on(&pg),
            });
        }
        let local = grid.dims.ceil_div(&q);
        let pick = (0..q.dim())
            .filter(|&d| 2 * q.get(d) <= procs.dims.get(d))
            .fold(None::<usize>, |best, d| match best {
                Some(b) if local.get(b) >= local.get(d) => Some(b),
                _ => Some(d),
            });
        match pick {
            Some(d) => q = q.with(d, 2 * q.get(d)),
            None => break,
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Heuristic {
    /// Computation of the remaining levels on the current processor grid with
    /// free communication, plus the direct solve. Never overestimates.
    ComputeBound,
    /// `grid_weight * prod N * gamma + proc_weight * log2(ranks) * alpha`.
    Weighted { grid_weight: f64, proc_weight: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub trigger: TriggerConfig,
    pub rule: CoarsestRule,
    pub nu1: usize,
    pub nu2: usize,
    pub mode: RedistMode,
    pub heuristic: Heuristic,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            trigger: TriggerConfig::default(),
            rule: CoarsestRule::default(),
            nu1: 2,
            nu2: 1,
            mode: RedistMode::NonRedundant,
            heuristic: Heuristic::ComputeBound,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RedistState {
    pub procs: ProcessorGrid,
    /// Level (0 = finest) at which this processor grid takes over.
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Node {
    State(RedistState),
    Goal,
}

/// One hop of a path, or the final hop into the direct solve when `to` is
/// `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: ProcessorGrid,
    pub to: Option<ProcessorGrid>,
    /// Level where `from` took over.
    pub start_depth: usize,
    /// Level where `to` takes over.
    pub takeover_depth: usize,
    pub takeover_grid: GlobalGrid,
    /// Smooth, residual, restrict and interpolation on `from`.
    pub levels: f64,
    /// Gather and scatter into `to`, or the direct solve for the final hop.
    pub handoff: f64,
    pub cost: f64,
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathState {
    pub procs: ProcessorGrid,
    pub depth: usize,
    pub grid: GlobalGrid,
    pub local: Dims,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedistPath {
    pub states: Vec<PathState>,
    pub transitions: Vec<Transition>,
    /// Sum of the transition costs in path order.
    pub total: f64,
}

impl RedistPath {
    pub fn procs(&self) -> Vec<ProcessorGrid> {
        self.states.iter().map(|s| s.procs).collect()
    }

    pub fn is_valid(&self) -> bool {
        self.transitions.iter().all(|t| t.valid)
    }

    /// Arrow notation, e.g. `64×32 → 16×1 → 1×1`.
    pub fn arrow(&self) -> String {
        arrow(&self.procs())
    }
}

pub fn arrow(procs: &[ProcessorGrid]) -> String {
    procs
        .iter()
        .map(|p| p.dims.to_string().replace('x', "×"))
        .collect::<Vec<_>>()
        .join(" → ")
}

impl fmt::Display for RedistPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.arrow())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded_nodes: u64,
    pub path_length: usize,
    pub wall_time: f64,
}

/// Search space for one fine problem, processor grid and machine.
#[derive(Clone, Debug)]
pub struct Planner {
    pub grids: Vec<GlobalGrid>,
    pub decomp: Decomposition,
    pub machine: MachineParams,
    pub cfg: PlanConfig,
}

#[derive(Clone, Debug)]
struct Edge {
    to: Node,
    transition: Transition,
}

impl Planner {
    pub fn new(
        fine: GlobalGrid,
        procs: ProcessorGrid,
        machine: MachineParams,
        cfg: PlanConfig,
    ) -> Result<Self, PlanError> {
        let decomp = Decomposition::new(fine, procs)?;
        let grids = level_grids(&fine, cfg.rule);
        Ok(Planner {
            grids,
            decomp,
            machine,
            cfg,
        })
    }

    pub fn fine_procs(&self) -> ProcessorGrid {
        self.decomp.fine_procs
    }

    pub fn initial(&self) -> RedistState {
        RedistState {
            procs: self.fine_procs(),
            depth: 0,
        }
    }

    pub fn coarsest_depth(&self) -> usize {
        self.grids.len() - 1
    }

    fn single(&self) -> ProcessorGrid {
        ProcessorGrid::single(self.decomp.dim())
    }

    /// First level below `s.depth` where the local problem on `s.procs`
    /// triggers a redistribution.
    pub fn trigger_depth(&self, s: &RedistState) -> Option<usize> {
        (s.depth + 1..=self.coarsest_depth()).find(|&t| {
            redistribution_trigger(&self.decomp.min_local(&s.procs, t), &self.cfg.trigger)
        })
    }

    /// Level where the successors of `s` take over and the grids they may
    /// use; a lone 1×1 when only the direct solve remains.
    pub fn takeover(&self, s: &RedistState) -> (usize, Vec<Candidate>) {
        let last = self.coarsest_depth();
        match self.trigger_depth(s) {
            Some(t) if t < last => (t, enumerate_coarse_grids(&s.procs, &self.grids[t])),
            _ => {
                let one = self.single();
                (
                    last,
                    vec![Candidate {
                        procs: one,
                        local: self.grids[last].local_on(&one),
                    }],
                )
            }
        }
    }

    fn model_level(&self, procs: &ProcessorGrid, l: usize) -> ModelLevel {
        ModelLevel {
            shape: LevelShape::new(&self.grids[l], procs, l == 0, self.cfg.nu1, self.cfg.nu2),
            coarse_local: self.grids[l + 1].local_on(procs),
            agglomerate: None,
        }
    }

    /// Level costs on `procs` for levels `[from, to)`, summed finest first.
    fn levels_cost(&self, procs: &ProcessorGrid, from: usize, to: usize) -> f64 {
        let mut acc = 0.0;
        for l in from..to {
            acc += LevelCost::of(&self.model_level(procs, l), self.cfg.mode, &self.machine).total();
        }
        acc
    }

    fn cholesky(&self) -> f64 {
        t_cgsolve(
            &self.grids[self.coarsest_depth()],
            None,
            self.cfg.mode,
            &self.machine,
        )
    }

    /// The hop from `s` to `to` taking over at `depth`, valid or not.
    fn hop(
        &self,
        s: &RedistState,
        to: ProcessorGrid,
        depth: usize,
    ) -> Result<Transition, PlanError> {
        let grid = self.grids[depth];
        let block = agglomerate_blocks(&s.procs, &to, &grid)?;
        let levels = self.levels_cost(&s.procs, s.depth, depth);
        let handoff = crate::model::t_agglomerate(Some(&block), self.cfg.mode, &self.machine);
        Ok(Transition {
            from: s.procs,
            to: Some(to),
            start_depth: s.depth,
            takeover_depth: depth,
            takeover_grid: grid,
            levels,
            handoff,
            cost: levels + handoff,
            valid: true,
            note: None,
        })
    }

    /// The final hop of a single-rank state into the direct solve.
    fn finish(&self, s: &RedistState) -> Transition {
        let last = self.coarsest_depth();
        let levels = self.levels_cost(&s.procs, s.depth, last);
        let handoff = self.cholesky();
        Transition {
            from: s.procs,
            to: None,
            start_depth: s.depth,
            takeover_depth: last,
            takeover_grid: self.grids[last],
            levels,
            handoff,
            cost: levels + handoff,
            valid: s.procs.is_single(),
            note: None,
        }
    }

    fn successors(&self, s: &RedistState) -> Vec<Edge> {
        if s.procs.is_single() {
            return vec![Edge {
                to: Node::Goal,
                transition: self.finish(s),
            }];
        }
        let (depth, cands) = self.takeover(s);
        cands
            .into_iter()
            .map(|c| Edge {
                to: Node::State(RedistState {
                    procs: c.procs,
                    depth,
                }),
                transition: self
                    .hop(s, c.procs, depth)
                    .expect("enumerated grids are coarser"),
            })
            .collect()
    }

    /// Lower bound (by default) on the cost from `s` to the goal.
    pub fn heuristic(&self, s: &RedistState) -> f64 {
        match self.cfg.heuristic {
            Heuristic::ComputeBound => {
                let m = self.machine.compute_only();
                let mut acc = 0.0;
                for l in s.depth..self.coarsest_depth() {
                    acc += LevelCost::of(&self.model_level(&s.procs, l), self.cfg.mode, &m).total();
                }
                acc + t_cgsolve(&self.grids[self.coarsest_depth()], None, self.cfg.mode, &m)
            }
            Heuristic::Weighted {
                grid_weight,
                proc_weight,
            } => {
                let n = self.grids[s.depth].points() as f64;
                let p = s.procs.total() as f64;
                grid_weight * n * self.machine.gamma + proc_weight * p.log2() * self.machine.alpha
            }
        }
    }

    fn build_path(&self, transitions: Vec<Transition>) -> RedistPath {
        let mut states = Vec::with_capacity(transitions.len() + 1);
        let mut total = 0.0;
        let first = self.initial();
        states.push(self.path_state(first.procs, first.depth));
        for t in &transitions {
            total += t.cost;
            if let Some(to) = t.to {
                states.push(self.path_state(to, t.takeover_depth));
            }
        }
        RedistPath {
            states,
            transitions,
            total,
        }
    }

    fn path_state(&self, procs: ProcessorGrid, depth: usize) -> PathState {
        PathState {
            procs,
            depth,
            grid: self.grids[depth],
            local: self.grids[depth].local_on(&procs),
        }
    }

    /// A* over the search graph.
    pub fn search_astar(&self) -> Result<(RedistPath, SearchStats), PlanError> {
        let started = Instant::now();
        let start = self.initial();
        let mut open = BinaryHeap::new();
        let mut best_g: HashMap<Node, f64> = HashMap::new();
        let mut parent: HashMap<Node, (Node, Transition)> = HashMap::new();
        let mut expanded = 0u64;
        let mut goal: Option<f64> = None;
        best_g.insert(Node::State(start), 0.0);
        open.push(OpenEntry::new(
            self.heuristic(&start),
            0.0,
            Node::State(start),
        ));
        while let Some(e) = open.pop() {
            if best_g.get(&e.node).is_some_and(|&g| e.g > g) {
                continue;
            }
            if let Some(best) = goal {
                if e.f > best * (1.0 + 1e-12) {
                    break;
                }
            }
            let s = match e.node {
                Node::Goal => {
                    goal = Some(goal.map_or(e.g, |b: f64| b.min(e.g)));
                    continue;
                }
                Node::State(s) => s,
            };
            expanded += 1;
            for edge in self.successors(&s) {
                let g = e.g + edge.transition.cost;
                if best_g.get(&edge.to).is_some_and(|&old| old <= g) {
                    continue;
                }
                best_g.insert(edge.to, g);
                let h = match edge.to {
                    Node::State(t) => self.heuristic(&t),
                    Node::Goal => 0.0,
                };
                parent.insert(edge.to, (e.node, edge.transition));
                open.push(OpenEntry::new(g + h, g, edge.to));
            }
        }
        if goal.is_none() {
            return Err(PlanError::Unreachable);
        }
        let mut transitions = Vec::new();
        let mut node = Node::Goal;
        while let Some((prev, t)) = parent.get(&node) {
            transitions.push(t.clone());
            node = *prev;
        }
        transitions.reverse();
        let path = self.build_path(transitions);
        let stats = SearchStats {
            expanded_nodes: expanded,
            path_length: path.states.len(),
            wall_time: started.elapsed().as_secs_f64(),
        };
        Ok((path, stats))
    }

    /// Exhaustive depth-first search over every path.
    pub fn search_brute(&self) -> Result<(RedistPath, SearchStats), PlanError> {
        let started = Instant::now();
        let mut expanded = 0u64;
        let mut best: Option<(f64, Vec<Transition>)> = None;
        let mut stack = Vec::new();
        self.dfs(self.initial(), 0.0, &mut stack, &mut best, &mut expanded);
        let (_, transitions) = best.ok_or(PlanError::Unreachable)?;
        let path = self.build_path(transitions);
        let stats = SearchStats {
            expanded_nodes: expanded,
            path_length: path.states.len(),
            wall_time: started.elapsed().as_secs_f64(),
        };
        Ok((path, stats))
    }

    fn dfs(
        &self,
        s: RedistState,
        g: f64,
        stack: &mut Vec<Transition>,
        best: &mut Option<(f64, Vec<Transition>)>,
        expanded: &mut u64,
    ) {
        *expanded += 1;
        for edge in self.successors(&s) {
            let ng = g + edge.transition.cost;
            stack.push(edge.transition);
            match edge.to {
                Node::Goal => {
                    if best.as_ref().is_none_or(|(b, _)| ng < *b) {
                        *best = Some((ng, stack.clone()));
                    }
                }
                Node::State(t) => self.dfs(t, ng, stack, best, expanded),
            }
            stack.pop();
        }
    }

    /// Costs an explicit processor-grid sequence. Hops that are not search
    /// successors are flagged but still costed; a path that stops short of
    /// 1×1 keeps its last grid down to the coarsest level and agglomerates
    /// there.
    pub fn evaluate_path(&self, procs: &[ProcessorGrid]) -> Result<RedistPath, PlanError> {
        if procs.first() != Some(&self.fine_procs()) {
            return Err(PlanError::BadStart(self.fine_procs().dims));
        }
        let mut s = self.initial();
        let mut transitions = Vec::new();
        for next in &procs[1..] {
            if next.dim() != s.procs.dim() || !next.dims.le(&s.procs.dims) || *next == s.procs {
                return Err(PlanError::InvalidTransition {
                    from: s.procs.dims,
                    to: next.dims,
                    reason: "not componentwise coarser".into(),
                });
            }
            if s.procs.is_single() {
                return Err(PlanError::InvalidTransition {
                    from: s.procs.dims,
                    to: next.dims,
                    reason: "nothing is coarser than a single rank".into(),
                });
            }
            let (depth, cands) = self.takeover(&s);
            let mut t = self.hop(&s, *next, depth)?;
            if !cands.iter().any(|c| c.procs == *next) {
                t.valid = false;
                t.note = Some(format!(
                    "not an enumerated successor at {} (candidates: {})",
                    self.grids[depth],
                    cands
                        .iter()
                        .map(|c| c.procs.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
            transitions.push(t);
            s = RedistState {
                procs: *next,
                depth,
            };
        }
        if !s.procs.is_single() {
            let last = self.coarsest_depth();
            let (depth, _) = self.takeover(&s);
            let mut t = self.hop(&s, self.single(), last)?;
            t.note = Some(format!("stays on {} down to the coarsest grid", s.procs));
            t.valid = depth == last;
            transitions.push(t);
            s = RedistState {
                procs: self.single(),
                depth: last,
            };
        }
        transitions.push(self.finish(&s));
        Ok(self.build_path(transitions))
    }

    /// Processor grid owning each level (finest first) under `path`. The
    /// coarsest level always sits on one rank.
    pub fn level_procs(&self, path: &RedistPath) -> Vec<ProcessorGrid> {
        let last = self.coarsest_depth();
        let mut out = Vec::with_capacity(last + 1);
        for t in &path.transitions {
            while out.len() < t.takeover_depth.min(last) {
                out.push(t.from);
            }
        }
        while out.len() < last {
            out.push(path.states[path.states.len() - 1].procs);
        }
        out.push(self.single());
        out
    }

    pub fn cycle_model(&self, path: &RedistPath) -> CycleModel {
        CycleModel::from_assignment(
            &self.grids,
            &self.level_procs(path),
            self.cfg.mode,
            self.cfg.nu1,
            self.cfg.nu2,
        )
    }
}

struct OpenEntry {
    f: f64,
    g: f64,
    ranks: usize,
    dims: Option<Dims>,
    node: Node,
}

impl OpenEntry {
    fn new(f: f64, g: f64, node: Node) -> Self {
        let (ranks, dims) = match node {
            Node::State(s) => (s.procs.total(), Some(s.procs.dims)),
            Node::Goal => (0, None),
        };
        OpenEntry {
            f,
            g,
            ranks,
            dims,
            node,
        }
    }

    fn key(&self) -> (f64, usize, Option<Dims>) {
        (self.f, self.ranks, self.dims)
    }
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // reversed: the heap pops the smallest f, then fewer ranks, then lower dims
    fn cmp(&self, other: &Self) -> Ordering {
        let (fa, ra, da) = self.key();
        let (fb, rb, db) = other.key();
        fb.total_cmp(&fa).then(rb.cmp(&ra)).then(db.cmp(&da))
    }
}

/// Parses one path in arrow notation, e.g. `64x32 -> 16x1 -> 1x1`. An
/// optional `label:` prefix is returned separately.
pub fn parse_path_line(line: &str) -> Result<(Option<String>, Vec<ProcessorGrid>), PlanError> {
    let (label, body) = match line.split_once(':') {
        Some((l, b)) => (Some(l.trim().to_string()), b),
        None => (None, line),
    };
    let procs = body
        .replace("→", "->")
        .split("->")
        .map(|tok| {
            let d: Dims = tok
                .trim()
                .parse()
                .map_err(|e: crate::error::GridError| PlanError::Parse(e.to_string()))?;
            Ok(ProcessorGrid::from_dims(d)?)
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    if procs.is_empty() {
        return Err(PlanError::Parse(format!("empty path in {line:?}")));
    }
    Ok((label, procs))
}

/// Parses a paths file: one path per line, `#` comments, blank lines ignored.
pub fn parse_paths(text: &str) -> Result<Vec<(String, Vec<ProcessorGrid>)>, PlanError> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let t = raw.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let (label, procs) = parse_path_line(t)?;
        let label = label.unwrap_or_else(|| out.len().to_string());
        out.push((label, procs));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pg(x: usize, y: usize) -> ProcessorGrid {
        ProcessorGrid::new(&[x, y]).unwrap()
    }

    fn gg(x: usize, y: usize) -> GlobalGrid {
        GlobalGrid::new(&[x, y]).unwrap()
    }

    #[test]
    fn table_enumeration() {
        let c = enumerate_coarse_grids(&pg(16, 8), &gg(1136, 71));
        let got: Vec<String> = c
            .iter()
            .map(|c| format!("{} {}", c.procs, c.local))
            .collect();
        assert_eq!(
            got,
            [
                "1x1 1136x71",
                "2x1 568x71",
                "4x1 284x71",
                "8x1 142x71",
                "16x1 71x71",
                "16x2 71x36",
                "16x4 71x18"
            ]
        );
    }

    #[test]
    fn enumeration_edge_cases() {
        assert!(enumerate_coarse_grids(&pg(1, 1), &gg(9, 9)).is_empty());
        let c = enumerate_coarse_grids(&pg(4, 1), &gg(100, 1));
        let got: Vec<ProcessorGrid> = c.iter().map(|c| c.procs).collect();
        assert_eq!(got, [pg(1, 1), pg(2, 1)]);
    }

    #[test]
    fn trigger_examples() {
        let t = TriggerConfig::default();
        assert!(!redistribution_trigger(&Dims::d2(568, 71), &t));
        assert!(redistribution_trigger(&Dims::d2(2, 8), &t));
        assert!(!redistribution_trigger(&Dims::d2(4, 4), &t));
        assert!(redistribution_trigger(&Dims::d2(3, 5), &t));
    }

    #[test]
    fn path_parsing() {
        let (l, p) = parse_path_line("1: 64×32 → 64×16 -> 1x1").unwrap();
        assert_eq!(l.as_deref(), Some("1"));
        assert_eq!(p, [pg(64, 32), pg(64, 16), pg(1, 1)]);
        assert!(parse_path_line("64x32 -> banana").is_err());
        let all = parse_paths("# c\n64x32 -> 1x1\n\nA: 2x2 -> 1x1\n").unwrap();
        assert_eq!(all[0].0, "0");
        assert_eq!(all[1].0, "A");
    }

    #[test]
    fn single_rank_is_trivial() {
        let p = Planner::new(
            gg(33, 33),
            pg(1, 1),
            MachineParams::blue_waters(),
            PlanConfig::default(),
        )
        .unwrap();
        let (path, stats) = p.search_astar().unwrap();
        assert_eq!(path.states.len(), 1);
        assert_eq!(stats.expanded_nodes, 1);
        let (b, bs) = p.search_brute().unwrap();
        assert_eq!(b.total, path.total);
        assert_eq!(bs.expanded_nodes, 1);
    }

    #[test]
    fn astar_matches_brute_small() {
        let p = Planner::new(
            gg(257, 129),
            pg(8, 4),
            MachineParams::blue_waters(),
            PlanConfig::default(),
        )
        .unwrap();
        let (a, sa) = p.search_astar().unwrap();
        let (b, sb) = p.search_brute().unwrap();
        assert_eq!(a.total, b.total);
        assert!(sa.expanded_nodes <= sb.expanded_nodes);
        assert!(a.is_valid());
        let again = p.evaluate_path(&a.procs()).unwrap();
        assert_eq!(again.total, a.total);
    }
}
