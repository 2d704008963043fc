//! Logical-rank execution of a V-cycle under a redistribution plan.
//!
//! Every rank of every level is a separate block of data. Ranks only read
//! their own points and ghost ring, and every value that crosses a rank
//! boundary goes through a logged message. Within a phase the ranks are
//! independent, so results do not depend on the order they are visited in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{KernelError, SimError};
use crate::grid::{Decomposition, Dims, GlobalGrid, LocalExtent, ProcessorGrid};
use crate::kernels::{
    interp_correct_at, relax_color, residual_into, restrict_into, GridFunction, MGHierarchy,
};
use crate::model::{implied_traffic, RedistMode, Traffic, TrafficKind};

/// Per-(level, kind) traffic counters.
pub type TrafficTable = BTreeMap<(usize, TrafficKind), Traffic>;
/// Destination rank, `(i, j, value)` payload and its log entry.
type Outgoing = (usize, Vec<(usize, usize, f64)>, Event);

/// One point-to-point message. `src` and `dst` are task coordinates on the
/// processor grid `procs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub level: usize,
    pub kind: TrafficKind,
    pub procs: Dims,
    pub src: Dims,
    pub dst: Dims,
    /// Face or piece payload.
    pub bytes: u64,
    /// Corner values carried along with a second-phase exchange message.
    pub corner_bytes: u64,
    /// Identical copies of this message sent by redundant replicas.
    pub replicas: u64,
    /// Forwarding traffic off the block root's critical path.
    pub relay: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterRow {
    pub level: usize,
    pub kind: TrafficKind,
    pub messages: u64,
    pub bytes: u64,
}

/// Chronological message list plus per-level, per-kind counters. Relay
/// messages are counted separately from the main counters.
#[derive(Clone, Debug, Default)]
pub struct EventLog {
    pub events: Vec<Event>,
    counters: TrafficTable,
    relays: TrafficTable,
}

impl EventLog {
    pub fn record(&mut self, e: Event) {
        let map = if e.relay {
            &mut self.relays
        } else {
            &mut self.counters
        };
        map.entry((e.level, e.kind))
            .or_default()
            .add(e.replicas, e.replicas * e.bytes);
        self.events.push(e);
    }

    pub fn counters(&self) -> &TrafficTable {
        &self.counters
    }

    pub fn relays(&self) -> &TrafficTable {
        &self.relays
    }

    pub fn get(&self, level: usize, kind: TrafficKind) -> Traffic {
        self.counters
            .get(&(level, kind))
            .copied()
            .unwrap_or_default()
    }

    pub fn total(&self) -> Traffic {
        let mut t = Traffic::default();
        for c in self.counters.values() {
            t.add(c.messages, c.bytes);
        }
        t
    }

    pub fn corner_bytes(&self) -> u64 {
        self.events
            .iter()
            .map(|e| e.replicas * e.corner_bytes)
            .sum()
    }

    /// Main and relay counters rebuilt from the event list.
    pub fn recount(&self) -> (TrafficTable, TrafficTable) {
        let mut fresh = EventLog::default();
        for e in &self.events {
            fresh.record(e.clone());
        }
        (fresh.counters, fresh.relays)
    }

    pub fn rows(&self) -> Vec<CounterRow> {
        self.counters
            .iter()
            .map(|(&(level, kind), t)| CounterRow {
                level,
                kind,
                messages: t.messages,
                bytes: t.bytes,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,kind,messages,bytes\n");
        for r in self.rows() {
            writeln!(s, "{},{},{},{}", r.level, r.kind, r.messages, r.bytes).unwrap();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub level: usize,
    pub kind: TrafficKind,
    pub expected: Traffic,
    pub actual: Traffic,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Reconciliation {
    pub mismatches: Vec<Mismatch>,
}

impl Reconciliation {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn levels(&self) -> BTreeSet<usize> {
        self.mismatches.iter().map(|m| m.level).collect()
    }
}

/// Compares logged counters against `cycles` copies of the implied traffic.
pub fn reconcile(log: &EventLog, implied: &TrafficTable, cycles: u64) -> Reconciliation {
    let keys: BTreeSet<_> = log.counters.keys().chain(implied.keys()).copied().collect();
    let mut mismatches = Vec::new();
    for (level, kind) in keys {
        let mut expected = implied.get(&(level, kind)).copied().unwrap_or_default();
        expected.messages *= cycles;
        expected.bytes *= cycles;
        let actual = log.get(level, kind);
        if expected != actual {
            mismatches.push(Mismatch {
                level,
                kind,
                expected,
                actual,
            });
        }
    }
    Reconciliation { mismatches }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Repeats the residual exchange on one level.
    DoubleExchange { level: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimOptions {
    /// Visit ranks in a random order drawn from this seed.
    pub shuffle: Option<u64>,
    pub fault: Option<Fault>,
}

/// Owned values of one rank on one level, row-major.
struct Piece {
    ext: LocalExtent,
    vals: Vec<f64>,
}

fn fill_piece(f: &mut GridFunction, piece: &Piece) {
    let nx = piece.ext.dims.get(0);
    let (x0, y0) = (piece.ext.offset.get(0), piece.ext.offset.get(1));
    for (k, v) in piece.vals.iter().enumerate() {
        f.set(x0 + k % nx, y0 + k / nx, *v);
    }
}

fn piece_bytes(pieces: &[Piece], idx: &[usize]) -> u64 {
    idx.iter().map(|&m| pieces[m].vals.len() as u64 * 8).sum()
}

/// Runs V-cycles on logical ranks following a per-level processor assignment
/// (finest level first, coarsest on one rank).
pub struct Simulator<'a> {
    h: &'a MGHierarchy,
    decomp: Decomposition,
    procs: Vec<ProcessorGrid>,
    mode: RedistMode,
    opts: SimOptions,
    rng: Option<ChaCha8Rng>,
    log: EventLog,
    x: Vec<GridFunction>,
    b: Vec<GridFunction>,
}

impl<'a> Simulator<'a> {
    pub fn new(
        h: &'a MGHierarchy,
        level_procs: Vec<ProcessorGrid>,
        mode: RedistMode,
        opts: SimOptions,
    ) -> Result<Self, SimError> {
        let n = h.num_levels();
        if level_procs.len() != n {
            return Err(SimError::PlanMismatch(format!(
                "{} processor grids for {n} levels",
                level_procs.len()
            )));
        }
        if !level_procs[n - 1].is_single() {
            return Err(SimError::PlanMismatch(format!(
                "coarsest level assigned to {}",
                level_procs[n - 1].dims
            )));
        }
        if level_procs.iter().any(|p| p.dim() != 2) {
            return Err(SimError::PlanMismatch(
                "numerics run on two-dimensional processor grids".into(),
            ));
        }
        let decomp = Decomposition::new(*h.levels[0].grid(), level_procs[0])
            .map_err(|e| SimError::Kernel(KernelError::Grid(e)))?;
        for l in 0..n {
            let p = &level_procs[l];
            check_extents(&decomp, p, l)?;
            if l + 1 == n {
                break;
            }
            let next = &level_procs[l + 1];
            if next != p {
                if !decomp.nests(p, next) {
                    return Err(SimError::BlockTiling {
                        fine: p.dims,
                        coarse: next.dims,
                    });
                }
                let sizes: BTreeSet<usize> = next
                    .coords()
                    .iter()
                    .map(|c| decomp.block_members(p, next, c).len())
                    .collect();
                if mode == RedistMode::Redundant && sizes.len() > 1 {
                    return Err(SimError::PlanMismatch(format!(
                        "blocks of {} on {} differ in size, replicas are ill-defined",
                        p.dims, next.dims
                    )));
                }
            }
        }
        let fine = level_procs[0];
        let x = fine
            .coords()
            .iter()
            .map(|c| GridFunction::zeros(decomp.extent(&fine, 0, c)))
            .collect::<Vec<_>>();
        let b = x.clone();
        Ok(Simulator {
            h,
            decomp,
            procs: level_procs,
            mode,
            opts,
            rng: opts.shuffle.map(ChaCha8Rng::seed_from_u64),
            log: EventLog::default(),
            x,
            b,
        })
    }

    pub fn level_procs(&self) -> &[ProcessorGrid] {
        &self.procs
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Distributes the iterate (with its ghost rings) and right-hand side.
    /// This initial placement is not logged.
    pub fn set_state(&mut self, x: &GridFunction, b: &GridFunction) -> Result<(), SimError> {
        let g = *self.h.levels[0].grid();
        let whole = LocalExtent::whole(&g);
        if *x.extent() != whole || *b.extent() != whole {
            return Err(SimError::Kernel(KernelError::Shape(format!(
                "state must cover the fine grid {g}"
            ))));
        }
        for (xf, bf) in self.x.iter_mut().zip(self.b.iter_mut()) {
            let ext = *xf.extent();
            let region = xf.ghosted_region(&g);
            xf.copy_from(x, &region);
            bf.copy_from(b, &ext);
        }
        Ok(())
    }

    /// Assembles the distributed iterate.
    pub fn gather_x(&self) -> GridFunction {
        let mut out = GridFunction::zeros_on(self.h.levels[0].grid());
        for f in &self.x {
            for (i, j) in f.points() {
                out.set(i, j, f.get(i, j));
            }
        }
        out
    }

    pub fn cycle(&mut self) -> Result<(), SimError> {
        let mut x = std::mem::take(&mut self.x);
        let b = std::mem::take(&mut self.b);
        let res = self.cycle_level(0, &mut x, &b, 1);
        self.x = x;
        self.b = b;
        res
    }

    /// Traffic the cost model's accounting implies for one cycle.
    pub fn implied(&self) -> TrafficTable {
        let colors: Vec<usize> = self
            .h
            .levels
            .iter()
            .map(|l| l.a.pattern().colors())
            .collect();
        implied_traffic(
            &self.decomp,
            &self.procs,
            &colors,
            self.h.cycle.nu1,
            self.h.cycle.nu2,
            self.mode,
        )
    }

    pub fn reconcile(&self, cycles: u64) -> Reconciliation {
        reconcile(&self.log, &self.implied(), cycles)
    }

    fn order(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        if let Some(rng) = self.rng.as_mut() {
            v.shuffle(rng);
        }
        v
    }

    fn cycle_level(
        &mut self,
        l: usize,
        x: &mut [GridFunction],
        b: &[GridFunction],
        mult: u64,
    ) -> Result<(), SimError> {
        let h = self.h;
        let level = &h.levels[l];
        let Some(p) = &level.p else {
            x[0] = h.coarse_solve(&b[0]);
            return Ok(());
        };
        let a = &level.a;
        let procs = self.procs[l];
        let with_residual = h.cycle.correction.with_residual();

        self.smooth(l, x, b, h.cycle.nu1, mult)?;

        let mut r: Vec<GridFunction> = x.iter().map(|f| GridFunction::zeros(*f.extent())).collect();
        for t in self.order(x.len()) {
            residual_into(a, &x[t], &b[t], &mut r[t]);
        }
        self.exchange(l, &procs, a.grid(), &mut r, mult);
        if self.opts.fault == Some(Fault::DoubleExchange { level: l }) {
            self.exchange(l, &procs, a.grid(), &mut r, mult);
        }

        let cext: Vec<LocalExtent> = procs
            .coords()
            .iter()
            .map(|c| self.decomp.extent(&procs, l + 1, c))
            .collect();
        let mut bc: Vec<GridFunction> = cext.iter().map(|e| GridFunction::zeros(*e)).collect();
        for t in self.order(x.len()) {
            restrict_into(p, &r[t], &mut bc[t]);
        }
        let mut xc: Vec<GridFunction> = cext.iter().map(|e| GridFunction::zeros(*e)).collect();
        let next = self.procs[l + 1];
        if next == procs {
            self.cycle_level(l + 1, &mut xc, &bc, mult)?;
        } else {
            self.redistribute(l, &procs, &next, &bc, &mut xc, mult)?;
        }
        self.exchange(l, &procs, p.coarse_grid(), &mut xc, mult);

        let g = *a.grid();
        for t in self.order(x.len()) {
            let f = &mut x[t];
            let region = f.ghosted_region(&g);
            for j in region.offset.get(1)..region.end(1) {
                for i in region.offset.get(0)..region.end(0) {
                    if with_residual && a.center(i, j) == 0.0 {
                        return Err(KernelError::ZeroCenter(i, j).into());
                    }
                    let v = interp_correct_at(p, a, f, &xc[t], &r[t], i, j, with_residual);
                    f.set(i, j, v);
                }
            }
        }

        self.smooth(l, x, b, h.cycle.nu2, mult)
    }

    fn smooth(
        &mut self,
        l: usize,
        x: &mut [GridFunction],
        b: &[GridFunction],
        sweeps: usize,
        mult: u64,
    ) -> Result<(), SimError> {
        let a = &self.h.levels[l].a;
        let procs = self.procs[l];
        for _ in 0..sweeps {
            for c in 0..a.pattern().colors() {
                for t in self.order(x.len()) {
                    relax_color(a, &mut x[t], &b[t], c)?;
                }
                self.exchange(l, &procs, a.grid(), x, mult);
            }
        }
        Ok(())
    }

    /// Two-phase halo exchange: faces along x, then faces along y that carry
    /// the freshly received corner values. A restricted field can leave a
    /// rank without points along an axis; such ranks send after their
    /// neighbours so that they forward the layer they just received.
    fn exchange(
        &mut self,
        level: usize,
        procs: &ProcessorGrid,
        grid: &GlobalGrid,
        f: &mut [GridFunction],
        mult: u64,
    ) {
        let gnx = grid.dims.get(0);
        for (d, relay_step) in [(0, false), (0, true), (1, false), (1, true)] {
            let mut msgs: Vec<Outgoing> = Vec::new();
            for t in self.order(f.len()) {
                let coord = procs.coord_of(t);
                let src = &f[t];
                if (src.extent().dims.get(d) == 0) != relay_step {
                    continue;
                }
                let (x0, y0, nx, ny) = (src.x0(), src.y0(), src.nx(), src.ny());
                for up in [false, true] {
                    let k = coord.get(d);
                    let nk = if up {
                        if k + 1 >= procs.dims.get(d) {
                            continue;
                        }
                        k + 1
                    } else {
                        if k == 0 {
                            continue;
                        }
                        k - 1
                    };
                    let ncoord = coord.with(d, nk);
                    let mut vals = Vec::new();
                    let mut corner = 0u64;
                    let bytes = if d == 0 {
                        let i = if up { x0 + nx - 1 } else { x0 };
                        for j in y0..y0 + ny {
                            vals.push((i, j, src.get(i, j)));
                        }
                        ny as u64 * 8
                    } else {
                        let j = if up { y0 + ny - 1 } else { y0 };
                        for i in x0.saturating_sub(1)..(x0 + nx + 1).min(gnx) {
                            if i < x0 || i >= x0 + nx {
                                corner += 8;
                            }
                            vals.push((i, j, src.get(i, j)));
                        }
                        nx as u64 * 8
                    };
                    msgs.push((
                        procs.rank_of(&ncoord),
                        vals,
                        Event {
                            level,
                            kind: TrafficKind::Exchange,
                            procs: procs.dims,
                            src: coord,
                            dst: ncoord,
                            bytes,
                            corner_bytes: corner,
                            replicas: mult,
                            relay: false,
                        },
                    ));
                }
            }
            for (dst, vals, ev) in msgs {
                for (i, j, v) in vals {
                    f[dst].set_ghost(i as isize, j as isize, v);
                }
                self.log.record(ev);
            }
        }
    }

    /// Gathers the restricted residual onto the coarser processor grid,
    /// cycles there and returns the correction to the original owners.
    fn redistribute(
        &mut self,
        l: usize,
        procs: &ProcessorGrid,
        next: &ProcessorGrid,
        bc: &[GridFunction],
        xc: &mut [GridFunction],
        mult: u64,
    ) -> Result<(), SimError> {
        let mut blocks = Vec::new();
        let mut b_next = Vec::new();
        let mut replicas = 1u64;
        for kc in next.coords() {
            let members = self.decomp.block_members(procs, next, &kc);
            let ranks: Vec<usize> = members.iter().map(|m| procs.rank_of(m)).collect();
            replicas = ranks.len() as u64;
            let pieces: Vec<Piece> = ranks
                .iter()
                .map(|&r| Piece {
                    ext: *bc[r].extent(),
                    vals: bc[r].values(),
                })
                .collect();
            let ext = self.decomp.extent(next, l + 1, &kc);
            let held = match self.mode {
                RedistMode::NonRedundant => self.binomial_gather(l, procs, &members, &pieces, mult),
                RedistMode::Redundant => self.bruck_allgather(l, procs, &members, &pieces, mult),
            };
            let mut copies = held.iter().map(|idx| {
                let mut f = GridFunction::zeros(ext);
                for &m in idx {
                    fill_piece(&mut f, &pieces[m]);
                }
                f
            });
            let root = copies.next().expect("block has a root");
            for other in copies {
                debug_assert_eq!(other, root, "replica copies differ");
            }
            b_next.push(root);
            blocks.push(ranks);
        }

        let sub_mult = match self.mode {
            RedistMode::Redundant => mult * replicas,
            RedistMode::NonRedundant => mult,
        };
        let mut x_next: Vec<GridFunction> = b_next
            .iter()
            .map(|f| GridFunction::zeros(*f.extent()))
            .collect();
        self.cycle_level(l + 1, &mut x_next, &b_next, sub_mult)?;

        for (k, ranks) in blocks.iter().enumerate() {
            let members: Vec<Dims> = ranks.iter().map(|&r| procs.coord_of(r)).collect();
            let pieces: Vec<Piece> = ranks
                .iter()
                .map(|&r| {
                    let ext = *xc[r].extent();
                    let mut sub = GridFunction::zeros(ext);
                    sub.copy_from(&x_next[k], &ext);
                    Piece {
                        ext,
                        vals: sub.values(),
                    }
                })
                .collect();
            let received: Vec<Vec<usize>> = match self.mode {
                RedistMode::NonRedundant => {
                    self.binomial_scatter(l, procs, &members, &pieces, mult)
                }
                RedistMode::Redundant => (0..ranks.len()).map(|m| vec![m]).collect(),
            };
            for (m, &r) in ranks.iter().enumerate() {
                for &q in &received[m] {
                    if q == m {
                        fill_piece(&mut xc[r], &pieces[q]);
                    }
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn collective_event(
        &mut self,
        level: usize,
        kind: TrafficKind,
        procs: &ProcessorGrid,
        src: Dims,
        dst: Dims,
        bytes: u64,
        mult: u64,
        relay: bool,
    ) {
        self.log.record(Event {
            level,
            kind,
            procs: procs.dims,
            src,
            dst,
            bytes,
            corner_bytes: 0,
            replicas: mult,
            relay,
        });
    }

    /// Binomial-tree gather onto member 0. Returns the pieces held by each
    /// member afterwards.
    fn binomial_gather(
        &mut self,
        level: usize,
        procs: &ProcessorGrid,
        members: &[Dims],
        pieces: &[Piece],
        mult: u64,
    ) -> Vec<Vec<usize>> {
        let p = members.len();
        let mut held: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
        let mut step = 1;
        while step < p {
            for i in (step..p).step_by(2 * step) {
                let moved = std::mem::take(&mut held[i]);
                let dst = i - step;
                let bytes = piece_bytes(pieces, &moved);
                self.collective_event(
                    level,
                    TrafficKind::Gather,
                    procs,
                    members[i],
                    members[dst],
                    bytes,
                    mult,
                    dst != 0,
                );
                held[dst].extend(moved);
            }
            step *= 2;
        }
        vec![std::mem::take(&mut held[0])]
    }

    /// Bruck allgather: in round `k` every member forwards what it holds to
    /// the member `2^k` below it (cyclically).
    fn bruck_allgather(
        &mut self,
        level: usize,
        procs: &ProcessorGrid,
        members: &[Dims],
        pieces: &[Piece],
        mult: u64,
    ) -> Vec<Vec<usize>> {
        let p = members.len();
        let mut held: Vec<Vec<usize>> = (0..p).map(|i| vec![i]).collect();
        let mut step = 1;
        while step < p {
            let count = step.min(p - step);
            let sends: Vec<(usize, Vec<usize>)> = (0..p)
                .map(|i| ((i + p - step) % p, held[i][..count].to_vec()))
                .collect();
            for (i, (dst, moved)) in sends.into_iter().enumerate() {
                let bytes = piece_bytes(pieces, &moved);
                self.collective_event(
                    level,
                    TrafficKind::Allgather,
                    procs,
                    members[i],
                    members[dst],
                    bytes,
                    mult,
                    dst != 0,
                );
                held[dst].extend(moved);
            }
            step *= 2;
        }
        held
    }

    /// Binomial-tree scatter from member 0. Returns the pieces each member
    /// received, its own included.
    fn binomial_scatter(
        &mut self,
        level: usize,
        procs: &ProcessorGrid,
        members: &[Dims],
        pieces: &[Piece],
        mult: u64,
    ) -> Vec<Vec<usize>> {
        let p = members.len();
        let mut held: Vec<Vec<usize>> = vec![Vec::new(); p];
        held[0] = (0..p).collect();
        let mut step = if p > 1 {
            1usize << crate::grid::ceil_log2(p)
        } else {
            1
        };
        while step > 1 {
            step /= 2;
            for i in (0..p).step_by(2 * step) {
                let dst = i + step;
                if dst >= p {
                    continue;
                }
                let moved: Vec<usize> = held[i].iter().copied().filter(|&m| m >= dst).collect();
                held[i].retain(|&m| m < dst);
                let bytes = piece_bytes(pieces, &moved);
                self.collective_event(
                    level,
                    TrafficKind::Scatter,
                    procs,
                    members[i],
                    members[dst],
                    bytes,
                    mult,
                    i != 0,
                );
                held[dst].extend(moved);
            }
        }
        held
    }
}

fn check_extents(
    decomp: &Decomposition,
    procs: &ProcessorGrid,
    level: usize,
) -> Result<(), SimError> {
    for coord in procs.coords() {
        if decomp.extent(procs, level, &coord).is_empty() {
            return Err(SimError::EmptyExtent {
                procs: procs.dims,
                coord,
                level,
            });
        }
    }
    Ok(())
}

/// One V-cycle on logical ranks. Returns the new iterate and the message log.
pub fn vcycle_redist(
    h: &MGHierarchy,
    level_procs: Vec<ProcessorGrid>,
    x: &GridFunction,
    b: &GridFunction,
    mode: RedistMode,
    opts: SimOptions,
) -> Result<(GridFunction, EventLog), SimError> {
    let mut sim = Simulator::new(h, level_procs, mode, opts)?;
    sim.set_state(x, b)?;
    sim.cycle()?;
    Ok((sim.gather_x(), sim.into_log()))
}
