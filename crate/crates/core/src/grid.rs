//! Grids, processor grids and the partition arithmetic shared by the
//! solver, the cost model and the planner.
//!
//! Points are vertex-centred unknowns of a Dirichlet problem. Coarse point
//! `I` coincides with fine point `2I`, so a grid of `N` points coarsens to
//! `ceil(N / 2)` points and a fine index range `[a, b)` maps onto the coarse
//! range `[ceil(a/2), ceil(b/2))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Maximum supported dimension count.
pub const MAX_DIM: usize = 3;

/// A small fixed-capacity tuple of per-dimension counts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dims {
    len: u8,
    v: [usize; MAX_DIM],
}

impl Dims {
    pub fn new(values: &[usize]) -> Self {
        assert!(
            !values.is_empty() && values.len() <= MAX_DIM,
            "dimension count must be 1..=3"
        );
        let mut v = [0; MAX_DIM];
        v[..values.len()].copy_from_slice(values);
        Dims {
            len: values.len() as u8,
            v,
        }
    }

    pub fn d2(x: usize, y: usize) -> Self {
        Dims::new(&[x, y])
    }

    pub fn filled(dim: usize, value: usize) -> Self {
        Dims::new(&vec![value; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.v[..self.len as usize]
    }

    #[inline]
    pub fn get(&self, d: usize) -> usize {
        self.as_slice()[d]
    }

    pub fn with(mut self, d: usize, value: usize) -> Self {
        assert!(d < self.dim());
        self.v[d] = value;
        self
    }

    pub fn product(&self) -> usize {
        self.as_slice().iter().product()
    }

    pub fn sum(&self) -> usize {
        self.as_slice().iter().sum()
    }

    pub fn smallest(&self) -> usize {
        self.as_slice().iter().copied().min().unwrap_or(0)
    }

    pub fn largest(&self) -> usize {
        self.as_slice().iter().copied().max().unwrap_or(0)
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Dims) -> bool {
        self.dim() == other.dim() && self.iter().zip(other.iter()).all(|(a, b)| a <= b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.as_slice().iter().copied()
    }

    /// Componentwise `ceil(self / by)`.
    pub fn ceil_div(&self, by: &Dims) -> Dims {
        let mut out = *self;
        for d in 0..self.dim() {
            out.v[d] = self.v[d].div_ceil(by.v[d]);
        }
        out
    }
}

impl fmt::Debug for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                f.write_str("x")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Dims {
    type Err = GridError;

    /// Parses `64x32`, `64×32` or `64,32`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Result<Vec<usize>, _> = s
            .trim()
            .split(['x', 'X', '×', ','])
            .map(|p| p.trim().parse::<usize>())
            .collect();
        match parts {
            Ok(v) if !v.is_empty() && v.len() <= MAX_DIM => Ok(Dims::new(&v)),
            _ => Err(GridError::Parse(s.to_string())),
        }
    }
}

impl Serialize for Dims {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dims {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom("expected 1 to 3 dimensions"));
        }
        Ok(Dims::new(&v))
    }
}

/// Global point counts of one level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GlobalGrid {
    pub dims: Dims,
}

impl GlobalGrid {
    pub fn new(dims: &[usize]) -> Result<Self, GridError> {
        Self::from_dims(Dims::new(dims))
    }

    pub fn from_dims(dims: Dims) -> Result<Self, GridError> {
        if !(2..=3).contains(&dims.dim()) {
            return Err(GridError::Dimension(dims.dim()));
        }
        if dims.smallest() == 0 {
            return Err(GridError::EmptyGrid(dims));
        }
        Ok(GlobalGrid { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    pub fn points(&self) -> usize {
        self.dims.product()
    }

    /// Standard factor-two coarsening, `N_c = floor((N - 1) / 2) + 1`.
    pub fn coarsen(&self) -> Result<GlobalGrid, GridError> {
        if self.dims.smallest() < 3 {
            return Err(GridError::CannotCoarsen(self.dims));
        }
        let mut out = self.dims;
        for d in 0..out.dim() {
            out = out.with(d, (self.dims.get(d) - 1) / 2 + 1);
        }
        Ok(GlobalGrid { dims: out })
    }

    /// Agglomerated local problem size `ceil(N_d / p_d)` on a processor grid.
    pub fn local_on(&self, procs: &ProcessorGrid) -> Dims {
        self.dims.ceil_div(&procs.dims)
    }
}

impl fmt::Display for GlobalGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.dims.fmt(f)
    }
}

pub fn coarsen_grid(g: &GlobalGrid) -> Result<GlobalGrid, GridError> {
    g.coarsen()
}

/// Rule deciding where the grid hierarchy stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoarsestRule {
    /// Coarsening stops once every dimension is at most this size.
    pub max_extent: usize,
}

impl Default for CoarsestRule {
    fn default() -> Self {
        CoarsestRule { max_extent: 3 }
    }
}

/// All level grids from the finest to the coarsest.
pub fn level_grids(fine: &GlobalGrid, rule: CoarsestRule) -> Vec<GlobalGrid> {
    let mut out = vec![*fine];
    loop {
        let last = out[out.len() - 1];
        if last.dims.largest() <= rule.max_extent {
            break;
        }
        match last.coarsen() {
            Ok(c) => out.push(c),
            Err(_) => break,
        }
    }
    out
}

/// Tensor-product arrangement of ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessorGrid {
    pub dims: Dims,
}

impl ProcessorGrid {
    pub fn new(dims: &[usize]) -> Result<Self, GridError> {
        Self::from_dims(Dims::new(dims))
    }

    pub fn from_dims(dims: Dims) -> Result<Self, GridError> {
        if dims.smallest() == 0 {
            return Err(GridError::EmptyProcGrid(dims));
        }
        Ok(ProcessorGrid { dims })
    }

    /// The all-ones grid of the given dimension.
    pub fn single(dim: usize) -> Self {
        ProcessorGrid {
            dims: Dims::filled(dim, 1),
        }
    }

    pub fn total(&self) -> usize {
        self.dims.product()
    }

    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    pub fn is_single(&self) -> bool {
        self.total() == 1
    }

    /// Rank coordinates in lexicographic order, first dimension fastest.
    pub fn coords(&self) -> Vec<Dims> {
        let n = self.total();
        (0..n).map(|r| self.coord_of(r)).collect()
    }

    pub fn coord_of(&self, mut rank: usize) -> Dims {
        let mut c = Dims::filled(self.dim(), 0);
        for d in 0..self.dim() {
            c = c.with(d, rank % self.dims.get(d));
            rank /= self.dims.get(d);
        }
        c
    }

    pub fn rank_of(&self, coord: &Dims) -> usize {
        let mut r = 0;
        for d in (0..self.dim()).rev() {
            r = r * self.dims.get(d) + coord.get(d);
        }
        r
    }
}

impl fmt::Display for ProcessorGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.dims.fmt(f)
    }
}

/// Local points owned by one rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalExtent {
    pub dims: Dims,
    pub offset: Dims,
}

impl LocalExtent {
    pub fn whole(g: &GlobalGrid) -> Self {
        LocalExtent {
            dims: g.dims,
            offset: Dims::filled(g.dim(), 0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.dims.product() == 0
    }

    pub fn end(&self, d: usize) -> usize {
        self.offset.get(d) + self.dims.get(d)
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.iter()
            .enumerate()
            .all(|(d, &i)| i >= self.offset.get(d) && i < self.end(d))
    }
}

/// Near-uniform split of `n` items over `parts`: the first `n mod parts`
/// parts receive one extra item. Returns `(start, len)` of part `k`.
pub fn split_range(n: usize, parts: usize, k: usize) -> (usize, usize) {
    let base = n / parts;
    let rem = n % parts;
    let len = base + usize::from(k < rem);
    let start = k * base + k.min(rem);
    (start, len)
}

/// Points owned by `rank_coord` when `g` is split over `p`.
pub fn partition(g: &GlobalGrid, p: &ProcessorGrid, rank_coord: &Dims) -> LocalExtent {
    let mut dims = g.dims;
    let mut offset = g.dims;
    for d in 0..g.dim() {
        let (s, l) = split_range(g.dims.get(d), p.dims.get(d), rank_coord.get(d));
        dims = dims.with(d, l);
        offset = offset.with(d, s);
    }
    LocalExtent { dims, offset }
}

/// Processor-block parameters for agglomerating `fine` onto `coarse`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcBlock {
    pub ranks_per_dim: Dims,
    pub block_size: usize,
    pub local_points: usize,
}

impl ProcBlock {
    /// The trivial block of a level without redistribution.
    pub fn identity(procs: &ProcessorGrid, g: &GlobalGrid) -> Self {
        ProcBlock {
            ranks_per_dim: Dims::filled(procs.dim(), 1),
            block_size: 1,
            local_points: g.local_on(procs).product(),
        }
    }
}

/// `p_block = prod ceil(p_fine / p_coarse)`, `n_block = prod ceil(N / p_coarse)`.
pub fn agglomerate_blocks(
    fine: &ProcessorGrid,
    coarse: &ProcessorGrid,
    g: &GlobalGrid,
) -> Result<ProcBlock, GridError> {
    if !coarse.dims.le(&fine.dims) || g.dim() != fine.dim() {
        return Err(GridError::NotCoarser {
            fine: fine.dims,
            coarse: coarse.dims,
        });
    }
    let ranks_per_dim = fine.dims.ceil_div(&coarse.dims);
    Ok(ProcBlock {
        ranks_per_dim,
        block_size: ranks_per_dim.product(),
        local_points: g.local_on(coarse).product(),
    })
}

/// Ownership of every level's points for every processor grid reachable from
/// a fine decomposition.
///
/// The finest level is split near-uniformly over the fine processor grid.
/// Coarse levels inherit ownership from the fine points they coincide with.
/// A coarser processor grid groups the fine ranks of each dimension into
/// contiguous runs with boundaries `floor(k * p / q)`; the groupings for
/// processor counts related by powers of two nest inside each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub fine_grid: GlobalGrid,
    pub fine_procs: ProcessorGrid,
    /// Per dimension: fine point boundary of each fine rank (length p_d + 1).
    bounds: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn new(fine_grid: GlobalGrid, fine_procs: ProcessorGrid) -> Result<Self, GridError> {
        if fine_grid.dim() != fine_procs.dim() {
            return Err(GridError::Dimension(fine_procs.dim()));
        }
        let bounds = (0..fine_grid.dim())
            .map(|d| {
                let n = fine_grid.dims.get(d);
                let p = fine_procs.dims.get(d);
                (0..=p)
                    .map(|k| if k == p { n } else { split_range(n, p, k).0 })
                    .collect()
            })
            .collect();
        Ok(Decomposition {
            fine_grid,
            fine_procs,
            bounds,
        })
    }

    pub fn dim(&self) -> usize {
        self.fine_grid.dim()
    }

    /// Fine ranks `[start, end)` in dimension `d` grouped into task `k` of `q` tasks.
    pub fn rank_group(&self, d: usize, q: usize, k: usize) -> (usize, usize) {
        let p = self.fine_procs.dims.get(d);
        if q == p {
            return (k, k + 1);
        }
        (k * p / q, (k + 1) * p / q)
    }

    /// Extent owned by task `coord` of `procs` on the level `depth` coarsenings
    /// below the finest.
    pub fn extent(&self, procs: &ProcessorGrid, depth: usize, coord: &Dims) -> LocalExtent {
        let mut dims = procs.dims;
        let mut offset = procs.dims;
        for d in 0..self.dim() {
            let (r0, r1) = self.rank_group(d, procs.dims.get(d), coord.get(d));
            let a = ceil_shift(self.bounds[d][r0], depth);
            let b = ceil_shift(self.bounds[d][r1], depth);
            offset = offset.with(d, a);
            dims = dims.with(d, b - a);
        }
        LocalExtent { dims, offset }
    }

    /// Smallest owned extent per dimension over all tasks of `procs`.
    pub fn min_local(&self, procs: &ProcessorGrid, depth: usize) -> Dims {
        let mut out = procs.dims;
        for d in 0..self.dim() {
            let q = procs.dims.get(d);
            let m = (0..q)
                .map(|k| {
                    let (r0, r1) = self.rank_group(d, q, k);
                    ceil_shift(self.bounds[d][r1], depth) - ceil_shift(self.bounds[d][r0], depth)
                })
                .min()
                .unwrap_or(0);
            out = out.with(d, m);
        }
        out
    }

    /// Whether every task of `coarse` is a union of whole tasks of `fine`.
    pub fn nests(&self, fine: &ProcessorGrid, coarse: &ProcessorGrid) -> bool {
        if !coarse.dims.le(&fine.dims) {
            return false;
        }
        (0..self.dim()).all(|d| {
            let fq = fine.dims.get(d);
            let cq = coarse.dims.get(d);
            let fine_bounds: Vec<usize> = (0..fq).map(|k| self.rank_group(d, fq, k).0).collect();
            (0..cq).all(|k| fine_bounds.contains(&self.rank_group(d, cq, k).0))
        })
    }

    /// Tasks of `fine` grouped into task `coarse_coord` of `coarse`, lowest
    /// coordinate first.
    pub fn block_members(
        &self,
        fine: &ProcessorGrid,
        coarse: &ProcessorGrid,
        coarse_coord: &Dims,
    ) -> Vec<Dims> {
        let mut ranges = Vec::with_capacity(self.dim());
        for d in 0..self.dim() {
            let (r0, r1) = self.rank_group(d, coarse.dims.get(d), coarse_coord.get(d));
            let fq = fine.dims.get(d);
            let members: Vec<usize> = (0..fq)
                .filter(|&k| {
                    let (s, _) = self.rank_group(d, fq, k);
                    s >= r0 && s < r1
                })
                .collect();
            ranges.push(members);
        }
        let mut out = Vec::new();
        let counts: Vec<usize> = ranges.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        for mut idx in 0..total {
            let mut c = Vec::with_capacity(self.dim());
            for r in &ranges {
                c.push(r[idx % r.len()]);
                idx /= r.len();
            }
            out.push(Dims::new(&c));
        }
        out
    }
}

#[inline]
fn ceil_shift(a: usize, depth: usize) -> usize {
    if depth == 0 {
        a
    } else {
        a.div_ceil(1usize << depth)
    }
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(x: usize, y: usize) -> GlobalGrid {
        GlobalGrid::new(&[x, y]).unwrap()
    }

    fn p(x: usize, y: usize) -> ProcessorGrid {
        ProcessorGrid::new(&[x, y]).unwrap()
    }

    #[test]
    fn coarsen_examples() {
        assert_eq!(g(9, 9).coarsen().unwrap(), g(5, 5));
        assert_eq!(g(4, 4).coarsen().unwrap(), g(2, 2));
        let mut c = g(9088, 568);
        for _ in 0..2 {
            c = c.coarsen().unwrap();
        }
        assert_eq!(c, g(2272, 142));
        assert_eq!(c.coarsen().unwrap(), g(1136, 71));
        assert!(g(2, 9).coarsen().is_err());
    }

    #[test]
    fn coarsen_matches_even_index_set() {
        // coarse points are the even fine indices
        for n in 3..40 {
            let evens = (0..n).filter(|i| i % 2 == 0).count();
            assert_eq!(g(n, 3).coarsen().unwrap().dims.get(0), evens);
        }
    }

    #[test]
    fn partition_examples() {
        let e = partition(&g(9088, 568), &p(16, 8), &Dims::d2(0, 0));
        assert_eq!(e.dims, Dims::d2(568, 71));
        let e = partition(&g(5, 5), &p(1, 1), &Dims::d2(0, 0));
        assert_eq!((e.dims, e.offset), (Dims::d2(5, 5), Dims::d2(0, 0)));
        assert_eq!(
            partition(&g(7, 7), &p(2, 2), &Dims::d2(0, 0)).dims,
            Dims::d2(4, 4)
        );
        let e = partition(&g(7, 7), &p(2, 2), &Dims::d2(1, 1));
        assert_eq!((e.dims, e.offset), (Dims::d2(3, 3), Dims::d2(4, 4)));
        // more ranks than points: trailing ranks are empty
        assert!(partition(&g(3, 3), &p(4, 1), &Dims::d2(3, 0)).is_empty());
    }

    #[test]
    fn agglomerate_examples() {
        let b = agglomerate_blocks(&p(4, 4), &p(2, 2), &g(33, 33)).unwrap();
        assert_eq!(b.block_size, 4);
        let b = agglomerate_blocks(&p(16, 8), &p(16, 4), &g(1136, 71)).unwrap();
        assert_eq!((b.block_size, b.local_points), (2, 71 * 18));
        let b = agglomerate_blocks(&p(3, 3), &p(3, 3), &g(9, 9)).unwrap();
        assert_eq!((b.block_size, b.local_points), (1, 9));
        assert!(agglomerate_blocks(&p(2, 2), &p(4, 1), &g(9, 9)).is_err());
    }

    #[test]
    fn level_grids_stop_rule() {
        let levels = level_grids(&g(9, 9), CoarsestRule::default());
        assert_eq!(levels, vec![g(9, 9), g(5, 5), g(3, 3)]);
        let levels = level_grids(&g(40, 3), CoarsestRule::default());
        assert_eq!(levels.last().unwrap(), &g(20, 2));
    }

    #[test]
    fn decomposition_inherits_fine_ownership() {
        let dec = Decomposition::new(g(9, 9), p(3, 1)).unwrap();
        let procs = p(3, 1);
        // fine bounds 0,3,6,9 -> depth 1: 0,2,3,5
        let e = dec.extent(&procs, 1, &Dims::d2(1, 0));
        assert_eq!((e.offset.get(0), e.dims.get(0)), (2, 1));
        assert_eq!(dec.min_local(&procs, 1), Dims::d2(1, 5));
        // grouping onto 2 tasks: ranks {0}, {1,2}
        let coarse = p(2, 1);
        assert_eq!(dec.rank_group(0, 2, 0), (0, 1));
        let m = dec.block_members(&procs, &coarse, &Dims::d2(1, 0));
        assert_eq!(m, vec![Dims::d2(1, 0), Dims::d2(2, 0)]);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!([1, 2, 3, 4, 5, 2048].map(ceil_log2), [0, 1, 2, 2, 3, 11]);
    }

    #[test]
    fn dims_parse_and_display() {
        let d: Dims = "64x32".parse().unwrap();
        assert_eq!(d, Dims::d2(64, 32));
        assert_eq!("16×8".parse::<Dims>().unwrap().to_string(), "16x8");
        assert!("abc".parse::<Dims>().is_err());
    }
}
