use crate::grid::{Dims, GlobalGrid, LocalExtent};

/// Scalar values on a rectangular block of a 2D level, stored with a ghost
/// ring of width one.
///
/// All accessors take global point coordinates. Ghost entries that lie
/// outside the global grid stay zero, which is the homogeneous Dirichlet
/// condition.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    extent: LocalExtent,
    stride: usize,
    data: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(extent: LocalExtent) -> Self {
        assert_eq!(extent.dims.dim(), 2, "numerics are two-dimensional");
        let stride = extent.dims.get(0) + 2;
        let rows = extent.dims.get(1) + 2;
        GridFunction {
            extent,
            stride,
            data: vec![0.0; stride * rows],
        }
    }

    pub fn zeros_on(g: &GlobalGrid) -> Self {
        Self::zeros(LocalExtent::whole(g))
    }

    /// Builds a function over the whole grid from row-major values
    /// (first index fastest).
    pub fn from_values(g: &GlobalGrid, values: &[f64]) -> Self {
        let mut f = Self::zeros_on(g);
        assert_eq!(values.len(), g.points());
        let nx = g.dims.get(0);
        for (k, v) in values.iter().enumerate() {
            f.set(k % nx, k / nx, *v);
        }
        f
    }

    pub fn extent(&self) -> &LocalExtent {
        &self.extent
    }

    pub fn nx(&self) -> usize {
        self.extent.dims.get(0)
    }

    pub fn ny(&self) -> usize {
        self.extent.dims.get(1)
    }

    pub fn x0(&self) -> usize {
        self.extent.offset.get(0)
    }

    pub fn y0(&self) -> usize {
        self.extent.offset.get(1)
    }

    pub fn len(&self) -> usize {
        self.extent.dims.product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn index(&self, i: isize, j: isize) -> usize {
        let li = i - self.x0() as isize + 1;
        let lj = j - self.y0() as isize + 1;
        debug_assert!(
            li >= 0 && lj >= 0 && (li as usize) < self.stride && (lj as usize) < self.ny() + 2,
            "({i}, {j}) outside the ghosted block"
        );
        lj as usize * self.stride + li as usize
    }

    /// Value at a global point inside the block or its ghost ring.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[self.index(i, j)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.at(i as isize, j as isize)
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i as isize, j as isize);
        self.data[k] = v;
    }

    #[inline]
    pub fn set_ghost(&mut self, i: isize, j: isize, v: f64) {
        let k = self.index(i, j);
        self.data[k] = v;
    }

    /// Global coordinates of the owned points, first index fastest.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> {
        let (x0, y0, nx, ny) = (self.x0(), self.y0(), self.nx(), self.ny());
        (y0..y0 + ny).flat_map(move |j| (x0..x0 + nx).map(move |i| (i, j)))
    }

    /// Owned values in row-major order.
    pub fn values(&self) -> Vec<f64> {
        self.points().map(|(i, j)| self.get(i, j)).collect()
    }

    pub fn fill(&mut self, v: f64) {
        let pts: Vec<_> = self.points().collect();
        for (i, j) in pts {
            self.set(i, j, v);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.points()
            .map(|(i, j)| self.get(i, j).abs())
            .fold(0.0, f64::max)
    }

    pub fn norm2(&self) -> f64 {
        self.points()
            .map(|(i, j)| self.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Copies owned values of `src` that fall inside this block, including
    /// ghost points. Points outside the global grid are left untouched.
    pub fn copy_from(&mut self, src: &GridFunction, region: &LocalExtent) {
        for j in region.offset.get(1)..region.end(1) {
            for i in region.offset.get(0)..region.end(0) {
                let v = src.get(i, j);
                self.set_ghost(i as isize, j as isize, v);
            }
        }
    }

    /// The ghosted region `[x0-1, x0+nx] x [y0-1, y0+ny]` clipped to the grid.
    pub fn ghosted_region(&self, g: &GlobalGrid) -> LocalExtent {
        let lo = |o: usize| o.saturating_sub(1);
        let x0 = lo(self.x0());
        let y0 = lo(self.y0());
        let x1 = (self.x0() + self.nx() + 1).min(g.dims.get(0));
        let y1 = (self.y0() + self.ny() + 1).min(g.dims.get(1));
        LocalExtent {
            dims: Dims::d2(x1 - x0, y1 - y0),
            offset: Dims::d2(x0, y0),
        }
    }
}
