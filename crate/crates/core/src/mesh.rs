//! Uniform Cartesian grid with square cells.
//!
//! Cells are addressed by signed `(i, j)` pairs so that ghost cells sit at
//! negative indices and at `i >= nx` / `j >= ny`. Corners live on the
//! `(nx + 1) x (ny + 1)` lattice: corner `(i, j)` is the lower-left corner of
//! cell `(i, j)`. Edges come in two families:
//!
//! * vertical edge `(i, j)` is the left edge of cell `(i, j)`, normal `+x1`,
//!   for `i in 0..=nx`, `j in 0..ny`;
//! * horizontal edge `(i, j)` is the bottom edge of cell `(i, j)`, normal
//!   `+x2`, for `i in 0..nx`, `j in 0..=ny`.

use thiserror::Error;

/// Simpson weights for (corner, midpoint, corner) along an edge.
pub const SIMPSON_WEIGHTS: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

/// Number of ghost rings around the physical domain.
pub const GHOST_LAYERS: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("cell counts must be positive (got nx = {nx}, ny = {ny})")]
    EmptyGrid { nx: usize, ny: usize },
    #[error("degenerate domain extent {width} x {height}")]
    DegenerateExtent { width: f64, height: f64 },
    #[error("cells are not square: width / nx = {dx_from_x}, height / ny = {dx_from_y}")]
    NonSquareCells { dx_from_x: f64, dx_from_y: f64 },
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Extent {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self { x_min, x_max, y_min, y_max }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Signed cell address; ghost cells have indices outside `0..nx` / `0..ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub i: isize,
    pub j: isize,
}

impl CellIndex {
    pub const fn new(i: isize, j: isize) -> Self {
        Self { i, j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeId {
    /// Left edge of cell `(i, j)`.
    Vertical { i: usize, j: usize },
    /// Bottom edge of cell `(i, j)`.
    Horizontal { i: usize, j: usize },
}

impl EdgeId {
    /// Unit normal pointing from the first to the second adjacent cell.
    pub fn normal(&self) -> [f64; 2] {
        match self {
            EdgeId::Vertical { .. } => [1.0, 0.0],
            EdgeId::Horizontal { .. } => [0.0, 1.0],
        }
    }

    /// The two cells sharing the edge, ordered along the normal.
    pub fn adjacent_cells(&self) -> [CellIndex; 2] {
        match *self {
            EdgeId::Vertical { i, j } => {
                let (i, j) = (i as isize, j as isize);
                [CellIndex::new(i - 1, j), CellIndex::new(i, j)]
            }
            EdgeId::Horizontal { i, j } => {
                let (i, j) = (i as isize, j as isize);
                [CellIndex::new(i, j - 1), CellIndex::new(i, j)]
            }
        }
    }
}

/// Where a quadrature point sits relative to the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    /// Corner `(i, j)` of the lattice.
    Corner,
    /// Midpoint of vertical edge `(i, j)`.
    VerticalMid,
    /// Midpoint of horizontal edge `(i, j)`.
    HorizontalMid,
}

/// A quadrature point identified by its kind and lattice/edge index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadPoint {
    pub kind: PointKind,
    pub i: isize,
    pub j: isize,
}

impl QuadPoint {
    pub const fn corner(i: isize, j: isize) -> Self {
        Self { kind: PointKind::Corner, i, j }
    }

    /// Whether grid lines pass through the point along x1 (resp. x2).
    ///
    /// A corner has lines through it in both directions; a vertical-edge
    /// midpoint only has the vertical line `x1 = const` through it.
    pub fn on_lines(&self) -> [bool; 2] {
        match self.kind {
            PointKind::Corner => [true, true],
            PointKind::VerticalMid => [true, false],
            PointKind::HorizontalMid => [false, true],
        }
    }

    /// Geometric stencil `S_k` including ghost cells: 4 cells at corners,
    /// 2 at edge midpoints.
    pub fn stencil(&self) -> smallvec::SmallVec<[CellIndex; 4]> {
        let (i, j) = (self.i, self.j);
        match self.kind {
            PointKind::Corner => smallvec::smallvec![
                CellIndex::new(i - 1, j - 1),
                CellIndex::new(i, j - 1),
                CellIndex::new(i - 1, j),
                CellIndex::new(i, j),
            ],
            PointKind::VerticalMid => {
                smallvec::smallvec![CellIndex::new(i - 1, j), CellIndex::new(i, j)]
            }
            PointKind::HorizontalMid => {
                smallvec::smallvec![CellIndex::new(i, j - 1), CellIndex::new(i, j)]
            }
        }
    }
}

/// Quadrature point as seen from an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadPointRef {
    pub point: QuadPoint,
    pub location: [f64; 2],
    /// Physical edges that use this point.
    pub owner_edges: Vec<EdgeId>,
    /// Physical (non-ghost) cells whose boundary contains the point.
    pub stencil: Vec<CellIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub origin: [f64; 2],
    pub ghost_layers: usize,
}

impl CartesianGrid {
    pub fn new(extent: Extent, nx: usize, ny: usize) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::EmptyGrid { nx, ny });
        }
        let (w, h) = (extent.width(), extent.height());
        if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
            return Err(MeshError::DegenerateExtent { width: w, height: h });
        }
        let dx_from_x = w / nx as f64;
        let dx_from_y = h / ny as f64;
        if (dx_from_x - dx_from_y).abs() > 1e-12 * dx_from_x.max(dx_from_y) {
            return Err(MeshError::NonSquareCells { dx_from_x, dx_from_y });
        }
        Ok(Self {
            nx,
            ny,
            dx: dx_from_x,
            origin: [extent.x_min, extent.y_min],
            ghost_layers: GHOST_LAYERS,
        })
    }

    pub fn extent(&self) -> Extent {
        Extent::new(
            self.origin[0],
            self.origin[0] + self.nx as f64 * self.dx,
            self.origin[1],
            self.origin[1] + self.ny as f64 * self.dx,
        )
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dx
    }

    pub fn is_interior(&self, c: CellIndex) -> bool {
        c.i >= 0 && c.j >= 0 && (c.i as usize) < self.nx && (c.j as usize) < self.ny
    }

    pub fn cell_center(&self, c: CellIndex) -> [f64; 2] {
        [
            self.origin[0] + (c.i as f64 + 0.5) * self.dx,
            self.origin[1] + (c.j as f64 + 0.5) * self.dx,
        ]
    }

    pub fn corner_location(&self, i: isize, j: isize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.dx, self.origin[1] + j as f64 * self.dx]
    }

    pub fn point_location(&self, p: QuadPoint) -> [f64; 2] {
        let (fi, fj) = match p.kind {
            PointKind::Corner => (p.i as f64, p.j as f64),
            PointKind::VerticalMid => (p.i as f64, p.j as f64 + 0.5),
            PointKind::HorizontalMid => (p.i as f64 + 0.5, p.j as f64),
        };
        [self.origin[0] + fi * self.dx, self.origin[1] + fj * self.dx]
    }

    /// Cell containing `x`, without clamping (may be a ghost or far outside).
    pub fn locate(&self, x: [f64; 2]) -> CellIndex {
        CellIndex::new(
            ((x[0] - self.origin[0]) / self.dx).floor() as isize,
            ((x[1] - self.origin[1]) / self.dx).floor() as isize,
        )
    }

    /// Row-major id of an interior cell.
    pub fn cell_id(&self, c: CellIndex) -> usize {
        debug_assert!(self.is_interior(c));
        c.i as usize + c.j as usize * self.nx
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.ny as isize).flat_map(move |j| (0..self.nx as isize).map(move |i| CellIndex::new(i, j)))
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let vertical = (0..self.ny).flat_map(move |j| (0..=self.nx).map(move |i| EdgeId::Vertical { i, j }));
        let horizontal =
            (0..=self.ny).flat_map(move |j| (0..self.nx).map(move |i| EdgeId::Horizontal { i, j }));
        vertical.chain(horizontal)
    }

    /// The four edges of an interior cell as (left, right, bottom, top).
    pub fn cell_edges(&self, c: CellIndex) -> [EdgeId; 4] {
        let (i, j) = (c.i as usize, c.j as usize);
        [
            EdgeId::Vertical { i, j },
            EdgeId::Vertical { i: i + 1, j },
            EdgeId::Horizontal { i, j },
            EdgeId::Horizontal { i, j: j + 1 },
        ]
    }

    pub fn is_boundary_edge(&self, e: EdgeId) -> bool {
        match e {
            EdgeId::Vertical { i, .. } => i == 0 || i == self.nx,
            EdgeId::Horizontal { j, .. } => j == 0 || j == self.ny,
        }
    }

    /// Ghost-completed stencil of corner `(i, j)`: always four cells.
    pub fn corner_stencil(&self, i: isize, j: isize) -> [CellIndex; 4] {
        [
            CellIndex::new(i - 1, j - 1),
            CellIndex::new(i, j - 1),
            CellIndex::new(i - 1, j),
            CellIndex::new(i, j),
        ]
    }

    /// The three quadrature points of an edge with their Simpson weights.
    pub fn edge_quadrature(&self, e: EdgeId) -> [(QuadPointRef, f64); 3] {
        let points = self.edge_points(e);
        let refs = points.map(|p| self.point_ref(p));
        let [a, b, c] = refs;
        [(a, SIMPSON_WEIGHTS[0]), (b, SIMPSON_WEIGHTS[1]), (c, SIMPSON_WEIGHTS[2])]
    }

    /// (start corner, midpoint, end corner) of an edge.
    pub fn edge_points(&self, e: EdgeId) -> [QuadPoint; 3] {
        match e {
            EdgeId::Vertical { i, j } => {
                let (i, j) = (i as isize, j as isize);
                [
                    QuadPoint::corner(i, j),
                    QuadPoint { kind: PointKind::VerticalMid, i, j },
                    QuadPoint::corner(i, j + 1),
                ]
            }
            EdgeId::Horizontal { i, j } => {
                let (i, j) = (i as isize, j as isize);
                [
                    QuadPoint::corner(i, j),
                    QuadPoint { kind: PointKind::HorizontalMid, i, j },
                    QuadPoint::corner(i + 1, j),
                ]
            }
        }
    }

    fn point_ref(&self, p: QuadPoint) -> QuadPointRef {
        let stencil: Vec<CellIndex> = p.stencil().into_iter().filter(|c| self.is_interior(*c)).collect();
        let owner_edges = match p.kind {
            PointKind::Corner => {
                let (i, j) = (p.i, p.j);
                let mut edges = Vec::with_capacity(4);
                let (nx, ny) = (self.nx as isize, self.ny as isize);
                if (0..=nx).contains(&i) {
                    if j > 0 && j <= ny {
                        edges.push(EdgeId::Vertical { i: i as usize, j: (j - 1) as usize });
                    }
                    if j >= 0 && j < ny {
                        edges.push(EdgeId::Vertical { i: i as usize, j: j as usize });
                    }
                }
                if (0..=ny).contains(&j) {
                    if i > 0 && i <= nx {
                        edges.push(EdgeId::Horizontal { i: (i - 1) as usize, j: j as usize });
                    }
                    if i >= 0 && i < nx {
                        edges.push(EdgeId::Horizontal { i: i as usize, j: j as usize });
                    }
                }
                edges
            }
            PointKind::VerticalMid => vec![EdgeId::Vertical { i: p.i as usize, j: p.j as usize }],
            PointKind::HorizontalMid => vec![EdgeId::Horizontal { i: p.i as usize, j: p.j as usize }],
        };
        QuadPointRef { point: p, location: self.point_location(p), owner_edges, stencil }
    }
}

/// Dense per-cell storage including the ghost rings.
#[derive(Debug, Clone, PartialEq)]
pub struct CellArray<T> {
    nx: usize,
    ny: usize,
    g: usize,
    data: Vec<T>,
}

pub type CellField = CellArray<f64>;

impl<T: Copy> CellArray<T> {
    pub fn new(grid: &CartesianGrid, value: T) -> Self {
        let g = grid.ghost_layers;
        Self {
            nx: grid.nx,
            ny: grid.ny,
            g,
            data: vec![value; (grid.nx + 2 * g) * (grid.ny + 2 * g)],
        }
    }

    #[inline]
    fn offset(&self, i: isize, j: isize) -> usize {
        let g = self.g as isize;
        debug_assert!(i >= -g && j >= -g && i < self.nx as isize + g && j < self.ny as isize + g);
        (i + g) as usize + (j + g) as usize * (self.nx + 2 * self.g)
    }

    #[inline]
    pub fn get(&self, c: CellIndex) -> T {
        self.data[self.offset(c.i, c.j)]
    }

    #[inline]
    pub fn set(&mut self, c: CellIndex, v: T) {
        let k = self.offset(c.i, c.j);
        self.data[k] = v;
    }

    /// Whether `c` addresses storage (interior or ghost).
    pub fn contains(&self, c: CellIndex) -> bool {
        let g = self.g as isize;
        c.i >= -g && c.j >= -g && c.i < self.nx as isize + g && c.j < self.ny as isize + g
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny as isize {
            for i in 0..self.nx as isize {
                out.push(self.get(CellIndex::new(i, j)));
            }
        }
        out
    }
}
