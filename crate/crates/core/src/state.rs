//! Conserved and primitive fields, bathymetry, and the nearly-dry velocity
//! treatment.

use crate::mesh::{CartesianGrid, CellField, CellIndex};

/// Default gravitational acceleration (m/s²).
pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Default dry threshold (m).
pub const DEFAULT_EPS_H: f64 = 1e-8;

/// Per-cell `(h, h v1, h v2)` including ghost rings, at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState {
    pub h: CellField,
    pub hv1: CellField,
    pub hv2: CellField,
    pub t: f64,
}

impl ConservedState {
    pub fn zeros(grid: &CartesianGrid) -> Self {
        Self {
            h: CellField::new(grid, 0.0),
            hv1: CellField::new(grid, 0.0),
            hv2: CellField::new(grid, 0.0),
            t: 0.0,
        }
    }

    #[inline]
    pub fn get(&self, c: CellIndex) -> [f64; 3] {
        [self.h.get(c), self.hv1.get(c), self.hv2.get(c)]
    }

    #[inline]
    pub fn set(&mut self, c: CellIndex, u: [f64; 3]) {
        self.h.set(c, u[0]);
        self.hv1.set(c, u[1]);
        self.hv2.set(c, u[2]);
    }

    /// Total water volume over interior cells.
    pub fn volume(&self, grid: &CartesianGrid) -> f64 {
        grid.cells().map(|c| self.h.get(c)).sum::<f64>() * grid.cell_area()
    }

    pub fn min_depth(&self, grid: &CartesianGrid) -> f64 {
        grid.cells().map(|c| self.h.get(c)).fold(f64::INFINITY, f64::min)
    }
}

/// Per-cell `(h, v1, v2)` plus the free surface `H = h + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    pub h: CellField,
    pub v1: CellField,
    pub v2: CellField,
    pub surface: CellField,
    /// Reference speed used for desingularization in this state.
    pub v_ref: f64,
}

impl PrimitiveState {
    #[inline]
    pub fn get(&self, c: CellIndex) -> PrimitiveValue {
        PrimitiveValue { h: self.h.get(c), v1: self.v1.get(c), v2: self.v2.get(c) }
    }
}

/// Point or cell value of the primitive variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PrimitiveValue {
    pub h: f64,
    pub v1: f64,
    pub v2: f64,
}

impl PrimitiveValue {
    pub const DRY: Self = Self { h: 0.0, v1: 0.0, v2: 0.0 };

    pub fn speed(&self) -> f64 {
        self.v1.hypot(self.v2)
    }

    pub fn sound_speed(&self, g: f64) -> f64 {
        (g * self.h.max(0.0)).sqrt()
    }

    pub fn to_conserved(&self) -> [f64; 3] {
        [self.h, self.h * self.v1, self.h * self.v2]
    }
}

/// Bottom topography: cell averages with ghost rings, plus corner and
/// edge-midpoint values derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    pub b_cell: CellField,
    /// Corner values on the lattice `-1..=nx+1` x `-1..=ny+1`.
    pub b_corner: CornerField,
    pub g: f64,
}

impl Bathymetry {
    /// Builds corner values as stencil means of `b_cell` (ghosts included).
    pub fn new(grid: &CartesianGrid, b_cell: CellField, g: f64) -> Self {
        let mut b_corner = CornerField::new(grid, 0.0);
        for (i, j) in b_corner.indices() {
            let [a, b, c, d] = grid.corner_stencil(i, j).map(|s| b_cell.get(s));
            b_corner.set(i, j, mean4(a, b, c, d));
        }
        Self { b_cell, b_corner, g }
    }

    /// Flat bottom at height zero.
    pub fn flat(grid: &CartesianGrid, g: f64) -> Self {
        Self::new(grid, CellField::new(grid, 0.0), g)
    }

    /// Value at the midpoint of the edge joining two lattice corners.
    pub fn edge_mid(&self, a: (isize, isize), b: (isize, isize)) -> f64 {
        0.5 * (self.b_corner.get(a.0, a.1) + self.b_corner.get(b.0, b.1))
    }
}

/// Values on the extended corner lattice `-1..=nx+1` x `-1..=ny+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerField {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl CornerField {
    pub fn new(grid: &CartesianGrid, value: f64) -> Self {
        Self { nx: grid.nx, ny: grid.ny, data: vec![value; (grid.nx + 3) * (grid.ny + 3)] }
    }

    #[inline]
    fn offset(&self, i: isize, j: isize) -> usize {
        debug_assert!(i >= -1 && j >= -1 && i <= self.nx as isize + 1 && j <= self.ny as isize + 1);
        (i + 1) as usize + (j + 1) as usize * (self.nx + 3)
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> f64 {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, v: f64) {
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = (isize, isize)> {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        (-1..=ny + 1).flat_map(move |j| (-1..=nx + 1).map(move |i| (i, j)))
    }
}

/// Thresholds for dry and nearly-dry cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DryParams {
    pub eps_h: f64,
    pub eps_v: f64,
    pub l_ref: f64,
}

impl DryParams {
    /// `eps_v = dx / L_ref`, where `L_ref` is the largest max-norm distance
    /// between two cell centers (one cell width for a single-cell grid).
    pub fn for_grid(grid: &CartesianGrid, eps_h: f64) -> Self {
        let span = (grid.nx.max(grid.ny) - 1) as f64 * grid.dx;
        let l_ref = if span > 0.0 { span } else { grid.dx };
        Self { eps_h, eps_v: grid.dx / l_ref, l_ref }
    }
}

// Symmetric in its arguments so that mirrored stencils give identical means.
#[inline]
pub(crate) fn mean4(a: f64, b: f64, c: f64, d: f64) -> f64 {
    0.25 * ((a + d) + (b + c))
}

const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Mean of `f` over the square centered at `center` with side `dx`, by the
/// 3x3 tensor Gauss rule (exact for polynomials of degree five per axis).
pub fn gauss_cell_mean(f: &impl Fn([f64; 2]) -> f64, center: [f64; 2], dx: f64) -> f64 {
    let mut acc = 0.0;
    for (a, wa) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
        let mut row = 0.0;
        for (b, wb) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
            row += wb * f([center[0] + 0.5 * dx * a, center[1] + 0.5 * dx * b]);
        }
        acc += wa * row;
    }
    acc
}

/// Cell averages of a pointwise field over all cells, ghosts included.
pub fn cell_average_init(f: impl Fn([f64; 2]) -> f64, grid: &CartesianGrid) -> CellField {
    let mut out = CellField::new(grid, 0.0);
    let g = grid.ghost_layers as isize;
    for j in -g..grid.ny as isize + g {
        for i in -g..grid.nx as isize + g {
            let c = CellIndex::new(i, j);
            out.set(c, gauss_cell_mean(&f, grid.cell_center(c), grid.dx));
        }
    }
    out
}

/// Largest speed among cells deeper than `eps_v`; zero if there are none.
pub fn reference_speed(u: &ConservedState, grid: &CartesianGrid, dry: &DryParams) -> f64 {
    let mut v_ref: f64 = 0.0;
    for c in grid.cells() {
        let [h, hv1, hv2] = u.get(c);
        if h > dry.eps_v {
            v_ref = v_ref.max((hv1 / h).hypot(hv2 / h));
        }
    }
    v_ref
}

/// Limits a nearly-dry velocity to `v_ref (2 - v_ref/|v|)`, pointing along
/// the discharge.
///
/// Only velocities faster than `v_ref` are touched. With `v_ref = 0` the
/// limited speed is zero.
pub fn desingularize_velocity(v: [f64; 2], hv: [f64; 2], v_ref: f64) -> [f64; 2] {
    let speed = v[0].hypot(v[1]);
    if speed <= v_ref {
        return v;
    }
    let limited = v_ref * (2.0 - v_ref / speed);
    let q = hv[0].hypot(hv[1]);
    if q == 0.0 || limited == 0.0 {
        return [0.0, 0.0];
    }
    [limited * hv[0] / q, limited * hv[1] / q]
}

/// Primitive variables from conserved ones, over interior and ghost cells.
///
/// Cells shallower than `eps_h` become exactly dry; cells shallower than
/// `eps_v` have their velocity desingularized against the interior
/// reference speed.
pub fn conserved_to_primitive(
    u: &ConservedState,
    bath: &Bathymetry,
    grid: &CartesianGrid,
    dry: &DryParams,
) -> PrimitiveState {
    let v_ref = reference_speed(u, grid, dry);
    let mut h = CellField::new(grid, 0.0);
    let mut v1 = CellField::new(grid, 0.0);
    let mut v2 = CellField::new(grid, 0.0);
    let mut surface = bath.b_cell.clone();
    let g = grid.ghost_layers as isize;
    for j in -g..grid.ny as isize + g {
        for i in -g..grid.nx as isize + g {
            let c = CellIndex::new(i, j);
            let [hc, q1, q2] = u.get(c);
            if !(hc >= dry.eps_h) {
                continue;
            }
            let mut v = [q1 / hc, q2 / hc];
            if hc < dry.eps_v {
                v = desingularize_velocity(v, [q1, q2], v_ref);
            }
            h.set(c, hc);
            v1.set(c, v[0]);
            v2.set(c, v[1]);
            surface.set(c, hc + bath.b_cell.get(c));
        }
    }
    PrimitiveState { h, v1, v2, surface, v_ref }
}

/// Eigenvalues `(v·ξ - c, v·ξ, v·ξ + c)` of the flux Jacobian along `xi`.
pub fn eigenvalues(w: PrimitiveValue, xi: [f64; 2], g: f64) -> [f64; 3] {
    let vn = w.v1 * xi[0] + w.v2 * xi[1];
    let c = w.sound_speed(g);
    [vn - c, vn, vn + c]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Extent;
    use proptest::prelude::*;

    fn grid(n: usize) -> CartesianGrid {
        CartesianGrid::new(Extent::new(0.0, n as f64, 0.0, n as f64), n, n).unwrap()
    }

    fn single(h: f64, hv1: f64, hv2: f64) -> (CartesianGrid, ConservedState, Bathymetry) {
        let g = grid(1);
        let mut u = ConservedState::zeros(&g);
        u.set(CellIndex::new(0, 0), [h, hv1, hv2]);
        let b = Bathymetry::flat(&g, 9.81);
        (g, u, b)
    }

    #[test]
    fn gauss_averages() {
        let g = grid(3);
        let c = cell_average_init(|_| 2.5, &g);
        assert!(g.cells().all(|k| (c.get(k) - 2.5).abs() < 1e-14));
        let lin = cell_average_init(|x| x[0], &g);
        for k in g.cells() {
            assert!((lin.get(k) - g.cell_center(k)[0]).abs() < 1e-14);
        }
        let sq = cell_average_init(|x| x[0] * x[0], &g);
        assert!((sq.get(CellIndex::new(0, 0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn dry_threshold_zeroes_cell() {
        let (g, u, b) = single(1e-9, 1e-9, 0.0);
        let dry = DryParams { eps_h: 1e-8, eps_v: 1e-3, l_ref: 1.0 };
        let w = conserved_to_primitive(&u, &b, &g, &dry);
        assert_eq!(w.get(CellIndex::new(0, 0)), PrimitiveValue::DRY);
    }

    #[test]
    fn plain_division() {
        let (g, u, b) = single(4.0, 8.0, 0.0);
        let dry = DryParams { eps_h: 1e-8, eps_v: 1e-3, l_ref: 1.0 };
        let w = conserved_to_primitive(&u, &b, &g, &dry);
        let c = w.get(CellIndex::new(0, 0));
        assert_eq!((c.v1, c.v2), (2.0, 0.0));
    }

    #[test]
    fn nearly_dry_cell_is_limited_by_reference_speed() {
        let g = grid(2);
        let mut u = ConservedState::zeros(&g);
        u.set(CellIndex::new(0, 0), [1.0, 1.0, 0.0]);
        let eps_v = 0.01;
        u.set(CellIndex::new(1, 0), [eps_v / 2.0, 50.0, 0.0]);
        let dry = DryParams { eps_h: 1e-8, eps_v, l_ref: 1.0 };
        let w = conserved_to_primitive(&u, &Bathymetry::flat(&g, 9.81), &g, &dry);
        assert_eq!(w.v_ref, 1.0);
        let s = w.get(CellIndex::new(1, 0)).speed();
        assert!(s > 1.0 && s <= 2.0, "speed {s}");
    }

    #[test]
    fn reference_speed_cases() {
        let g = grid(2);
        let dry = DryParams { eps_h: 1e-8, eps_v: 0.01, l_ref: 1.0 };
        let mut u = ConservedState::zeros(&g);
        assert_eq!(reference_speed(&u, &g, &dry), 0.0);
        u.set(CellIndex::new(0, 0), [1.0, 3.0, 4.0]);
        assert_eq!(reference_speed(&u, &g, &dry), 5.0);
        let mut u = ConservedState::zeros(&g);
        u.set(CellIndex::new(0, 0), [1.0, 1.0, 0.0]);
        u.set(CellIndex::new(1, 0), [0.005, 0.5, 0.0]);
        assert_eq!(reference_speed(&u, &g, &dry), 1.0);
    }

    #[test]
    fn desingularization_formula() {
        assert_eq!(desingularize_velocity([2.0, 0.0], [2.0, 0.0], 1.0), [1.5, 0.0]);
        let far = desingularize_velocity([1e12, 0.0], [1.0, 0.0], 1.0);
        assert!((far[0] - 2.0).abs() < 1e-11);
        assert_eq!(desingularize_velocity([1.0, 0.0], [1.0, 0.0], 1.0), [1.0, 0.0]);
        // Direction follows the discharge.
        let v = desingularize_velocity([0.0, 4.0], [0.0, -1.0], 1.0);
        assert!(v[1] < 0.0 && v[0] == 0.0);
    }

    #[test]
    fn eigenvalue_examples() {
        let g = 9.81;
        let h = 1.0 / g;
        assert_eq!(eigenvalues(PrimitiveValue { h, v1: 3.0, v2: 0.0 }, [1.0, 0.0], g), [2.0, 3.0, 4.0]);
        assert_eq!(eigenvalues(PrimitiveValue::DRY, [1.0, 0.0], g), [0.0, 0.0, 0.0]);
        let h = 4.0 / g;
        assert_eq!(eigenvalues(PrimitiveValue { h, v1: 0.0, v2: 0.0 }, [0.0, 1.0], g), [-2.0, 0.0, 2.0]);
    }

    #[test]
    fn corner_bathymetry_of_linear_bottom_is_exact() {
        let g = grid(4);
        let b = cell_average_init(|x| 0.3 * x[0] - 0.2 * x[1], &g);
        let bath = Bathymetry::new(&g, b, 9.81);
        for j in 1..4 {
            for i in 1..4 {
                let x = g.corner_location(i, j);
                assert!((bath.b_corner.get(i, j) - (0.3 * x[0] - 0.2 * x[1])).abs() < 1e-13);
            }
        }
        assert!((bath.edge_mid((1, 1), (1, 2)) - (0.3 - 0.3)).abs() < 1e-13);
    }

    #[test]
    fn eps_v_from_reference_length() {
        let g = CartesianGrid::new(Extent::new(0.0, 25.0, 0.0, 0.5), 300, 6).unwrap();
        let d = DryParams::for_grid(&g, 1e-8);
        assert!((d.l_ref - 299.0 * g.dx).abs() < 1e-12);
        assert!((d.eps_v - 1.0 / 299.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn desingularized_speed_is_monotone_and_bounded(a in 1.0f64..1e6, b in 1.0f64..1e6, v_ref in 0.01f64..10.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let s_lo = desingularize_velocity([lo * v_ref, 0.0], [1.0, 0.0], v_ref)[0];
            let s_hi = desingularize_velocity([hi * v_ref, 0.0], [1.0, 0.0], v_ref)[0];
            prop_assert!(s_lo <= s_hi + 1e-12);
            prop_assert!(s_hi <= 2.0 * v_ref * (1.0 + 1e-15));
            prop_assert!(s_lo >= v_ref * (1.0 - 1e-15));
        }

        #[test]
        fn primitive_round_trip(h in 1e-2f64..10.0, q1 in -5.0f64..5.0, q2 in -5.0f64..5.0) {
            let (g, u, b) = single(h, q1, q2);
            let dry = DryParams { eps_h: 1e-8, eps_v: 1e-3, l_ref: 1.0 };
            let w = conserved_to_primitive(&u, &b, &g, &dry).get(CellIndex::new(0, 0));
            let back = w.to_conserved();
            prop_assert_eq!(back[0], h);
            prop_assert!((back[1] - q1).abs() <= 1e-14 * q1.abs().max(1.0));
            prop_assert!((back[2] - q2).abs() <= 1e-14 * q2.abs().max(1.0));
        }
    }
}
