//! Continuous piecewise-bilinear recovery from corner averages.
//!
//! Corner values are means over the dry-modified corner stencils, so the
//! recovered depth is non-negative at every corner and, being bilinear,
//! everywhere inside a wet cell. The recovery is not conservative; the
//! per-cell defect `W - W~` is kept as a piecewise-constant correction.

use crate::evolution::{dry_stencil_modify, StencilCell};
use crate::mesh::{CartesianGrid, CellArray, CellIndex};
use crate::state::{mean4, Bathymetry, CornerField, PrimitiveState};

/// `value + d1 (x1 - xc1) + d2 (x2 - xc2) + d12 (x1 - xc1)(x2 - xc2)` about
/// the cell center. Slopes are per meter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bilinear {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl Bilinear {
    pub const fn constant(value: f64) -> Self {
        Self { value, d1: 0.0, d2: 0.0, d12: 0.0 }
    }

    /// Interpolant of the corner values `(lower-left, lower-right,
    /// upper-left, upper-right)` on a square of side `dx`.
    pub fn from_corners(ll: f64, lr: f64, ul: f64, ur: f64, dx: f64) -> Self {
        Self {
            value: mean4(ll, lr, ul, ur),
            d1: 0.5 * ((lr - ll) + (ur - ul)) / dx,
            d2: 0.5 * ((ul - ll) + (ur - lr)) / dx,
            d12: ((ur - ul) - (lr - ll)) / (dx * dx),
        }
    }

    /// Value at offset `r` (meters) from the cell center.
    #[inline]
    pub fn eval(&self, r: [f64; 2]) -> f64 {
        self.value + self.d1 * r[0] + self.d2 * r[1] + self.d12 * r[0] * r[1]
    }

    /// Gradient at offset `r` from the cell center.
    #[inline]
    pub fn gradient(&self, r: [f64; 2]) -> [f64; 2] {
        [self.d1 + self.d12 * r[1], self.d2 + self.d12 * r[0]]
    }

    pub fn is_flat(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d12 == 0.0
    }

    fn flattened(self) -> Self {
        Self::constant(self.value)
    }
}

/// Recovered free surface, velocity, and bottom in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellRecon {
    pub surface: Bilinear,
    pub v1: Bilinear,
    pub v2: Bilinear,
    pub b: Bilinear,
}

impl CellRecon {
    /// Constant data `(H, 0, 0)` over a bottom at `H`.
    pub const fn still_surface(h_surface: f64) -> Self {
        Self {
            surface: Bilinear::constant(h_surface),
            v1: Bilinear::constant(0.0),
            v2: Bilinear::constant(0.0),
            b: Bilinear::constant(h_surface),
        }
    }
}

/// Dry-modified stencil means at every corner of the extended lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerValues {
    pub surface: CornerField,
    pub v1: CornerField,
    pub v2: CornerField,
    pub b: CornerField,
}

/// Stencil value of a cell as seen by the predictor.
#[inline]
pub fn stencil_cell(prim: &PrimitiveState, bath: &Bathymetry, c: CellIndex) -> StencilCell {
    StencilCell {
        cell: c,
        h: prim.h.get(c),
        surface: prim.surface.get(c),
        b: bath.b_cell.get(c),
        v1: prim.v1.get(c),
        v2: prim.v2.get(c),
    }
}

/// Corner means of `(H, v1, v2, b)` over the dry-modified stencils.
///
/// Corners whose stencil is entirely dry keep the plain means (`H = b`,
/// `v = 0`).
pub fn corner_averages(prim: &PrimitiveState, bath: &Bathymetry, grid: &CartesianGrid) -> CornerValues {
    let mut out = CornerValues {
        surface: CornerField::new(grid, 0.0),
        v1: CornerField::new(grid, 0.0),
        v2: CornerField::new(grid, 0.0),
        b: CornerField::new(grid, 0.0),
    };
    for (i, j) in out.b.indices().collect::<Vec<_>>() {
        let cells = grid.corner_stencil(i, j).map(|c| stencil_cell(prim, bath, c));
        let cells = match dry_stencil_modify(&cells) {
            Some(m) => [m.cells[0], m.cells[1], m.cells[2], m.cells[3]],
            None => cells,
        };
        let m = |f: fn(&StencilCell) -> f64| mean4(f(&cells[0]), f(&cells[1]), f(&cells[2]), f(&cells[3]));
        out.surface.set(i, j, m(|c| c.surface));
        out.v1.set(i, j, m(|c| c.v1));
        out.v2.set(i, j, m(|c| c.v2));
        out.b.set(i, j, m(|c| c.b));
    }
    out
}

/// Bilinear interpolant of the corner values in every cell of rings up to
/// one; dry cells keep only the center value. Outer ghost cells get the
/// constant cell data.
pub fn build_recon(
    corners: &CornerValues,
    prim: &PrimitiveState,
    bath: &Bathymetry,
    grid: &CartesianGrid,
) -> CellArray<CellRecon> {
    let mut out = CellArray::new(grid, CellRecon::default());
    let g = grid.ghost_layers as isize;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    for j in -g..ny + g {
        for i in -g..nx + g {
            let c = CellIndex::new(i, j);
            let inner = i >= -1 && j >= -1 && i <= nx && j <= ny;
            let recon = if inner {
                let bl = |f: &CornerField| {
                    Bilinear::from_corners(f.get(i, j), f.get(i + 1, j), f.get(i, j + 1), f.get(i + 1, j + 1), grid.dx)
                };
                let mut r = CellRecon {
                    surface: bl(&corners.surface),
                    v1: bl(&corners.v1),
                    v2: bl(&corners.v2),
                    b: bl(&corners.b),
                };
                if prim.h.get(c) == 0.0 {
                    r.surface = r.surface.flattened();
                    r.v1 = r.v1.flattened();
                    r.v2 = r.v2.flattened();
                    r.b = r.b.flattened();
                }
                r
            } else {
                CellRecon {
                    surface: Bilinear::constant(prim.surface.get(c)),
                    v1: Bilinear::constant(prim.v1.get(c)),
                    v2: Bilinear::constant(prim.v2.get(c)),
                    b: Bilinear::constant(bath.b_cell.get(c)),
                }
            };
            out.set(c, recon);
        }
    }
    out
}

/// Piecewise-constant defect `(H, v1, v2)_i - W~_i`; the bottom carries no
/// correction.
pub fn correction_field(prim: &PrimitiveState, recon: &CellArray<CellRecon>, grid: &CartesianGrid) -> CellArray<[f64; 3]> {
    let mut out = CellArray::new(grid, [0.0; 3]);
    let g = grid.ghost_layers as isize;
    for j in -g..grid.ny as isize + g {
        for i in -g..grid.nx as isize + g {
            let c = CellIndex::new(i, j);
            let r = recon.get(c);
            out.set(
                c,
                [
                    prim.surface.get(c) - r.surface.value,
                    prim.v1.get(c) - r.v1.value,
                    prim.v2.get(c) - r.v2.value,
                ],
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CellField, Extent};
    use crate::state::{conserved_to_primitive, ConservedState, DryParams};

    fn setup(
        n: usize,
        depth: impl Fn(CellIndex) -> f64,
        bottom: impl Fn(CellIndex) -> f64,
    ) -> (CartesianGrid, PrimitiveState, Bathymetry) {
        let grid = CartesianGrid::new(Extent::new(0.0, n as f64, 0.0, n as f64), n, n).unwrap();
        let mut b = CellField::new(&grid, 0.0);
        let mut u = ConservedState::zeros(&grid);
        let g = grid.ghost_layers as isize;
        for j in -g..n as isize + g {
            for i in -g..n as isize + g {
                let c = CellIndex::new(i, j);
                b.set(c, bottom(c));
                u.set(c, [depth(c), 0.0, 0.0]);
            }
        }
        let bath = Bathymetry::new(&grid, b, 9.81);
        let dry = DryParams::for_grid(&grid, 1e-8);
        let prim = conserved_to_primitive(&u, &bath, &grid, &dry);
        (grid, prim, bath)
    }

    #[test]
    fn zero_corners_give_zero_function() {
        let r = Bilinear::from_corners(0.0, 0.0, 0.0, 0.0, 0.3);
        assert_eq!(r, Bilinear::default());
    }

    #[test]
    fn linear_field_is_reproduced() {
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - 0.5 * y;
        let dx = 0.25;
        let r = Bilinear::from_corners(f(0.0, 0.0), f(dx, 0.0), f(0.0, dx), f(dx, dx), dx);
        assert!((r.d1 - 2.0).abs() < 1e-14);
        assert!((r.d2 + 0.5).abs() < 1e-14);
        assert!(r.d12.abs() < 1e-12);
        assert!((r.value - f(dx / 2.0, dx / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn interpolates_corners() {
        let (ll, lr, ul, ur) = (1.0, 4.0, -2.0, 3.5);
        let dx = 0.5;
        let r = Bilinear::from_corners(ll, lr, ul, ur, dx);
        let h = dx / 2.0;
        assert!((r.eval([-h, -h]) - ll).abs() < 1e-14);
        assert!((r.eval([h, -h]) - lr).abs() < 1e-14);
        assert!((r.eval([-h, h]) - ul).abs() < 1e-14);
        assert!((r.eval([h, h]) - ur).abs() < 1e-14);
    }

    #[test]
    fn uniform_and_mean_corner_values() {
        let (grid, prim, bath) = setup(3, |_| 2.0, |c| 1.0 + (c.i.rem_euclid(2) + 2 * c.j.rem_euclid(2)) as f64);
        let cv = corner_averages(&prim, &bath, &grid);
        // Around every corner the four bottoms are {1, 2, 3, 4}.
        assert_eq!(cv.b.get(1, 1), 2.5);
        assert!((cv.surface.get(1, 1) - 4.5).abs() < 1e-15);
        assert_eq!(cv.v1.get(2, 2), 0.0);
    }

    #[test]
    fn lake_at_rest_with_emerged_cell() {
        // Wet cells at H = 10 over b = 0; cell (1, 1) is dry with b = 15.
        let island = CellIndex::new(1, 1);
        let (grid, prim, bath) =
            setup(3, |c| if c == island { 0.0 } else { 10.0 }, |c| if c == island { 15.0 } else { 0.0 });
        let cv = corner_averages(&prim, &bath, &grid);
        for (i, j) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            assert_eq!(cv.surface.get(i, j), 10.0);
            assert_eq!(cv.v1.get(i, j), 0.0);
            assert!(cv.surface.get(i, j) - cv.b.get(i, j) >= 0.0);
        }
        let recon = build_recon(&cv, &prim, &bath, &grid);
        for c in grid.cells() {
            let r = recon.get(c);
            assert_eq!(r.surface.value, 10.0);
            assert!(r.surface.is_flat() && r.v1.is_flat());
        }
        let corr = correction_field(&prim, &recon, &grid);
        for c in grid.cells().filter(|c| *c != island) {
            assert_eq!(corr.get(c), [0.0; 3]);
        }
    }

    #[test]
    fn dry_cell_derivatives_vanish() {
        let dry_cell = CellIndex::new(1, 1);
        let (grid, prim, bath) = setup(3, |c| if c == dry_cell { 0.0 } else { 1.0 + 0.1 * c.i as f64 }, |_| 0.0);
        let cv = corner_averages(&prim, &bath, &grid);
        let recon = build_recon(&cv, &prim, &bath, &grid);
        let r = recon.get(dry_cell);
        assert!(r.surface.is_flat() && r.v1.is_flat() && r.v2.is_flat() && r.b.is_flat());
        let expect = mean4(cv.surface.get(1, 1), cv.surface.get(2, 1), cv.surface.get(1, 2), cv.surface.get(2, 2));
        assert_eq!(r.surface.value, expect);
    }

    #[test]
    fn correction_of_single_spike() {
        // H = 1 in the central cell of a 3x3 patch, 0 around, flat bottom
        // with a thin wet layer everywhere so no dry modification applies.
        let base = 1.0;
        let spike = CellIndex::new(1, 1);
        let (grid, prim, bath) = setup(3, |c| if c == spike { base + 1.0 } else { base }, |_| 0.0);
        let cv = corner_averages(&prim, &bath, &grid);
        let recon = build_recon(&cv, &prim, &bath, &grid);
        let corr = correction_field(&prim, &recon, &grid);
        // Each corner of the spike cell averages one spike and three base
        // cells, so W~ = base + 1/4 and the correction is 3/4.
        assert!((corr.get(spike)[0] - 0.75).abs() < 1e-15);
        // The edge neighbour shares two corners with the spike: W~ = base + 1/8.
        assert!((corr.get(CellIndex::new(0, 1))[0] + 0.125).abs() < 1e-15);
    }

    #[test]
    fn linear_data_has_no_interior_correction() {
        let (grid, prim, bath) = setup(4, |c| 1.0 + 0.1 * c.i as f64 - 0.05 * c.j as f64, |_| 0.0);
        let cv = corner_averages(&prim, &bath, &grid);
        let recon = build_recon(&cv, &prim, &bath, &grid);
        let corr = correction_field(&prim, &recon, &grid);
        for c in grid.cells() {
            assert!(corr.get(c)[0].abs() < 1e-14, "{c:?}");
        }
    }

    #[test]
    fn continuity_across_shared_edges() {
        let (grid, prim, bath) = setup(3, |c| 1.0 + ((c.i * 7 + c.j * 3) % 5) as f64 * 0.1, |_| 0.0);
        let cv = corner_averages(&prim, &bath, &grid);
        let recon = build_recon(&cv, &prim, &bath, &grid);
        let (a, b) = (recon.get(CellIndex::new(0, 1)), recon.get(CellIndex::new(1, 1)));
        for t in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            let left = a.surface.eval([0.5, t]);
            let right = b.surface.eval([-0.5, t]);
            assert!((left - right).abs() < 1e-14);
        }
    }
}
