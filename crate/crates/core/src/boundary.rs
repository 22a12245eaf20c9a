//! Ghost-cell filling for the four sides of the rectangle.

use crate::mesh::{CartesianGrid, CellField, CellIndex};
use crate::state::ConservedState;

/// Free-surface level prescribed on an inflow boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceProfile {
    Constant(f64),
    /// `H0 + alpha H0 sech²(xi sqrt(g H0 / L) (t - t_peak))` with
    /// `xi = sqrt(3 alpha (1 + alpha) L² / (4 H0²))`.
    Solitary { still: f64, alpha: f64, length: f64, t_peak: f64 },
}

impl SurfaceProfile {
    pub fn level(&self, t: f64, g: f64) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::Solitary { still, alpha, length, t_peak } => {
                let xi = (3.0 * alpha * (1.0 + alpha) * length * length / (4.0 * still * still)).sqrt();
                let arg = xi * (g * still / length).sqrt() * (t - t_peak);
                still + alpha * still / arg.cosh().powi(2)
            }
        }
    }

    /// Undisturbed level used by the inflow velocity closure.
    pub fn still_level(&self) -> f64 {
        match *self {
            Self::Constant(h) => h,
            Self::Solitary { still, .. } => still,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// Zero-gradient extrapolation.
    Open,
    /// Wrap-around; the opposite side must be periodic too.
    Periodic,
    /// Reflective wall.
    Wall,
    /// Prescribed free surface with the velocity from the incoming Riemann
    /// invariant, directed into the domain.
    Inflow(SurfaceProfile),
}

/// Boundary kinds for the sides `x1 = min`, `x1 = max`, `x2 = min`, `x2 = max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    fn axis(self) -> usize {
        match self {
            Side::Left | Side::Right => 0,
            Side::Bottom | Side::Top => 1,
        }
    }

    /// Outward unit normal.
    fn normal(self) -> [f64; 2] {
        match self {
            Side::Left => [-1.0, 0.0],
            Side::Right => [1.0, 0.0],
            Side::Bottom => [0.0, -1.0],
            Side::Top => [0.0, 1.0],
        }
    }
}

/// How a scalar transforms under reflection at a wall across the given axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    /// Odd across walls normal to `x1` (resp. `x2`).
    OddAcross(usize),
}

impl BoundaryConditions {
    pub const fn uniform(kind: BoundaryKind) -> Self {
        Self { left: kind, right: kind, bottom: kind, top: kind }
    }

    pub fn walls() -> Self {
        Self::uniform(BoundaryKind::Wall)
    }

    pub fn open() -> Self {
        Self::uniform(BoundaryKind::Open)
    }

    /// Checks that periodic sides come in pairs.
    pub fn validate(&self) -> Result<(), String> {
        let p = |k: BoundaryKind| matches!(k, BoundaryKind::Periodic);
        if p(self.left) != p(self.right) {
            return Err("periodic boundary in x1 must be set on both sides".into());
        }
        if p(self.bottom) != p(self.top) {
            return Err("periodic boundary in x2 must be set on both sides".into());
        }
        Ok(())
    }

    fn kind(&self, side: Side) -> BoundaryKind {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
            Side::Bottom => self.bottom,
            Side::Top => self.top,
        }
    }

    /// True for edges on a wall, whose normal flux vanishes.
    pub fn is_wall_edge(&self, grid: &CartesianGrid, e: crate::mesh::EdgeId) -> bool {
        use crate::mesh::EdgeId;
        let wall = |k: BoundaryKind| matches!(k, BoundaryKind::Wall);
        match e {
            EdgeId::Vertical { i, .. } => (i == 0 && wall(self.left)) || (i == grid.nx && wall(self.right)),
            EdgeId::Horizontal { j, .. } => (j == 0 && wall(self.bottom)) || (j == grid.ny && wall(self.top)),
        }
    }

    /// Fills the ghost rings of a scalar field. Inflow sides extrapolate.
    pub fn fill_scalar(&self, grid: &CartesianGrid, f: &mut CellField, parity: Parity) {
        for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
            let kind = self.kind(side);
            for (ghost, src) in ghost_pairs(grid, side, kind) {
                let mut v = f.get(src);
                if matches!(kind, BoundaryKind::Wall) && parity == Parity::OddAcross(side.axis()) {
                    v = -v;
                }
                f.set(ghost, v);
            }
        }
    }

    /// Fills the ghost rings of the conserved state at time `t`, given the
    /// bottom (with its ghosts already filled).
    pub fn fill_state(&self, grid: &CartesianGrid, u: &mut ConservedState, b: &CellField, g: f64, t: f64) {
        for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
            let kind = self.kind(side);
            for (ghost, src) in ghost_pairs(grid, side, kind) {
                let value = match kind {
                    BoundaryKind::Inflow(profile) => {
                        let level = profile.level(t, g);
                        let h = (level - b.get(ghost)).max(0.0);
                        let speed = if h > 0.0 {
                            2.0 * ((g * level).sqrt() - (g * profile.still_level()).sqrt())
                        } else {
                            0.0
                        };
                        let n = side.normal();
                        [h, -h * speed * n[0], -h * speed * n[1]]
                    }
                    BoundaryKind::Wall => {
                        let mut v = u.get(src);
                        v[1 + side.axis()] = -v[1 + side.axis()];
                        v
                    }
                    BoundaryKind::Open | BoundaryKind::Periodic => u.get(src),
                };
                u.set(ghost, value);
            }
        }
    }
}

/// `(ghost, source)` cell pairs for one side. The x1 sides cover interior
/// rows only; the x2 sides cover full rows including the x1 ghosts, so
/// filling the x1 sides first completes the corner blocks.
fn ghost_pairs(grid: &CartesianGrid, side: Side, kind: BoundaryKind) -> Vec<(CellIndex, CellIndex)> {
    let g = grid.ghost_layers as isize;
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut out = Vec::new();
    // Index of the source cell for ghost layer `k` (1-based) along one axis.
    let src = |k: isize, n: isize, low: bool| -> isize {
        let m = match kind {
            BoundaryKind::Periodic => {
                if low {
                    n - k
                } else {
                    k - 1
                }
            }
            BoundaryKind::Wall => {
                if low {
                    k - 1
                } else {
                    n - k
                }
            }
            BoundaryKind::Open | BoundaryKind::Inflow(_) => {
                if low {
                    0
                } else {
                    n - 1
                }
            }
        };
        m.clamp(0, n - 1)
    };
    for k in 1..=g {
        match side {
            Side::Left | Side::Right => {
                let low = side == Side::Left;
                let gi = if low { -k } else { nx - 1 + k };
                let si = src(k, nx, low);
                for j in 0..ny {
                    out.push((CellIndex::new(gi, j), CellIndex::new(si, j)));
                }
            }
            Side::Bottom | Side::Top => {
                let low = side == Side::Bottom;
                let gj = if low { -k } else { ny - 1 + k };
                let sj = src(k, ny, low);
                for i in -g..nx + g {
                    out.push((CellIndex::new(i, gj), CellIndex::new(i, sj)));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Extent;

    fn grid() -> CartesianGrid {
        CartesianGrid::new(Extent::new(0.0, 3.0, 0.0, 3.0), 3, 3).unwrap()
    }

    fn ramp(grid: &CartesianGrid) -> CellField {
        let mut f = CellField::new(grid, f64::NAN);
        for c in grid.cells() {
            f.set(c, (c.i + 10 * c.j) as f64);
        }
        f
    }

    #[test]
    fn open_copies_nearest_cell() {
        let g = grid();
        let mut f = ramp(&g);
        BoundaryConditions::open().fill_scalar(&g, &mut f, Parity::Even);
        assert_eq!(f.get(CellIndex::new(-2, 1)), 10.0);
        assert_eq!(f.get(CellIndex::new(4, 2)), 22.0);
        assert_eq!(f.get(CellIndex::new(-1, -1)), 0.0);
        assert_eq!(f.get(CellIndex::new(4, 4)), 22.0);
    }

    #[test]
    fn periodic_wraps() {
        let g = grid();
        let mut f = ramp(&g);
        BoundaryConditions::uniform(BoundaryKind::Periodic).fill_scalar(&g, &mut f, Parity::Even);
        assert_eq!(f.get(CellIndex::new(-1, 0)), 2.0);
        assert_eq!(f.get(CellIndex::new(-2, 0)), 1.0);
        assert_eq!(f.get(CellIndex::new(3, 1)), 10.0);
        assert_eq!(f.get(CellIndex::new(-1, -1)), 22.0);
    }

    #[test]
    fn wall_mirrors_and_flips_normal_component() {
        let g = grid();
        let mut f = ramp(&g);
        BoundaryConditions::walls().fill_scalar(&g, &mut f, Parity::OddAcross(0));
        assert_eq!(f.get(CellIndex::new(-1, 1)), -10.0);
        assert_eq!(f.get(CellIndex::new(-2, 1)), -11.0);
        // Tangential walls keep the sign.
        assert_eq!(f.get(CellIndex::new(1, -2)), 11.0);
    }

    #[test]
    fn inflow_sets_level_and_incoming_velocity() {
        let g = grid();
        let mut u = ConservedState::zeros(&g);
        for c in g.cells() {
            u.set(c, [1.0, 0.0, 0.0]);
        }
        let b = CellField::new(&g, 0.0);
        let profile = SurfaceProfile::Constant(1.0);
        let bc = BoundaryConditions { left: BoundaryKind::Inflow(profile), ..BoundaryConditions::open() };
        u.set(CellIndex::new(0, 0), [2.0, 0.0, 0.0]);
        bc.fill_state(&g, &mut u, &b, 9.81, 0.0);
        assert_eq!(u.get(CellIndex::new(-1, 0)), [1.0, 0.0, 0.0]);

        let raised = SurfaceProfile::Solitary { still: 1.0, alpha: 0.1, length: 15.0, t_peak: 0.0 };
        let bc = BoundaryConditions { left: BoundaryKind::Inflow(raised), ..BoundaryConditions::open() };
        bc.fill_state(&g, &mut u, &b, 9.81, 0.0);
        let [h, q1, q2] = u.get(CellIndex::new(-1, 2));
        assert!((h - 1.1).abs() < 1e-15);
        assert!(q1 > 0.0 && q2 == 0.0);
    }

    #[test]
    fn solitary_peak() {
        let p = SurfaceProfile::Solitary { still: 0.32, alpha: 0.1, length: 15.0, t_peak: 3.5 };
        assert!((p.level(3.5, 9.81) - 0.352).abs() < 1e-15);
        assert!((p.level(40.0, 9.81) - 0.32).abs() < 1e-12);
    }
}
