//! Benchmark problems, their reference solutions, and error measures.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::boundary::{BoundaryConditions, BoundaryKind, SurfaceProfile};
use crate::evolution::OperatorOrder;
use crate::mesh::{CartesianGrid, CellField, Extent, MeshError};
use crate::solver::{Solver, SolverParams};
use crate::state::{gauss_cell_mean, ConservedState, DEFAULT_GRAVITY};

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario `{name}`; valid ids: {}", ScenarioId::ALL.map(|s| s.name()).join(", "))]
    Unknown { name: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    CircularDamBreak,
    SlopingShore,
    DoubleRarefaction,
    ThackerCurved,
    ThackerPlanar,
    ConicalIsland,
    /// The island bathymetry with still water and no incoming wave.
    ConicalIslandRest,
    DamBreak1d,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 8] = [
        Self::CircularDamBreak,
        Self::SlopingShore,
        Self::DoubleRarefaction,
        Self::ThackerCurved,
        Self::ThackerPlanar,
        Self::ConicalIsland,
        Self::ConicalIslandRest,
        Self::DamBreak1d,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            Self::CircularDamBreak => "circular-dam-break",
            Self::SlopingShore => "sloping-shore",
            Self::DoubleRarefaction => "double-rarefaction",
            Self::ThackerCurved => "thacker-curved",
            Self::ThackerPlanar => "thacker-planar",
            Self::ConicalIsland => "conical-island",
            Self::ConicalIslandRest => "conical-island-rest",
            Self::DamBreak1d => "dam-break-1d",
        }
    }

    pub const fn summary(self) -> &'static str {
        match self {
            Self::CircularDamBreak => "break of a circular dam over a dry, flat bed",
            Self::SlopingShore => "solitary wave run-up and reflection on a sloping beach",
            Self::DoubleRarefaction => "two separating supersonic waves drying a step",
            Self::ThackerCurved => "radially oscillating surface in a parabolic basin (exact)",
            Self::ThackerPlanar => "planar surface rotating in a parabolic basin (exact)",
            Self::ConicalIsland => "solitary wave running up a conical island, with gages",
            Self::ConicalIslandRest => "still water around the conical island",
            Self::DamBreak1d => "first-order wet/wet dam break across a sonic point (exact)",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| ScenarioError::Unknown { name: s.to_string() })
    }
}

/// Point at which the free surface is recorded over time.
#[derive(Debug, Clone, PartialEq)]
pub struct Gage {
    pub name: String,
    pub location: [f64; 2],
}

/// Scenario-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Setup {
    CircularDam { center: [f64; 2], radius: f64, inside: f64, outside: f64 },
    SlopingShore { depth: f64, amplitude: f64, gamma: f64, x_a: f64, slope: f64 },
    DoubleRarefaction { level: f64, discharge: f64, split: f64, step: (f64, f64), step_height: f64 },
    Thacker(Thacker),
    ConicalIsland { level: f64, center: [f64; 2], wave: bool },
    DamBreak { left: f64, right: f64, dam: f64 },
}

/// A full benchmark description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: ScenarioId,
    pub extent: Extent,
    pub nx: usize,
    pub ny: usize,
    pub g: f64,
    pub bc: BoundaryConditions,
    pub end_time: f64,
    pub snapshot_times: Vec<f64>,
    pub gages: Vec<Gage>,
    pub order: OperatorOrder,
    pub setup: Setup,
}

/// Reference solution value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValue {
    pub h: f64,
    pub v1: f64,
    pub v2: f64,
}

/// Thacker's oscillating solutions in the basin `b = -H0 (1 - r²/a²)`
/// centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thacker {
    pub a: f64,
    pub h0: f64,
    pub g: f64,
    pub shape: ThackerShape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThackerShape {
    /// Radially symmetric breathing with initial shoreline radius `r0`.
    Curved { r0: f64 },
    /// Tilted plane rotating about the center.
    Planar { eta: f64 },
}

impl Thacker {
    pub fn omega(&self) -> f64 {
        let k = match self.shape {
            ThackerShape::Curved { .. } => 8.0,
            ThackerShape::Planar { .. } => 2.0,
        };
        (k * self.g * self.h0).sqrt() / self.a
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    pub fn bottom(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        -self.h0 * (1.0 - r2 / (self.a * self.a))
    }

    /// Free surface function, also below the bottom outside the wet region.
    pub fn surface(&self, x: [f64; 2], t: f64) -> f64 {
        let (a2, r2) = (self.a * self.a, x[0] * x[0] + x[1] * x[1]);
        let wt = self.omega() * t;
        match self.shape {
            ThackerShape::Curved { r0 } => {
                let big_a = (a2 - r0 * r0) / (a2 + r0 * r0);
                let d = 1.0 - big_a * wt.cos();
                let s = 1.0 - big_a * big_a;
                self.h0 * (-1.0 + s.sqrt() / d - r2 / a2 * (s / (d * d) - 1.0))
            }
            ThackerShape::Planar { eta } => {
                self.h0 * eta / a2 * (-eta + 2.0 * (x[0] * wt.cos() + x[1] * wt.sin()))
            }
        }
    }

    pub fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let (a2, w) = (self.a * self.a, self.omega());
        let wt = w * t;
        match self.shape {
            ThackerShape::Curved { r0 } => {
                let big_a = (a2 - r0 * r0) / (a2 + r0 * r0);
                let k = w * big_a * wt.sin() / (2.0 * (1.0 - big_a * wt.cos()));
                [k * x[0], k * x[1]]
            }
            ThackerShape::Planar { eta } => [-eta * w * wt.sin(), eta * w * wt.cos()],
        }
    }

    pub fn exact(&self, x: [f64; 2], t: f64) -> ExactValue {
        let h = (self.surface(x, t) - self.bottom(x)).max(0.0);
        if h > 0.0 {
            let [v1, v2] = self.velocity(x, t);
            ExactValue { h, v1, v2 }
        } else {
            ExactValue { h: 0.0, v1: 0.0, v2: 0.0 }
        }
    }
}

/// Exact solution of the dam-break Riemann problem over a flat bed with
/// still water on both sides: a left rarefaction, then either a right
/// shock into water of depth `right` or a front running onto a dry bed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamBreakSolution {
    pub left: f64,
    pub right: f64,
    pub g: f64,
    /// Depth and velocity between the rarefaction and the shock.
    pub middle: (f64, f64),
    /// Shock speed, or the dry front speed when `right = 0`.
    pub front_speed: f64,
}

impl DamBreakSolution {
    pub fn new(left: f64, right: f64, g: f64) -> Self {
        let c_l = (g * left).sqrt();
        if right <= 0.0 {
            return Self { left, right: 0.0, g, middle: (0.0, 2.0 * c_l), front_speed: 2.0 * c_l };
        }
        // Velocity behind the rarefaction minus velocity behind the shock,
        // as a function of the middle depth; increasing root bracketed by
        // the two states.
        let mismatch = |h: f64| {
            let rarefaction = 2.0 * (c_l - (g * h).sqrt());
            let shock = (h - right) * (0.5 * g * (h + right) / (h * right)).sqrt();
            rarefaction - shock
        };
        let (mut lo, mut hi) = (right, left);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mismatch(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h_m = 0.5 * (lo + hi);
        let u_m = 2.0 * (c_l - (g * h_m).sqrt());
        Self { left, right, g, middle: (h_m, u_m), front_speed: h_m * u_m / (h_m - right) }
    }

    /// `(h, v)` at similarity coordinate `xi = (x - x_dam) / t`.
    pub fn at(&self, xi: f64) -> (f64, f64) {
        let c_l = (self.g * self.left).sqrt();
        let (h_m, u_m) = self.middle;
        let tail = u_m - (self.g * h_m).sqrt();
        if xi <= -c_l {
            (self.left, 0.0)
        } else if xi <= tail || (self.right == 0.0 && xi < self.front_speed) {
            let c = (2.0 * c_l - xi) / 3.0;
            (c * c / self.g, 2.0 * (c_l + xi) / 3.0)
        } else if xi < self.front_speed {
            (h_m, u_m)
        } else {
            (self.right, 0.0)
        }
    }

    /// Whether the rarefaction fan contains the sonic point `xi = 0`.
    pub fn is_transonic(&self) -> bool {
        let (h_m, u_m) = self.middle;
        u_m > (self.g * h_m).sqrt()
    }
}

impl Scenario {
    pub fn new(id: ScenarioId) -> Self {
        match id {
            ScenarioId::CircularDamBreak => Self {
                id,
                extent: Extent::new(0.0, 100.0, 0.0, 100.0),
                nx: 100,
                ny: 100,
                g: DEFAULT_GRAVITY,
                // Open sides let the fronts leave through the dry corners instead of
                // colliding there.
                bc: BoundaryConditions::open(),
                end_time: 1.75,
                snapshot_times: vec![],
                gages: vec![],
                order: OperatorOrder::Second,
                setup: Setup::CircularDam { center: [50.0, 50.0], radius: 60.0, inside: 10.0, outside: 0.0 },
            },
            ScenarioId::SlopingShore => {
                let (depth, amplitude): (f64, f64) = (1.0, 0.019);
                let gamma = (3.0 * amplitude / (4.0 * depth)).sqrt();
                let x_a = (4.0 * depth / (3.0 * amplitude)).sqrt() * 20f64.sqrt().acosh();
                Self {
                    id,
                    extent: Extent::new(0.0, 80.0, 0.0, 2.0),
                    nx: 2000,
                    ny: 50,
                    g: DEFAULT_GRAVITY,
                    bc: BoundaryConditions {
                        left: BoundaryKind::Open,
                        right: BoundaryKind::Open,
                        bottom: BoundaryKind::Periodic,
                        top: BoundaryKind::Periodic,
                    },
                    end_time: 80.0,
                    snapshot_times: vec![9.0, 17.0, 23.0, 28.0],
                    gages: vec![],
                    order: OperatorOrder::Second,
                    setup: Setup::SlopingShore { depth, amplitude, gamma, x_a, slope: 1.0 / 19.85 },
                }
            }
            ScenarioId::DoubleRarefaction => Self {
                id,
                extent: Extent::new(0.0, 25.0, 0.0, 0.5),
                nx: 300,
                ny: 6,
                g: DEFAULT_GRAVITY,
                bc: BoundaryConditions {
                    left: BoundaryKind::Open,
                    right: BoundaryKind::Open,
                    bottom: BoundaryKind::Periodic,
                    top: BoundaryKind::Periodic,
                },
                end_time: 0.65,
                snapshot_times: vec![0.05, 0.25, 0.45],
                gages: vec![],
                order: OperatorOrder::Second,
                setup: Setup::DoubleRarefaction {
                    level: 10.0,
                    discharge: 350.0,
                    split: 50.0 / 3.0,
                    step: (25.0 / 3.0, 12.5),
                    step_height: 1.0,
                },
            },
            ScenarioId::ThackerCurved | ScenarioId::ThackerPlanar => {
                let shape = if id == ScenarioId::ThackerCurved {
                    ThackerShape::Curved { r0: 0.8 }
                } else {
                    ThackerShape::Planar { eta: 0.5 }
                };
                let thacker = Thacker { a: 1.0, h0: 0.1, g: 10.0, shape };
                Self {
                    id,
                    extent: Extent::new(-2.0, 2.0, -2.0, 2.0),
                    nx: 100,
                    ny: 100,
                    g: thacker.g,
                    bc: BoundaryConditions::open(),
                    end_time: thacker.period(),
                    snapshot_times: vec![],
                    gages: vec![],
                    order: OperatorOrder::Second,
                    setup: Setup::Thacker(thacker),
                }
            }
            ScenarioId::ConicalIsland | ScenarioId::ConicalIslandRest => {
                let wave = id == ScenarioId::ConicalIsland;
                let level = 0.32;
                let left = if wave {
                    BoundaryKind::Inflow(SurfaceProfile::Solitary { still: level, alpha: 0.1, length: 15.0, t_peak: 3.5 })
                } else {
                    BoundaryKind::Open
                };
                let gage = |name: &str, x: f64, y: f64| Gage { name: name.to_string(), location: [x, y] };
                Self {
                    id,
                    extent: Extent::new(0.0, 25.0, 0.0, 30.0),
                    nx: 125,
                    ny: 150,
                    g: DEFAULT_GRAVITY,
                    bc: BoundaryConditions { left, ..BoundaryConditions::open() },
                    end_time: if wave { 40.0 } else { 5.0 },
                    snapshot_times: if wave { vec![7.9, 9.1] } else { vec![] },
                    gages: if wave {
                        vec![
                            gage("x3", 6.36, 14.25),
                            gage("x6", 8.9, 15.0),
                            gage("x9", 9.9, 15.0),
                            gage("x16", 12.5, 12.42),
                            gage("x22", 15.1, 15.0),
                        ]
                    } else {
                        vec![]
                    },
                    order: OperatorOrder::Second,
                    setup: Setup::ConicalIsland { level, center: [12.5, 15.0], wave },
                }
            }
            ScenarioId::DamBreak1d => Self {
                id,
                extent: Extent::new(0.0, 10.0, 0.0, 0.2),
                nx: 200,
                ny: 4,
                g: DEFAULT_GRAVITY,
                bc: BoundaryConditions {
                    left: BoundaryKind::Open,
                    right: BoundaryKind::Open,
                    bottom: BoundaryKind::Periodic,
                    top: BoundaryKind::Periodic,
                },
                end_time: 1.0,
                snapshot_times: vec![],
                gages: vec![],
                order: OperatorOrder::First,
                setup: Setup::DamBreak { left: 1.0, right: 0.1, dam: 5.0 },
            },
        }
    }

    pub fn by_name(name: &str) -> Result<Self, ScenarioError> {
        Ok(Self::new(name.parse()?))
    }

    /// Same scenario with `nx` cells along x1 and `ny` chosen for square cells.
    pub fn with_cells_x(mut self, nx: usize) -> Self {
        let ratio = self.extent.height() / self.extent.width();
        self.nx = nx;
        self.ny = ((nx as f64 * ratio).round() as usize).max(1);
        self
    }

    pub fn grid(&self) -> Result<CartesianGrid, ScenarioError> {
        Ok(CartesianGrid::new(self.extent, self.nx, self.ny)?)
    }

    pub fn thacker(&self) -> Option<Thacker> {
        match self.setup {
            Setup::Thacker(t) => Some(t),
            _ => None,
        }
    }

    /// Undisturbed free surface for gage records.
    pub fn still_level(&self) -> f64 {
        match self.setup {
            Setup::ConicalIsland { level, .. } | Setup::DoubleRarefaction { level, .. } => level,
            Setup::SlopingShore { depth, .. } => depth,
            _ => 0.0,
        }
    }

    pub fn bottom(&self, x: [f64; 2]) -> f64 {
        match self.setup {
            Setup::CircularDam { .. } | Setup::DamBreak { .. } => 0.0,
            Setup::SlopingShore { x_a, slope, .. } => {
                if x[0] < 2.0 * x_a {
                    0.0
                } else {
                    (x[0] - 2.0 * x_a) * slope
                }
            }
            Setup::DoubleRarefaction { step, step_height, .. } => {
                if step.0 < x[0] && x[0] < step.1 {
                    step_height
                } else {
                    0.0
                }
            }
            Setup::Thacker(t) => t.bottom(x),
            Setup::ConicalIsland { center, .. } => {
                let r = (x[0] - center[0]).hypot(x[1] - center[1]);
                if r <= 1.1 {
                    0.625
                } else if r <= 3.6 {
                    (3.6 - r) / 4.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Initial free surface; may lie below the bottom where the bed is dry.
    pub fn initial_surface(&self, x: [f64; 2]) -> f64 {
        match self.setup {
            Setup::CircularDam { center, radius, inside, outside } => {
                if (x[0] - center[0]).hypot(x[1] - center[1]) <= radius {
                    inside
                } else {
                    outside
                }
            }
            Setup::SlopingShore { depth, amplitude, gamma, x_a, .. } => {
                depth + amplitude / (gamma * (x[0] - x_a)).cosh().powi(2)
            }
            Setup::DoubleRarefaction { level, .. } => level,
            Setup::Thacker(t) => t.surface(x, 0.0),
            Setup::ConicalIsland { level, .. } => level,
            Setup::DamBreak { left, right, dam } => {
                if x[0] < dam {
                    left
                } else {
                    right
                }
            }
        }
    }

    pub fn initial_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        let wet = self.initial_surface(x) > self.bottom(x);
        if !wet {
            return [0.0; 2];
        }
        match self.setup {
            Setup::SlopingShore { depth, .. } => {
                // Right-running wave: velocity proportional to the elevation.
                [(self.g / depth).sqrt() * (self.initial_surface(x) - depth), 0.0]
            }
            Setup::DoubleRarefaction { level, discharge, split, .. } => {
                let q = if x[0] > split { discharge } else { -discharge };
                [q / (level - self.bottom(x)), 0.0]
            }
            Setup::Thacker(t) => t.velocity(x, 0.0),
            _ => [0.0; 2],
        }
    }

    /// Reference solution where one is known.
    pub fn exact(&self, x: [f64; 2], t: f64) -> Option<ExactValue> {
        match self.setup {
            Setup::Thacker(th) => Some(th.exact(x, t)),
            Setup::DamBreak { left, right, dam } => {
                if t <= 0.0 {
                    let h = if x[0] < dam { left } else { right };
                    return Some(ExactValue { h, v1: 0.0, v2: 0.0 });
                }
                let (h, v) = DamBreakSolution::new(left, right, self.g).at((x[0] - dam) / t);
                Some(ExactValue { h, v1: v, v2: 0.0 })
            }
            Setup::ConicalIsland { level, wave: false, .. } => {
                Some(ExactValue { h: (level - self.bottom(x)).max(0.0), v1: 0.0, v2: 0.0 })
            }
            _ => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        self.exact([self.extent.x_min, self.extent.y_min], self.end_time).is_some()
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams { g: self.g, order: self.order, ..SolverParams::default() }
    }

    /// Solver and initial cell averages. Depths are `max(mean H - mean b, 0)`
    /// so that still water is a discrete rest state, except for the moving
    /// Thacker shorelines, which average the clipped pointwise depth.
    /// Discharges are depth times the mean velocity.
    pub fn build(&self, params: SolverParams) -> Result<(Solver, ConservedState), ScenarioError> {
        self.bc.validate().map_err(ScenarioError::Invalid)?;
        let grid = self.grid()?;
        let mut b_cell = CellField::new(&grid, 0.0);
        let mut u = ConservedState::zeros(&grid);
        for c in grid.cells() {
            let center = grid.cell_center(c);
            let b = gauss_cell_mean(&|x| self.bottom(x), center, grid.dx);
            let surface = gauss_cell_mean(&|x| self.initial_surface(x), center, grid.dx);
            b_cell.set(c, b);
            let h = if matches!(self.setup, Setup::Thacker(_)) {
                gauss_cell_mean(&|x| (self.initial_surface(x) - self.bottom(x)).max(0.0), center, grid.dx)
            } else {
                (surface - b).max(0.0)
            };
            if h >= params.eps_h {
                let v1 = gauss_cell_mean(&|x| self.initial_velocity(x)[0], center, grid.dx);
                let v2 = gauss_cell_mean(&|x| self.initial_velocity(x)[1], center, grid.dx);
                u.set(c, [h, h * v1, h * v2]);
            }
        }
        let solver = Solver::new(grid, b_cell, self.bc, params);
        solver.fill_ghosts(&mut u);
        Ok((solver, u))
    }
}

/// Water-height errors on one grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub nx: usize,
    pub ny: usize,
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Errors of `h` against cell means of `exact` (3x3 Gauss per cell).
pub fn error_norms(h: &CellField, exact: impl Fn([f64; 2]) -> f64, grid: &CartesianGrid) -> ErrorReport {
    let mut report = ErrorReport { nx: grid.nx, ny: grid.ny, linf: 0.0, l1: 0.0, l2: 0.0 };
    for c in grid.cells() {
        let e = h.get(c) - gauss_cell_mean(&exact, grid.cell_center(c), grid.dx);
        report.linf = report.linf.max(e.abs());
        report.l1 += e.abs();
        report.l2 += e * e;
    }
    let area = grid.cell_area();
    report.l1 *= area;
    report.l2 = (report.l2 * area).sqrt();
    report
}

/// `log2(e_n / e_{n+1})` for consecutive rows, as `[L∞, L1, L2]`.
pub fn eoc(reports: &[ErrorReport]) -> Vec<[f64; 3]> {
    reports
        .windows(2)
        .map(|w| {
            let r = |a: f64, b: f64| (a / b).log2();
            [r(w[0].linf, w[1].linf), r(w[0].l1, w[1].l1), r(w[0].l2, w[1].l2)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
        }
        let err = "nope".parse::<ScenarioId>().unwrap_err().to_string();
        assert!(err.contains("circular-dam-break") && err.contains("dam-break-1d"));
    }

    #[test]
    fn default_grids_have_square_cells() {
        for id in ScenarioId::ALL {
            let s = Scenario::new(id);
            s.grid().unwrap_or_else(|e| panic!("{id}: {e}"));
        }
        assert_eq!(Scenario::new(ScenarioId::SlopingShore).grid().unwrap().dx, 0.04);
        assert!((Scenario::new(ScenarioId::ConicalIsland).grid().unwrap().dx - 0.2).abs() < 1e-15);
    }

    #[test]
    fn thacker_periods() {
        let curved = Scenario::new(ScenarioId::ThackerCurved).thacker().unwrap();
        assert!((curved.period() - 2.22).abs() < 5e-3);
        let planar = Scenario::new(ScenarioId::ThackerPlanar).thacker().unwrap();
        assert!((planar.period() - 4.44).abs() < 5e-3);
    }

    #[test]
    fn thacker_exact_is_periodic() {
        for id in [ScenarioId::ThackerCurved, ScenarioId::ThackerPlanar] {
            let th = Scenario::new(id).thacker().unwrap();
            let period = th.period();
            for &x in &[[0.1, -0.3], [0.5, 0.5], [-0.8, 0.2], [1.5, 1.5]] {
                for &t in &[0.0, 0.37, 1.9] {
                    let (a, b) = (th.exact(x, t), th.exact(x, t + period));
                    assert!((a.h - b.h).abs() < 1e-12, "{id} {x:?} {t}");
                }
            }
        }
    }

    #[test]
    fn planar_initial_velocity() {
        let s = Scenario::new(ScenarioId::ThackerPlanar);
        let th = s.thacker().unwrap();
        let v = s.initial_velocity([0.0, 0.0]);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - 0.5 * th.omega()).abs() < 1e-15);
    }

    #[test]
    fn bathymetry_shapes() {
        let island = Scenario::new(ScenarioId::ConicalIsland);
        assert_eq!(island.bottom([12.5, 15.0]), 0.625);
        assert_eq!(island.bottom([12.5 + 3.6, 15.0]), 0.0);
        assert!((island.bottom([12.5 + 2.0, 15.0]) - 0.4).abs() < 1e-15);

        let shore = Scenario::new(ScenarioId::SlopingShore);
        let Setup::SlopingShore { x_a, .. } = shore.setup else { unreachable!() };
        assert_eq!(shore.bottom([2.0 * x_a, 1.0]), 0.0);
        assert!((shore.bottom([2.0 * x_a + 19.85, 1.0]) - 1.0).abs() < 1e-14);

        let rare = Scenario::new(ScenarioId::DoubleRarefaction);
        assert_eq!(rare.bottom([10.0, 0.1]), 1.0);
        assert_eq!(rare.bottom([5.0, 0.1]), 0.0);
    }

    #[test]
    fn initial_states_are_admissible() {
        for id in ScenarioId::ALL {
            let s = Scenario::new(id).with_cells_x(match id {
                ScenarioId::SlopingShore => 200,
                ScenarioId::DoubleRarefaction => 100,
                ScenarioId::DamBreak1d => 50,
                _ => 20,
            });
            let (solver, u) = s.build(s.solver_params()).unwrap();
            for c in solver.grid.cells() {
                let [h, q1, q2] = u.get(c);
                assert!(h >= 0.0);
                if h == 0.0 {
                    assert_eq!((q1, q2), (0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn dam_break_solution() {
        let g = 9.81;
        let s = DamBreakSolution::new(1.0, 0.1, g);
        let (h_m, u_m) = s.middle;
        // Shock relations: mass and momentum balance across the jump.
        let sp = s.front_speed;
        assert!((sp * (h_m - 0.1) - h_m * u_m).abs() < 1e-12);
        let momentum = |h: f64, u: f64| h * u * u + 0.5 * g * h * h;
        assert!((sp * h_m * u_m - (momentum(h_m, u_m) - momentum(0.1, 0.0))).abs() < 1e-10);
        assert!(s.is_transonic());
        // Continuity at the tail of the rarefaction.
        let tail = u_m - (g * h_m).sqrt();
        let (h_tail, u_tail) = s.at(tail - 1e-12);
        assert!((h_tail - h_m).abs() < 1e-9 && (u_tail - u_m).abs() < 1e-9);

        let dry = DamBreakSolution::new(1.0, 0.0, g);
        assert!((dry.front_speed - 2.0 * g.sqrt()).abs() < 1e-15);
        assert_eq!(dry.at(2.0 * g.sqrt() + 1e-9), (0.0, 0.0));
        // Sonic at the dam position.
        let (h0, u0) = dry.at(0.0);
        assert!((u0 - (g * h0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn error_norm_normalization() {
        let grid = CartesianGrid::new(Extent::new(0.0, 1.0, 0.0, 1.0), 4, 4).unwrap();
        let mut h = CellField::new(&grid, 0.0);
        for c in grid.cells() {
            h.set(c, 1.25);
        }
        let r = error_norms(&h, |_| 1.0, &grid);
        for e in [r.linf, r.l1, r.l2] {
            assert!((e - 0.25).abs() < 1e-15);
        }
        let zero = error_norms(&h, |_| 1.25, &grid);
        assert_eq!((zero.linf, zero.l1, zero.l2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn eoc_of_halving_is_one() {
        let row = |k: i32| {
            let e = 0.5f64.powi(k);
            ErrorReport { nx: 1 << k, ny: 1 << k, linf: e, l1: 2.0 * e, l2: 3.0 * e }
        };
        let rates = eoc(&[row(0), row(1), row(2)]);
        assert_eq!(rates, vec![[1.0; 3], [1.0; 3]]);
    }
}
