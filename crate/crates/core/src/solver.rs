//! The corrector: advective edge fluxes, the well-balanced source, draining
//! time cut-offs, and the full time step.

use rayon::prelude::*;
use thiserror::Error;

use crate::boundary::{BoundaryConditions, Parity};
use crate::evolution::{EvolutionContext, EvolvedValue, OperatorOrder};
use crate::mesh::{CartesianGrid, CellField, CellIndex, EdgeId, PointKind, QuadPoint, SIMPSON_WEIGHTS};
use crate::reconstruction::{build_recon, corner_averages, correction_field};
use crate::state::{conserved_to_primitive, Bathymetry, ConservedState, DryParams, PrimitiveState, DEFAULT_EPS_H};

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("negative depth {h:e} in cell ({i}, {j}) at t = {t}")]
    NegativeDepth { i: isize, j: isize, h: f64, t: f64 },
    #[error("time step {dt:e} below the minimum {dt_min:e} at t = {t}")]
    TimeStepUnderflow { dt: f64, dt_min: f64, t: f64 },
    #[error("non-finite value in cell ({i}, {j}) at t = {t}")]
    NonFinite { i: isize, j: isize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub g: f64,
    /// CFL number `μ`.
    pub cfl: f64,
    pub eps_h: f64,
    pub entropy_fix: bool,
    pub order: OperatorOrder,
    /// Time step used when every cell is dry.
    pub dt_fallback: f64,
    /// Smallest admissible time step.
    pub dt_min: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            g: crate::state::DEFAULT_GRAVITY,
            cfl: 0.5,
            eps_h: DEFAULT_EPS_H,
            entropy_fix: true,
            order: OperatorOrder::Second,
            dt_fallback: 1e-2,
            dt_min: 1e-12,
        }
    }
}

/// Evolved values at every quadrature point of the physical edges.
#[derive(Debug, Clone)]
pub struct PointValues {
    nx: usize,
    /// Lattice corners `(0..=nx) x (0..=ny)`.
    pub corners: Vec<EvolvedValue>,
    /// Midpoints of vertical edges `(0..=nx) x (0..ny)`.
    pub vertical: Vec<EvolvedValue>,
    /// Midpoints of horizontal edges `(0..nx) x (0..=ny)`.
    pub horizontal: Vec<EvolvedValue>,
}

impl PointValues {
    pub fn get(&self, p: QuadPoint) -> EvolvedValue {
        let (i, j) = (p.i as usize, p.j as usize);
        match p.kind {
            PointKind::Corner => self.corners[i + j * (self.nx + 1)],
            PointKind::VerticalMid => self.vertical[i + j * (self.nx + 1)],
            PointKind::HorizontalMid => self.horizontal[i + j * self.nx],
        }
    }

    /// The three values of an edge with its Simpson weights.
    pub fn edge(&self, grid: &CartesianGrid, e: EdgeId) -> [(EvolvedValue, f64); 3] {
        let p = grid.edge_points(e);
        [0, 1, 2].map(|k| (self.get(p[k]), SIMPSON_WEIGHTS[k]))
    }
}

/// Simpson combination of `(h v·n, h v1 v·n, h v2 v·n)` along an edge.
pub fn advective_edge_flux(points: &[(EvolvedValue, f64); 3], normal: [f64; 2]) -> [f64; 3] {
    let f = |p: &EvolvedValue| {
        let vn = p.v1 * normal[0] + p.v2 * normal[1];
        let m = p.h * vn;
        [m, m * p.v1, m * p.v2]
    };
    let (a, b, c) = (f(&points[0].0), f(&points[1].0), f(&points[2].0));
    let (w_end, w_mid) = (points[0].1, points[1].1);
    [0, 1, 2].map(|k| w_end * (a[k] + c[k]) + w_mid * b[k])
}

/// Pressure part `(0, g h²/2 n1, g h²/2 n2)` of the full edge flux.
pub fn pressure_edge_flux(points: &[(EvolvedValue, f64); 3], normal: [f64; 2], g: f64) -> [f64; 3] {
    let p = |v: &EvolvedValue| 0.5 * g * v.h * v.h;
    let s = points[0].1 * (p(&points[0].0) + p(&points[2].0)) + points[1].1 * p(&points[1].0);
    [0.0, s * normal[0], s * normal[1]]
}

/// Right/left and top/bottom point triples of a cell, each as
/// `(weight, outer, inner)` with outer on the right or top edge.
fn opposite_pairs(v: &PointValues, c: CellIndex) -> [[(f64, EvolvedValue, EvolvedValue); 3]; 2] {
    let (i, j) = (c.i, c.j);
    let w = SIMPSON_WEIGHTS;
    let corner = |i, j| v.get(QuadPoint::corner(i, j));
    let vm = |i, j| v.get(QuadPoint { kind: PointKind::VerticalMid, i, j });
    let hm = |i, j| v.get(QuadPoint { kind: PointKind::HorizontalMid, i, j });
    [
        [
            (w[0], corner(i + 1, j), corner(i, j)),
            (w[1], vm(i + 1, j), vm(i, j)),
            (w[2], corner(i + 1, j + 1), corner(i, j + 1)),
        ],
        [
            (w[0], corner(i, j + 1), corner(i, j)),
            (w[1], hm(i, j + 1), hm(i, j)),
            (w[2], corner(i + 1, j + 1), corner(i + 1, j)),
        ],
    ]
}

/// `g Σ α_j (0, ½(ĥr + ĥl)(Hr - Hl), ½(ĥt + ĥb)(Ht - Hb))` for one cell.
pub fn cell_source(v: &PointValues, c: CellIndex, g: f64) -> [f64; 3] {
    cell_source_with(v, c, g, |p| p.surface)
}

/// The unsplit source with bottom differences in place of surface ones.
pub fn bottom_source(v: &PointValues, c: CellIndex, g: f64) -> [f64; 3] {
    cell_source_with(v, c, g, |p| p.b)
}

fn cell_source_with(v: &PointValues, c: CellIndex, g: f64, level: impl Fn(&EvolvedValue) -> f64) -> [f64; 3] {
    let [x, y] = opposite_pairs(v, c).map(|pairs| {
        let term = |(w, o, i): (f64, EvolvedValue, EvolvedValue)| w * 0.5 * (o.h + i.h) * (level(&o) - level(&i));
        // Symmetric in the two corner pairs.
        (term(pairs[0]) + term(pairs[2])) + term(pairs[1])
    });
    [0.0, g * x, g * y]
}

/// `Δx h / Σ H_E⁺`, or `None` when nothing flows out.
pub fn draining_time(h: f64, outflow: f64, dx: f64) -> Option<f64> {
    (outflow > 0.0).then(|| dx * h / outflow)
}

/// `min(Δt, Δt_drain(upwind))`; edges without an upwind cell keep `Δt`.
pub fn edge_time_step(mass_flux: f64, drain_neg: Option<f64>, drain_pos: Option<f64>, dt: f64) -> f64 {
    // `drain_neg` belongs to the cell on the negative side of the normal.
    let upwind = if mass_flux > 0.0 {
        drain_neg
    } else if mass_flux < 0.0 {
        drain_pos
    } else {
        None
    };
    upwind.map_or(dt, |d| d.min(dt))
}

/// `μ Δx / max(|v·ξ| + c)` over wet interior cells and both axes.
pub fn cfl_time_step(prim: &PrimitiveState, grid: &CartesianGrid, g: f64, cfl: f64, fallback: f64) -> f64 {
    let mut lambda: f64 = 0.0;
    for c in grid.cells() {
        let w = prim.get(c);
        if w.h > 0.0 {
            lambda = lambda.max(w.v1.abs().max(w.v2.abs()) + w.sound_speed(g));
        }
    }
    if lambda > 0.0 {
        cfl * grid.dx / lambda
    } else {
        fallback
    }
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub dt: f64,
    /// Edges whose flux was cut off by a draining time.
    pub limited_edges: usize,
    /// Smallest depth right after the update, before dry zeroing.
    pub min_depth: f64,
    /// Volume removed by zeroing cells below the dry threshold.
    pub zeroed_volume: f64,
}

/// Fluxes, cut-off steps, and sources assembled from one predictor pass.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub flux: Vec<[f64; 3]>,
    pub edge_dt: Vec<f64>,
    pub source: Vec<[f64; 3]>,
    pub points: PointValues,
}

/// A configured solver for one grid, bottom, and set of boundaries.
#[derive(Debug, Clone)]
pub struct Solver {
    pub grid: CartesianGrid,
    pub bath: Bathymetry,
    pub bc: BoundaryConditions,
    pub params: SolverParams,
    pub dry: DryParams,
}

impl Solver {
    /// Fills the ghost rings of `b` from the boundary conditions before
    /// deriving corner values.
    pub fn new(grid: CartesianGrid, mut b_cell: CellField, bc: BoundaryConditions, params: SolverParams) -> Self {
        bc.fill_scalar(&grid, &mut b_cell, Parity::Even);
        let bath = Bathymetry::new(&grid, b_cell, params.g);
        let dry = DryParams::for_grid(&grid, params.eps_h);
        Self { grid, bath, bc, params, dry }
    }

    pub fn fill_ghosts(&self, u: &mut ConservedState) {
        self.bc.fill_state(&self.grid, u, &self.bath.b_cell, self.params.g, u.t);
    }

    pub fn primitives(&self, u: &ConservedState) -> PrimitiveState {
        conserved_to_primitive(u, &self.bath, &self.grid, &self.dry)
    }

    pub fn time_step(&self, u: &ConservedState) -> f64 {
        let prim = self.primitives(u);
        cfl_time_step(&prim, &self.grid, self.params.g, self.params.cfl, self.params.dt_fallback)
    }

    /// Evolved values at all quadrature points for horizon `tau`, from a
    /// state whose ghosts are filled.
    pub fn predict(&self, u: &ConservedState, tau: f64) -> PointValues {
        let grid = &self.grid;
        let prim = self.primitives(u);
        let corners = corner_averages(&prim, &self.bath, grid);
        let recon = build_recon(&corners, &prim, &self.bath, grid);
        let correction = correction_field(&prim, &recon, grid);
        let ctx = EvolutionContext {
            grid,
            prim: &prim,
            bath: &self.bath,
            recon: &recon,
            correction: &correction,
            corner_b: &corners.b,
            tau,
            g: self.params.g,
            entropy_fix: self.params.entropy_fix,
            order: self.params.order,
        };
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        let eval = |kind: PointKind, ni: isize, nj: isize| -> Vec<EvolvedValue> {
            (0..ni * nj)
                .into_par_iter()
                .map(|k| ctx.evolve_point(QuadPoint { kind, i: k % ni, j: k / ni }))
                .collect()
        };
        PointValues {
            nx: grid.nx,
            corners: eval(PointKind::Corner, nx + 1, ny + 1),
            vertical: eval(PointKind::VerticalMid, nx + 1, ny),
            horizontal: eval(PointKind::HorizontalMid, nx, ny + 1),
        }
    }

    /// Fluxes, cut-off time steps, and sources for a step of length `dt`.
    pub fn assemble(&self, u: &ConservedState, dt: f64) -> Assembly {
        let grid = &self.grid;
        let points = self.predict(u, 0.5 * dt);
        let edges: Vec<EdgeId> = grid.edges().collect();
        let flux: Vec<[f64; 3]> = edges
            .par_iter()
            .map(|&e| {
                if self.bc.is_wall_edge(grid, e) {
                    [0.0; 3]
                } else {
                    advective_edge_flux(&points.edge(grid, e), e.normal())
                }
            })
            .collect();

        let (nx, ny) = (grid.nx, grid.ny);
        let v_index = |i: usize, j: usize| i + j * (nx + 1);
        let h_index = |i: usize, j: usize| (nx + 1) * ny + i + j * nx;

        let cells: Vec<CellIndex> = grid.cells().collect();
        let drain: Vec<Option<f64>> = cells
            .par_iter()
            .map(|&c| {
                let (i, j) = (c.i as usize, c.j as usize);
                let out = flux[v_index(i + 1, j)][0].max(0.0)
                    + (-flux[v_index(i, j)][0]).max(0.0)
                    + flux[h_index(i, j + 1)][0].max(0.0)
                    + (-flux[h_index(i, j)][0]).max(0.0);
                draining_time(u.h.get(c), out, grid.dx)
            })
            .collect();
        let drain_at = |i: isize, j: isize| -> Option<f64> {
            let c = CellIndex::new(i, j);
            grid.is_interior(c).then(|| drain[grid.cell_id(c)]).flatten()
        };
        let edge_dt: Vec<f64> = edges
            .par_iter()
            .zip(&flux)
            .map(|(&e, f)| {
                let [neg, pos] = e.adjacent_cells();
                edge_time_step(f[0], drain_at(neg.i, neg.j), drain_at(pos.i, pos.j), dt)
            })
            .collect();
        let source: Vec<[f64; 3]> = cells.par_iter().map(|&c| cell_source(&points, c, self.params.g)).collect();
        Assembly { flux, edge_dt, source, points }
    }

    /// Advances `u` by `dt`; ghosts are refreshed first.
    pub fn step(&self, u: &mut ConservedState, dt: f64) -> Result<StepReport, SolverError> {
        if !(dt >= self.params.dt_min) {
            return Err(SolverError::TimeStepUnderflow { dt, dt_min: self.params.dt_min, t: u.t });
        }
        self.fill_ghosts(u);
        let a = self.assemble(u, dt);
        let grid = &self.grid;
        let limited_edges = a.edge_dt.iter().filter(|&&d| d < dt).count();
        let updated = self.apply(u, &a, dt);

        let max_h = updated.iter().map(|v| v[0]).fold(0.0, f64::max);
        let tol = 1e-12 * max_h;
        let t_new = u.t + dt;
        let mut report = StepReport { dt, limited_edges, min_depth: f64::INFINITY, zeroed_volume: 0.0 };
        for (c, v) in grid.cells().zip(&updated) {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(SolverError::NonFinite { i: c.i, j: c.j, t: t_new });
            }
            if v[0] < -tol {
                return Err(SolverError::NegativeDepth { i: c.i, j: c.j, h: v[0], t: t_new });
            }
            report.min_depth = report.min_depth.min(v[0]);
        }
        for (c, v) in grid.cells().zip(updated) {
            if v[0] < self.params.eps_h {
                report.zeroed_volume += v[0] * grid.cell_area();
                u.set(c, [0.0; 3]);
            } else {
                u.set(c, v);
            }
        }
        u.t = t_new;
        Ok(report)
    }

    /// Reference update with the full flux (pressure included) and the
    /// bottom-difference source, every edge advancing by `dt`. Uses the same
    /// predictor as [`Solver::step`] and does not modify `u`.
    pub fn unsplit_update(&self, u: &ConservedState, dt: f64) -> Vec<[f64; 3]> {
        let mut u = u.clone();
        self.fill_ghosts(&mut u);
        let points = self.predict(&u, 0.5 * dt);
        let grid = &self.grid;
        let g = self.params.g;
        grid.cells()
            .map(|c| {
                let [left, right, bottom, top] = grid.cell_edges(c);
                let full = |e: EdgeId| {
                    let pts = points.edge(grid, e);
                    let (a, p) = (advective_edge_flux(&pts, e.normal()), pressure_edge_flux(&pts, e.normal(), g));
                    [0, 1, 2].map(|k| a[k] + p[k])
                };
                let (fl, fr, fb, ft) = (full(left), full(right), full(bottom), full(top));
                let s = bottom_source(&points, c, g);
                let u0 = u.get(c);
                [0, 1, 2].map(|k| u0[k] - dt / grid.dx * ((fr[k] - fl[k]) + (ft[k] - fb[k]) + s[k]))
            })
            .collect()
    }

    /// The split update without dry zeroing or checks, and the number of
    /// edges whose flux was cut off. Does not modify `u`.
    pub fn split_update(&self, u: &ConservedState, dt: f64) -> (Vec<[f64; 3]>, usize) {
        let mut u = u.clone();
        self.fill_ghosts(&mut u);
        let a = self.assemble(&u, dt);
        let limited = a.edge_dt.iter().filter(|&&d| d < dt).count();
        (self.apply(&u, &a, dt), limited)
    }

    /// `u - (1/Δx) [Σ Δt_E F*_E + Δt S*]` for every interior cell, row-major.
    fn apply(&self, u: &ConservedState, a: &Assembly, dt: f64) -> Vec<[f64; 3]> {
        let grid = &self.grid;
        let (nx, ny) = (grid.nx, grid.ny);
        let v_index = |i: usize, j: usize| i + j * (nx + 1);
        let h_index = |i: usize, j: usize| (nx + 1) * ny + i + j * nx;
        let inv_dx = 1.0 / grid.dx;
        let cells: Vec<CellIndex> = grid.cells().collect();
        cells
            .par_iter()
            .map(|&c| {
                let (i, j) = (c.i as usize, c.j as usize);
                // Right, left, top, bottom with outward signs.
                let ids = [v_index(i + 1, j), v_index(i, j), h_index(i, j + 1), h_index(i, j)];
                let sign = [1.0, -1.0, 1.0, -1.0];
                let u0 = u.get(c);
                let s = a.source[grid.cell_id(c)];
                [0, 1, 2].map(|k| {
                    let term = |m: usize| sign[m] * a.edge_dt[ids[m]] * a.flux[ids[m]][k];
                    let fluxes = (term(0) + term(1)) + (term(2) + term(3));
                    u0[k] - inv_dx * (fluxes + dt * s[k])
                })
            })
            .collect()
    }
}
