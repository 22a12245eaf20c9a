//! Randomized invariants of the full time step on small grids.

use fveg::boundary::{BoundaryConditions, BoundaryKind};
use fveg::evolution::OperatorOrder;
use fveg::mesh::{CartesianGrid, CellField, Extent};
use fveg::solver::{Solver, SolverParams};
use fveg::state::ConservedState;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Bump {
    center: [f64; 2],
    width: f64,
    height: f64,
}

impl Bump {
    fn at(&self, x: [f64; 2]) -> f64 {
        let r2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        self.height * (-r2 / (self.width * self.width)).exp()
    }
}

fn bump() -> impl Strategy<Value = Bump> {
    (0.1..0.9f64, 0.1..0.9f64, 0.05..0.3f64, -1.0..1.0f64)
        .prop_map(|(x, y, width, height)| Bump { center: [x, y], width, height })
}

fn order() -> impl Strategy<Value = OperatorOrder> {
    prop_oneof![Just(OperatorOrder::First), Just(OperatorOrder::Second)]
}

/// Unit box with a bumpy bottom, a bumpy surface at `level` and a random
/// velocity field; cells where the surface lies below the bottom start dry.
fn setup(bottom: &[Bump], surface: &Bump, level: f64, velocity: [f64; 2], order: OperatorOrder, bc: BoundaryConditions) -> (Solver, ConservedState) {
    let n = 16;
    let grid = CartesianGrid::new(Extent::new(0.0, 1.0, 0.0, 1.0), n, n).unwrap();
    let mut b = CellField::new(&grid, 0.0);
    let mut u = ConservedState::zeros(&grid);
    for c in grid.cells() {
        let x = grid.cell_center(c);
        let bottom: f64 = bottom.iter().map(|k| k.at(x)).sum();
        let h = (level + 0.5 * surface.at(x) - bottom).max(0.0);
        b.set(c, bottom);
        u.set(c, [h, h * velocity[0], h * velocity[1]]);
    }
    let params = SolverParams { order, ..SolverParams::default() };
    (Solver::new(grid, b, bc, params), u)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn walls_conserve_volume_and_keep_depth_nonnegative(
        bottom in prop::collection::vec(bump(), 1..4),
        surface in bump(),
        level in 0.2..1.0f64,
        velocity in prop::array::uniform2(-1.0..1.0f64),
        order in order(),
    ) {
        let (solver, mut u) = setup(&bottom, &surface, level, velocity, order, BoundaryConditions::walls());
        let v0 = u.volume(&solver.grid);
        prop_assume!(v0 > 0.0);
        let mut zeroed = 0.0;
        for _ in 0..20 {
            let dt = solver.time_step(&u);
            let report = solver.step(&mut u, dt).unwrap();
            // Before dry zeroing only cancellation roundoff may dip below zero.
            prop_assert!(report.min_depth >= -1e-15, "pre-zeroing depth {}", report.min_depth);
            prop_assert!(u.min_depth(&solver.grid) >= 0.0);
            // Dry zeroing is the only sanctioned volume change.
            zeroed += report.zeroed_volume;
            let v = u.volume(&solver.grid) + zeroed;
            prop_assert!(((v - v0) / v0).abs() <= 1e-12, "drift {}", (v - v0) / v0);
        }
    }

    #[test]
    fn periodic_box_conserves_volume(
        bottom in prop::collection::vec(bump(), 1..3),
        surface in bump(),
        velocity in prop::array::uniform2(-1.0..1.0f64),
        order in order(),
    ) {
        let bc = BoundaryConditions::uniform(BoundaryKind::Periodic);
        let (solver, mut u) = setup(&bottom, &surface, 1.5, velocity, order, bc);
        let v0 = u.volume(&solver.grid);
        let mut zeroed = 0.0;
        for _ in 0..20 {
            let dt = solver.time_step(&u);
            zeroed += solver.step(&mut u, dt).unwrap().zeroed_volume;
        }
        let drift = (u.volume(&solver.grid) + zeroed - v0) / v0;
        prop_assert!(drift.abs() <= 1e-12, "drift {drift}");
    }

    #[test]
    fn still_water_over_emerged_bottom_stays_at_rest(
        bottom in prop::collection::vec(bump(), 1..4),
        level in 0.1..0.6f64,
        order in order(),
    ) {
        let flat = Bump { center: [0.5, 0.5], width: 1.0, height: 0.0 };
        let (solver, mut u) = setup(&bottom, &flat, level, [0.0, 0.0], order, BoundaryConditions::walls());
        let u0 = u.clone();
        for _ in 0..10 {
            let dt = solver.time_step(&u);
            solver.step(&mut u, dt).unwrap();
        }
        for c in solver.grid.cells() {
            let (a, b) = (u.get(c), u0.get(c));
            for k in 0..3 {
                prop_assert!((a[k] - b[k]).abs() <= 1e-12, "cell {c:?} component {k}: {} vs {}", a[k], b[k]);
            }
        }
    }
}
