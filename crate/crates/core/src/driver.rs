//! Time loop: CFL steps clamped to land on requested output times.

use crate::solver::{Solver, SolverError, StepReport};
use crate::state::ConservedState;

/// Summary of a completed run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub steps: usize,
    /// Smallest depth seen after any update, before dry zeroing.
    pub min_depth: f64,
    /// `(t, volume)` after every step, starting with the initial state.
    pub volume: Vec<(f64, f64)>,
    /// Total volume removed by dry zeroing.
    pub zeroed_volume: f64,
    /// Edges whose flux was cut off, summed over all steps.
    pub limited_edges: usize,
}

/// Advances `u` to `t_end`, stopping exactly at every time in `stops`
/// (sorted, within `(t, t_end]`) and calling `on_stop` there. `on_step`
/// runs after every step.
pub fn run(
    solver: &Solver,
    u: &mut ConservedState,
    t_end: f64,
    stops: &[f64],
    mut on_step: impl FnMut(&ConservedState, &StepReport),
    mut on_stop: impl FnMut(&ConservedState),
) -> Result<RunSummary, SolverError> {
    let grid = &solver.grid;
    let mut summary = RunSummary { min_depth: f64::INFINITY, volume: vec![(u.t, u.volume(grid))], ..Default::default() };
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&s| s > u.t && s < t_end).collect();
    targets.push(t_end);
    for target in targets {
        while u.t < target {
            let cfl_dt = solver.time_step(u);
            let remaining = target - u.t;
            // Take the remainder when it is within a rounding error of one step.
            let dt = if remaining <= cfl_dt * (1.0 + 1e-12) { remaining } else { cfl_dt };
            let report = solver.step(u, dt)?;
            if dt == remaining {
                u.t = target;
            }
            summary.steps += 1;
            summary.min_depth = summary.min_depth.min(report.min_depth);
            summary.zeroed_volume += report.zeroed_volume;
            summary.limited_edges += report.limited_edges;
            summary.volume.push((u.t, u.volume(grid)));
            on_step(u, &report);
        }
        on_stop(u);
    }
    Ok(summary)
}
