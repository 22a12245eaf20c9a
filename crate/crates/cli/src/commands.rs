use std::path::Path;
use std::time::Instant;

use fveg::driver::{self, RunSummary};
use fveg::mesh::CartesianGrid;
use fveg::scenarios::{error_norms, ErrorReport, Scenario, ScenarioId, Setup};
use fveg::solver::Solver;
use fveg::state::ConservedState;

use crate::config::{OutputKind, RunConfig};
use crate::output::{error_table, eoc_table, snapshot_path, write_file, GageSeries, Manifest, Snapshot};
use crate::CliError;

pub fn list_scenarios() -> String {
    let mut s = String::new();
    for id in ScenarioId::ALL {
        let sc = Scenario::new(id);
        let exact = if sc.has_exact() { "exact" } else { "-" };
        let t_end = (sc.end_time * 1e4).round() / 1e4;
        s.push_str(&format!("{:<22} {:>4}x{:<4} t_end {:<7} {:<6} {}\n", id.name(), sc.nx, sc.ny, t_end, exact, id.summary()));
    }
    s
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Deviation norms from the still-water state over wet cells: `H - H0`,
/// `v1` and `v2`.
fn rest_errors(solver: &Solver, u: &ConservedState, level: f64) -> Vec<(&'static str, [f64; 3])> {
    let grid = &solver.grid;
    let prim = solver.primitives(u);
    let mut norms = [[0.0f64; 3]; 3];
    for c in grid.cells() {
        let wet = prim.h.get(c) > 0.0;
        let e_h = if wet { prim.surface.get(c) - level } else { 0.0 };
        for (k, e) in [e_h, prim.v1.get(c), prim.v2.get(c)].into_iter().enumerate() {
            norms[k][0] = norms[k][0].max(e.abs());
            norms[k][1] += e.abs() * grid.cell_area();
            norms[k][2] += e * e * grid.cell_area();
        }
    }
    let fin = |n: [f64; 3]| [n[0], n[1], n[2].sqrt()];
    vec![("H", fin(norms[0])), ("v1", fin(norms[1])), ("v2", fin(norms[2]))]
}

fn h_errors(scenario: &Scenario, grid: &CartesianGrid, u: &ConservedState) -> Option<ErrorReport> {
    scenario.has_exact().then(|| error_norms(&u.h, |x| scenario.exact(x, u.t).unwrap().h, grid))
}

/// Outcome of [`run`].
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub files: Vec<String>,
    pub errors: Vec<(&'static str, [f64; 3])>,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    create_dir(&cfg.output)?;
    let scenario = &cfg.scenario;
    let (solver, mut u) = scenario.build(cfg.solver_params())?;
    let grid = solver.grid.clone();
    let level = scenario.still_level();
    let mut gages: Vec<GageSeries> = scenario
        .gages
        .iter()
        .map(|g| GageSeries { name: g.name.clone(), location: g.location, level, samples: vec![] })
        .collect();
    let record_gages = cfg.writes(OutputKind::Gages) && !gages.is_empty();
    if record_gages {
        let surface = solver.primitives(&u).surface;
        gages.iter_mut().for_each(|g| g.record(&grid, &surface, u.t));
    }

    let mut files = Vec::new();
    let mut write_error = None;
    let mut index = 0;
    let mut snapshot = |u: &ConservedState, files: &mut Vec<String>| {
        if !cfg.writes(OutputKind::Snapshots) || write_error.is_some() {
            return;
        }
        let path = snapshot_path(&cfg.output, index, u.t);
        index += 1;
        match write_file(&path, &Snapshot::capture(&solver, u).to_text()) {
            Ok(()) => files.push(path.file_name().unwrap().to_string_lossy().into_owned()),
            Err(e) => write_error = Some(e),
        }
    };
    if cfg.snapshots.first() == Some(&0.0) {
        snapshot(&u, &mut files);
    }

    let clock = Instant::now();
    let summary = driver::run(
        &solver,
        &mut u,
        cfg.end,
        &cfg.snapshots,
        |u, _| {
            if record_gages {
                let surface = solver.primitives(u).surface;
                gages.iter_mut().for_each(|g| g.record(&grid, &surface, u.t));
            }
        },
        |u| snapshot(u, &mut files),
    );
    let wall_time_s = clock.elapsed().as_secs_f64();
    if let Some(e) = write_error {
        return Err(e);
    }
    let summary = summary?;

    if record_gages {
        for g in &gages {
            let path = cfg.output.join(format!("gage_{}.txt", g.name));
            write_file(&path, &g.to_text())?;
            files.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }

    let errors = match scenario.setup {
        Setup::ConicalIsland { wave: false, .. } => rest_errors(&solver, &u, level),
        _ => h_errors(scenario, &grid, &u).map(|r| vec![("h", [r.linf, r.l1, r.l2])]).unwrap_or_default(),
    };
    if cfg.writes(OutputKind::Errors) && !errors.is_empty() {
        write_file(&cfg.output.join("errors.txt"), &error_table(&errors))?;
        files.push("errors.txt".into());
    }

    if cfg.writes(OutputKind::Manifest) {
        let manifest = Manifest {
            config: cfg,
            dx: grid.dx,
            steps: summary.steps,
            wall_time_s,
            min_depth: summary.min_depth,
            zeroed_volume: summary.zeroed_volume,
            limited_edges: summary.limited_edges,
            files: files.clone(),
            volume: &summary.volume,
        };
        let path = cfg.output.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_file(&path, &text)?;
        files.push("manifest.json".into());
    }
    Ok(RunOutcome { summary, files, errors })
}

/// Runs every grid in `cfg.grids` and writes `convergence.txt`.
pub fn convergence(cfg: &RunConfig) -> Result<Vec<ErrorReport>, CliError> {
    if !cfg.scenario.has_exact() {
        return Err(CliError::Config(format!("scenario `{}` has no exact solution to converge to", cfg.scenario_id)));
    }
    create_dir(&cfg.output)?;
    let mut reports = Vec::new();
    for &nx in &cfg.grids {
        let scenario = cfg.scenario.clone().with_cells_x(nx);
        let (solver, mut u) = scenario.build(cfg.solver_params())?;
        driver::run(&solver, &mut u, cfg.end, &[], |_, _| {}, |_| {})?;
        reports.push(h_errors(&scenario, &solver.grid, &u).expect("exact solution checked above"));
    }
    write_file(&cfg.output.join("convergence.txt"), &eoc_table(&reports))?;
    Ok(reports)
}
