//! Plot-ready text files. Floating values use 17 significant digits so
//! every file reads back to the exact in-memory value.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fveg::mesh::{CartesianGrid, CellField};
use fveg::scenarios::{eoc, ErrorReport};
use fveg::solver::Solver;
use fveg::state::ConservedState;
use serde::Serialize;

use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// One row per cell, in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRow {
    pub x: [f64; 2],
    pub h: f64,
    pub surface: f64,
    pub b: f64,
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub g: f64,
    pub rows: Vec<SnapshotRow>,
}

impl Snapshot {
    pub fn capture(solver: &Solver, u: &ConservedState) -> Self {
        let grid = &solver.grid;
        let prim = solver.primitives(u);
        let rows = grid
            .cells()
            .map(|c| SnapshotRow {
                x: grid.cell_center(c),
                h: prim.h.get(c),
                surface: prim.surface.get(c),
                b: solver.bath.b_cell.get(c),
                v: [prim.v1.get(c), prim.v2.get(c)],
            })
            .collect();
        Self { t: u.t, nx: grid.nx, ny: grid.ny, dx: grid.dx, g: solver.params.g, rows }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("# t {} nx {} ny {} dx {} g {}\n", num(self.t), self.nx, self.ny, num(self.dx), num(self.g));
        s.push_str("# x1 x2 h H b v1 v2\n");
        for r in &self.rows {
            let cols = [r.x[0], r.x[1], r.h, r.surface, r.b, r.v[0], r.v[1]].map(num);
            writeln!(s, "{}", cols.join(" ")).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or("empty snapshot")?.trim_start_matches('#').split_whitespace().collect();
        let field = |key: &str| -> Result<&str, String> {
            let k = header.iter().position(|&w| w == key).ok_or(format!("header lacks `{key}`"))?;
            header.get(k + 1).copied().ok_or(format!("header lacks a value for `{key}`"))
        };
        let float = |key: &str| field(key)?.parse::<f64>().map_err(|e| format!("{key}: {e}"));
        let int = |key: &str| field(key)?.parse::<usize>().map_err(|e| format!("{key}: {e}"));
        let mut snap = Snapshot { t: float("t")?, nx: int("nx")?, ny: int("ny")?, dx: float("dx")?, g: float("g")?, rows: vec![] };
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.starts_with('#')) {
            let v = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("row {}: {e}", n + 1))?;
            let [x1, x2, h, surface, b, v1, v2] = v[..] else {
                return Err(format!("row {} has {} columns, expected 7", n + 1, v.len()));
            };
            snap.rows.push(SnapshotRow { x: [x1, x2], h, surface, b, v: [v1, v2] });
        }
        if snap.rows.len() != snap.nx * snap.ny {
            return Err(format!("{} rows for a {}x{} grid", snap.rows.len(), snap.nx, snap.ny));
        }
        Ok(snap)
    }
}

pub fn snapshot_path(dir: &Path, index: usize, t: f64) -> PathBuf {
    dir.join(format!("snapshot_{index:03}_t{t}.txt"))
}

/// Free-surface record `(t, H - H0)` at one location.
#[derive(Debug, Clone)]
pub struct GageSeries {
    pub name: String,
    pub location: [f64; 2],
    pub level: f64,
    pub samples: Vec<(f64, f64)>,
}

impl GageSeries {
    pub fn record(&mut self, grid: &CartesianGrid, surface: &CellField, t: f64) {
        let cell = grid.locate(self.location);
        self.samples.push((t, surface.get(cell) - self.level));
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# gage {} x1 {} x2 {} H0 {}\n# t H-H0\n",
            self.name,
            num(self.location[0]),
            num(self.location[1]),
            num(self.level)
        );
        for (t, eta) in &self.samples {
            writeln!(s, "{} {}", num(*t), num(*eta)).unwrap();
        }
        s
    }
}

/// `quantity Linf L1 L2` rows.
pub fn error_table(rows: &[(&str, [f64; 3])]) -> String {
    let mut s = String::from("# quantity Linf L1 L2\n");
    for (name, e) in rows {
        writeln!(s, "{name} {} {} {}", num(e[0]), num(e[1]), num(e[2])).unwrap();
    }
    s
}

/// Grid size, then each norm followed by its rate against the previous row.
pub fn eoc_table(reports: &[ErrorReport]) -> String {
    let rates = eoc(reports);
    let mut s = String::new();
    if reports.len() > 1 {
        s.push_str("# nx ny Linf EOC L1 EOC L2 EOC\n");
    } else {
        s.push_str("# nx ny Linf L1 L2\n");
    }
    for (k, r) in reports.iter().enumerate() {
        write!(s, "{} {}", r.nx, r.ny).unwrap();
        let norms = [r.linf, r.l1, r.l2];
        for (n, e) in norms.iter().enumerate() {
            write!(s, " {}", num(*e)).unwrap();
            if reports.len() > 1 {
                match k.checked_sub(1) {
                    Some(p) => write!(s, " {:.4}", rates[p][n]).unwrap(),
                    None => s.push_str(" -"),
                }
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub config: &'a crate::config::RunConfig,
    pub dx: f64,
    pub steps: usize,
    /// Excluded from run-to-run comparisons.
    pub wall_time_s: f64,
    pub min_depth: f64,
    pub zeroed_volume: f64,
    pub limited_edges: usize,
    pub files: Vec<String>,
    /// `(t, volume)` after every step.
    pub volume: &'a [(f64, f64)],
}
