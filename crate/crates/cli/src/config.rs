//! Run configuration from a TOML file and command-line flags.
//!
//! Top-level keys apply to every scenario; a `[overrides.<scenario-id>]`
//! table overrides them when that scenario runs. Flags override both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fveg::evolution::OperatorOrder;
use fveg::scenarios::{Scenario, ScenarioId};
use fveg::solver::SolverParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
}

impl From<Order> for OperatorOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::First => OperatorOrder::First,
            Order::Second => OperatorOrder::Second,
        }
    }
}

/// Files a run may write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Snapshots,
    Gages,
    Manifest,
    Errors,
}

/// Optional settings shared by the config file and the command line.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Scenario id (see `list-scenarios`).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Cells along x1; `ny` defaults to square cells.
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Gravitational acceleration.
    #[arg(long)]
    pub g: Option<f64>,
    /// CFL number in (0, 1).
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub end: Option<f64>,
    /// Comma-separated output times; replaces the scenario's list.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated subset of files to write.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<OutputKind>>,
    /// Dry threshold for the depth.
    #[arg(long)]
    pub eps_h: Option<f64>,
    #[arg(long, value_name = "BOOL")]
    pub entropy_fix: Option<bool>,
    #[arg(long, value_enum)]
    pub order: Option<Order>,
    /// Comma-separated cell counts along x1 for `convergence`.
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, Settings>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let s: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for (name, section) in &s.overrides {
            name.parse::<ScenarioId>()?;
            if !section.overrides.is_empty() {
                return Err(CliError::Config(format!("[overrides.{name}] cannot contain further overrides")));
            }
            if section.scenario.is_some() {
                return Err(CliError::Config(format!("[overrides.{name}] cannot select a scenario")));
            }
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Keys set in `top` win over keys set in `self`.
    fn layered(self, top: &Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: top.$f.clone().or(self.$f),)* overrides: self.overrides } };
        }
        pick!(scenario, nx, ny, g, cfl, end, snapshots, output, formats, eps_h, entropy_fix, order, grids)
    }

    /// Combines file settings with command-line flags and validates the result.
    pub fn resolve(file: Settings, flags: &Settings) -> Result<RunConfig, CliError> {
        let id_name = flags.scenario.clone().or_else(|| file.scenario.clone());
        let id_name = id_name.ok_or_else(|| CliError::Config("no scenario given (use --scenario or `scenario = ...`)".into()))?;
        let id: ScenarioId = id_name.parse()?;
        let section = file.overrides.get(id.name()).cloned().unwrap_or_default();
        let merged = file.clone().layered(&section).layered(flags);
        RunConfig::new(id, merged)
    }
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(skip)]
    pub scenario: Scenario,
    pub scenario_id: String,
    pub nx: usize,
    pub ny: usize,
    pub g: f64,
    pub cfl: f64,
    pub end: f64,
    pub snapshots: Vec<f64>,
    pub output: PathBuf,
    pub formats: Vec<OutputKind>,
    pub eps_h: f64,
    pub entropy_fix: bool,
    pub order: Order,
    pub grids: Vec<usize>,
}

impl RunConfig {
    fn new(id: ScenarioId, s: Settings) -> Result<Self, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let mut scenario = Scenario::new(id);
        if let Some(nx) = s.nx {
            scenario = scenario.with_cells_x(nx);
        }
        if let Some(ny) = s.ny {
            scenario.ny = ny;
        }
        scenario.grid()?;
        if let Some(g) = s.g {
            if !(g > 0.0 && g.is_finite()) {
                return bad(format!("g must be positive, got {g}"));
            }
            scenario.g = g;
        }
        if let Some(end) = s.end {
            if !(end > 0.0 && end.is_finite()) {
                return bad(format!("end time must be positive, got {end}"));
            }
            scenario.end_time = end;
        }
        if let Some(order) = s.order {
            scenario.order = order.into();
        }
        let defaults = SolverParams::default();
        let cfl = s.cfl.unwrap_or(defaults.cfl);
        if !(cfl > 0.0 && cfl < 1.0) {
            return bad(format!("cfl must lie in (0, 1), got {cfl}"));
        }
        let eps_h = s.eps_h.unwrap_or(defaults.eps_h);
        if !(eps_h > 0.0 && eps_h.is_finite()) {
            return bad(format!("eps_h must be positive, got {eps_h}"));
        }
        let end = scenario.end_time;
        // Scenario defaults past a shortened end time are dropped; explicit
        // times are validated.
        let snapshots =
            s.snapshots.unwrap_or_else(|| scenario.snapshot_times.iter().copied().filter(|&t| t <= end).collect());
        if snapshots.windows(2).any(|w| w[1] < w[0]) {
            return bad("snapshot times must be sorted".into());
        }
        if let Some(t) = snapshots.iter().find(|&&t| !(0.0..=end).contains(&t)) {
            return bad(format!("snapshot time {t} outside [0, {end}]"));
        }
        let mut formats = s.formats.unwrap_or_else(|| OutputKind::value_variants().to_vec());
        formats.sort();
        formats.dedup();
        let grids = s.grids.unwrap_or_else(|| vec![25, 50, 100]);
        if grids.is_empty() || grids.contains(&0) {
            return bad("grids must list positive cell counts".into());
        }
        let order = match scenario.order {
            OperatorOrder::First => Order::First,
            OperatorOrder::Second => Order::Second,
        };
        Ok(Self {
            scenario_id: id.name().to_string(),
            nx: scenario.nx,
            ny: scenario.ny,
            g: scenario.g,
            cfl,
            end,
            snapshots,
            output: s.output.unwrap_or_else(|| PathBuf::from("output")),
            formats,
            eps_h,
            entropy_fix: s.entropy_fix.unwrap_or(defaults.entropy_fix),
            order,
            grids,
            scenario,
        })
    }

    pub fn solver_params(&self) -> SolverParams {
        SolverParams { cfl: self.cfl, eps_h: self.eps_h, entropy_fix: self.entropy_fix, ..self.scenario.solver_params() }
    }

    pub fn writes(&self, kind: OutputKind) -> bool {
        self.formats.contains(&kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_sections_override_top_level() {
        let file = Settings::from_toml(
            "scenario = \"thacker-curved\"\ncfl = 0.3\nnx = 40\n[overrides.thacker-curved]\ncfl = 0.4\n",
        )
        .unwrap();
        let flags = Settings { nx: Some(30), ..Settings::default() };
        let cfg = Settings::resolve(file, &flags).unwrap();
        assert_eq!(cfg.cfl, 0.4);
        assert_eq!((cfg.nx, cfg.ny), (30, 30));
    }

    #[test]
    fn sections_for_other_scenarios_are_ignored() {
        let file = Settings::from_toml("scenario = \"dam-break-1d\"\n[overrides.thacker-curved]\ncfl = 0.4\n").unwrap();
        let cfg = Settings::resolve(file, &Settings::default()).unwrap();
        assert_eq!(cfg.cfl, 0.5);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Settings::from_toml("scenario = \"dam-break-1d\"\n\ncfl = = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = Settings::from_toml("scenario = \"dam-break-1d\"\nspeed = 3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        let resolve = |toml: &str| Settings::resolve(Settings::from_toml(toml).unwrap(), &Settings::default());
        assert!(resolve("scenario = \"dam-break-1d\"\ncfl = 1.0").is_err());
        assert!(resolve("scenario = \"dam-break-1d\"\nsnapshots = [0.2, 0.1]").is_err());
        assert!(resolve("scenario = \"dam-break-1d\"\nsnapshots = [9.0]").is_err());
        assert!(resolve("scenario = \"dam-break-1d\"\ngrids = []").is_err());
        let unknown = resolve("scenario = \"lake\"").unwrap_err().to_string();
        assert!(unknown.contains("circular-dam-break"), "{unknown}");
    }
}
