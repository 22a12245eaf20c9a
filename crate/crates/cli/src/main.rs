use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fveg_cli::commands;
use fveg_cli::config::Settings;
use fveg_cli::output::eoc_table;
use fveg_cli::CliError;

#[derive(Parser)]
#[command(name = "fveg", version, about = "Shallow water benchmarks with the FVEG scheme")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration file; flags override its keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, writing snapshots, gages, errors and a manifest.
    Run(Common),
    /// Run a scenario on several grids and tabulate errors and EOC.
    Convergence(Common),
    /// List the bundled scenarios.
    ListScenarios,
}

fn resolve(common: &Common) -> Result<fveg_cli::config::RunConfig, CliError> {
    let file = match &common.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    Settings::resolve(file, &common.settings)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ListScenarios => print!("{}", commands::list_scenarios()),
        Command::Run(common) => {
            let cfg = resolve(&common)?;
            let out = commands::run(&cfg)?;
            println!(
                "{}: {} steps to t = {}, min depth {:e}, {} files in {}",
                cfg.scenario_id,
                out.summary.steps,
                cfg.end,
                out.summary.min_depth,
                out.files.len(),
                cfg.output.display()
            );
            for (name, e) in &out.errors {
                println!("{name} error: Linf {:e} L1 {:e} L2 {:e}", e[0], e[1], e[2]);
            }
        }
        Command::Convergence(common) => {
            let cfg = resolve(&common)?;
            let reports = commands::convergence(&cfg)?;
            print!("{}", eoc_table(&reports));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fveg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
