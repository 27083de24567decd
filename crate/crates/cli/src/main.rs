//! `graspsim`: runs, validates and compares grasp manipulation scenarios.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use grasp_core::scenario::{compare, run_scenario, Mode, RunLog, ScenarioConfig};
use grasp_core::GraspError;
use log::{error, info};

const CONFIG_ERROR: u8 = 4;
const IO_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "graspsim", version, about = "Safe multi-finger grasp manipulation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write `run.csv` plus plot series into `--out`.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Filtered)]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-family margins of two run tables side by side.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Friction coefficient for the β ≤ μ margin.
        #[arg(long, default_value_t = 0.9)]
        mu: f64,
    },
    /// Check a scenario file and its initial grasp.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Nominal,
    Filtered,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Nominal => Mode::NominalOnly,
            ModeArg::Filtered => Mode::Filtered,
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::load(path).map_err(|e| {
        error!("{e}");
        ExitCode::from(CONFIG_ERROR)
    })
}

fn io_failure(e: GraspError) -> ExitCode {
    error!("{e}");
    ExitCode::from(IO_ERROR)
}

fn run(config: &Path, mode: Mode, out: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    info!("running {} in {} mode", config.display(), mode.name());
    let outcome = run_scenario(&cfg, mode).map_err(|e| {
        error!("cannot start {}: {e}", config.display());
        ExitCode::from(CONFIG_ERROR)
    })?;
    std::fs::create_dir_all(out).map_err(|e| io_failure(e.into()))?;
    outcome.log.write_table(&out.join("run.csv")).map_err(io_failure)?;
    let files = outcome
        .log
        .write_plotdata(out, &cfg.constraint_settings(), cfg.friction.mu)
        .map_err(io_failure)?;
    for f in files {
        info!("wrote {}", f.display());
    }
    let end = outcome.log.rows.last().map_or(0.0, |r| r[0]);
    println!("{} at t = {end:.4} s ({} steps)", outcome.termination.name(), outcome.log.len());
    if let Some(reason) = outcome.termination.reason() {
        println!("  {reason}");
    }
    Ok(ExitCode::from(outcome.termination.exit_code() as u8))
}

fn compare_logs(a: &Path, b: &Path, mu: f64) -> Result<ExitCode, ExitCode> {
    let la = RunLog::read_table(a).map_err(io_failure)?;
    let lb = RunLog::read_table(b).map_err(io_failure)?;
    match compare(&la, &lb, mu) {
        Ok(c) => {
            print!("{c}");
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            error!("{e}");
            Err(ExitCode::from(CONFIG_ERROR))
        }
    }
}

fn validate(config: &Path) -> Result<ExitCode, ExitCode> {
    let cfg = load(config)?;
    let model = cfg.build_model();
    let state = cfg.initial_state(&model).map_err(|e| {
        error!("initial grasp: {e}");
        ExitCode::from(CONFIG_ERROR)
    })?;
    println!("{}: ok ({} fingers, residual {:.3e})", config.display(), model.contact_count(), model.grasp_residual(&state));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRASPSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, mode, out } => run(&config, mode.into(), &out),
        Command::Compare { a, b, mu } => compare_logs(&a, &b, mu),
        Command::Validate { config } => validate(&config),
    };
    result.unwrap_or_else(|code| code)
}
