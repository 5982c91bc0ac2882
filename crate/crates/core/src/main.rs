use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spectrum_access::experiment::oracle::{oracle_check, reward_curve_csv, OracleGrid};
use spectrum_access::experiment::{presets, run_experiment, ExperimentConfig};
use spectrum_access::{Error, Result};

#[derive(Parser)]
#[command(
    name = "spectrum-access",
    version,
    about = "Opportunistic spectrum access simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run(RunArgs),
    /// Run a configuration with a sweep block.
    Sweep(RunArgs),
    /// Compare closed-form thresholds with the DP solver.
    OracleCheck(OutArgs),
    /// Run a built-in figure preset (3 to 9).
    Figure {
        number: u32,
        #[command(flatten)]
        common: Common,
        /// Override the horizon T.
        #[arg(long)]
        horizon: Option<u32>,
    },
    /// Print λ(H, D) for a range of thresholds.
    RewardCurve {
        #[arg(long, default_value_t = 0.05)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        costs: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        max_h: u32,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of runs per point.
    #[arg(long)]
    runs: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct OutArgs {
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only log errors.
    #[arg(long)]
    quiet: bool,
}

enum Failure {
    Config(String),
    Oracle(String),
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_config(mut cfg: ExperimentConfig, common: &Common) -> Result<()> {
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if let Some(runs) = common.runs {
        cfg.runs = runs;
    }
    let table = run_experiment(&cfg, None)?;
    emit(common.out.out.as_deref(), &table.to_csv())
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn execute(command: Command) -> std::result::Result<(), Failure> {
    let config_err = |e: Error| Failure::Config(e.to_string());
    match command {
        Command::Run(args) => {
            init_logging(args.common.out.quiet);
            let cfg = ExperimentConfig::load(&args.config).map_err(config_err)?;
            run_config(cfg, &args.common).map_err(config_err)
        }
        Command::Sweep(args) => {
            init_logging(args.common.out.quiet);
            let cfg = ExperimentConfig::load(&args.config).map_err(config_err)?;
            if cfg.sweep_variable.is_none() {
                return Err(Failure::Config(format!(
                    "{} has no sweep_variable; use `run`",
                    args.config.display()
                )));
            }
            run_config(cfg, &args.common).map_err(config_err)
        }
        Command::Figure {
            number,
            common,
            horizon,
        } => {
            init_logging(common.out.quiet);
            let mut cfg = presets::figure(number).map_err(config_err)?;
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            run_config(cfg, &common).map_err(config_err)
        }
        Command::OracleCheck(out) => {
            init_logging(out.quiet);
            let report = oracle_check(&OracleGrid::default()).map_err(config_err)?;
            emit(out.out.as_deref(), &report.to_csv()).map_err(config_err)?;
            if !out.quiet {
                eprintln!("{}", report.summary());
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Oracle(format!(
                    "{} violations",
                    report.violations.len()
                )))
            }
        }
        Command::RewardCurve {
            q,
            costs,
            max_h,
            out,
        } => {
            init_logging(out.quiet);
            let csv = reward_curve_csv(q, &costs, max_h).map_err(config_err)?;
            emit(out.out.as_deref(), &csv).map_err(config_err)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("oracle check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
