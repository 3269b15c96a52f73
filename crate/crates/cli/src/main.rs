//! `gaitforge` command-line front end.

mod artifact;
mod commands;
mod config;
mod csv;
mod error;

use clap::{Args, Parser, Subcommand};
use config::{read_config_file, ConfigFile, Overrides, RunConfig};
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "gaitforge",
    version,
    about = "Quasi-passive gait search and continuation to actuated gaits"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML run configuration; an empty or missing file runs the prismatic preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// prismatic-monopod, segmented-monopod or sagittal-quadruped.
    #[arg(long, global = true)]
    model: Option<String>,
    /// speed or energy.
    #[arg(long = "op-kind", global = true)]
    op_kind: Option<String>,
    #[arg(long = "op-value", global = true, allow_hyphen_values = true)]
    op_value: Option<f64>,
    /// Collocation intervals per phase.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Continuation step length.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Root-search residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// mass-prop, neg-damping or energy-grad.
    #[arg(long, global = true)]
    injection: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one stride and write it as CSV.
    Simulate {
        /// Start state as comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Search for a quasi-passive gait and write its artifact.
    FindGait,
    /// Continue a quasi-passive gait artifact to the actuated gait.
    Continue {
        #[arg(long)]
        gait: PathBuf,
    },
    /// Audit a gait artifact: residuals, energy balance, second-order check.
    Check {
        #[arg(long)]
        gait: PathBuf,
    },
    /// Write grid and re-simulated trajectories of a gait artifact as CSV.
    Export {
        #[arg(long)]
        gait: PathBuf,
    },
}

fn init_logging() {
    let level = match std::env::var("GAITFORGE_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Error,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
}

fn resolve(global: GlobalArgs) -> Result<RunConfig, CliError> {
    let file = match &global.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };
    RunConfig::resolve(
        file,
        Overrides {
            model: global.model,
            op_kind: global.op_kind,
            op_value: global.op_value,
            n: global.n,
            delta: global.delta,
            tol: global.tol,
            injection: global.injection,
            out: global.out,
        },
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(cli.global)?;
    match cli.command {
        Command::Simulate { x0, gamma, eps } => {
            let path = commands::simulate(&cfg, x0, gamma, eps)?;
            println!("{}", path.display());
        }
        Command::FindGait => {
            let path = commands::find_gait(&cfg)?;
            println!("artifact = {}", path.display());
        }
        Command::Continue { gait } => {
            let path = commands::continue_gait(&cfg, &gait)?;
            println!("artifact = {}", path.display());
        }
        Command::Check { gait } => {
            let outcome = commands::check(&gait)?;
            print!("{}", outcome.text);
            if !outcome.flags.is_empty() {
                return Err(CliError::Numerical(format!("{} audit flag(s)", outcome.flags.len())));
            }
        }
        Command::Export { gait } => {
            for path in commands::export(&cfg, &gait)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
