//! `fracdim`: experiment harness for the fractional-order optimizers.
//!
//! Subcommands: `run` (seeded experiment runs with CSV traces and JSON
//! summaries), `sweep` (one-parameter sweeps aggregated over seeds) and
//! `check` (the canned verification suite). Exit codes: 0 success,
//! 2 configuration error, 3 I/O error. Bound-check failures are reported
//! in the summaries, never as a process failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fracdim_harness::config::ExperimentConfig;
use fracdim_harness::runner::{run_all, run_sweep, sweep_table};
use fracdim_harness::trace_io::write_atomic;
use fracdim_harness::{check, CliError, OutputFormat};

#[derive(Parser)]
#[command(name = "fracdim", about = "Fractional-order SGD experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (key = value lines); defaults
    /// reproduce the Gaussian AR(2) experiment when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Repeatable KEY=VALUE override applied after the config file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Which artifacts to write per run.
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every (method, seed) pair of the configuration.
    Run(CommonArgs),
    /// Sweep one configuration parameter over a list of values.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Name of the swept configuration key.
        #[arg(long)]
        param: String,
        /// Comma-separated list of values for the swept key.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Run the canned verification suite and report pass/fail per check.
    Check,
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::parse_file(path).map_err(CliError::Config)?,
        None => ExperimentConfig::default(),
    };
    for entry in &common.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{entry}' is not KEY=VALUE")))?;
        cfg.apply(key.trim(), value).map_err(CliError::Config)?;
    }
    if let Ok(seed) = std::env::var("FRACDIM_SEED") {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("FRACDIM_SEED: {e}")))?;
        cfg.seeds = vec![seed];
    }
    cfg.validate().map_err(CliError::Config)?;
    Ok(cfg)
}

fn cmd_run(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let outcomes = run_all(&cfg, &common.out, common.format, common.workers)?;
    for o in &outcomes {
        let errs = o
            .final_abs_errors
            .as_ref()
            .map(|e| {
                e.iter()
                    .map(|x| format!("{x:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_else(|| "n/a".into());
        println!(
            "{} seed {}: final abs errors [{}], bounds {}{}",
            o.method.name(),
            o.seed,
            errs,
            if o.bounds_all_hold { "hold" } else { "VIOLATED" },
            match (&o.csv_path, &o.summary_path) {
                (Some(c), _) => format!(" -> {}", c.display()),
                (None, Some(j)) => format!(" -> {}", j.display()),
                _ => String::new(),
            }
        );
    }
    Ok(())
}

fn cmd_sweep(common: &CommonArgs, param: &str, values: &[String]) -> Result<(), CliError> {
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let cfg = load_config(common)?;
    let rows = run_sweep(&cfg, param, values, common.workers)?;
    let table = sweep_table(param, &rows);
    let path = common.out.join(format!("sweep_{param}.csv"));
    write_atomic(&path, table.as_bytes()).map_err(CliError::Io)?;
    print!("{table}");
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(common) => cmd_run(common),
        Command::Sweep {
            common,
            param,
            values,
        } => cmd_sweep(common, param, values),
        Command::Check => {
            return if check::run_checks() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            err.exit_code()
        }
    }
}
