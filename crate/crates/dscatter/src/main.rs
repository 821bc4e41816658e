use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dscatter::config::{self, load_config, ExperimentConfig, LoadedConfig, Mode};
use dscatter::error::{CliError, Result};
use dscatter::experiment::{run_experiment, Table};
use dscatter::grid::{snr_db_from_rho, SnrGrid};
use dscatter_core::fixedpoint::{solve_fundamental, SolverOptions};

#[derive(Parser)]
#[command(
    name = "dscatter",
    version,
    about = "Deterministic equivalents and Monte Carlo for double-scattering MIMO multiple-access channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the fixed point at one SNR and print it as JSON.
    Solve(PointArgs),
    /// Deterministic (and optionally simulated) mutual information at one SNR.
    Mi(PointArgs),
    /// Per-stream MMSE SINR at one SNR.
    Sinr(PointArgs),
    /// MMSE sum-rate at one SNR.
    Sumrate(PointArgs),
    /// Iterative water-filling at one SNR.
    Waterfill(PointArgs),
    /// Kronecker conditional check at one SNR.
    Oracle(PointArgs),
    /// Full SNR sweep.
    Experiment(ExperimentArgs),
    /// Print a built-in configuration as JSON.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(config::PRESETS))]
        name: String,
    },
}

#[derive(Args)]
struct Source {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(config::PRESETS))]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<LoadedConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path),
            (None, Some(name)) => config::resolve(config::preset(name)?),
            (None, None) => Err(CliError::config("either --config or --preset is required")),
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    source: Source,
    /// Noise variance; defaults to the configuration's `rho`.
    #[arg(long, conflicts_with = "snr_db")]
    rho: Option<f64>,
    /// SNR in dB (SNR = 1/rho).
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Monte Carlo trials (0 for deterministic only).
    #[arg(long, default_value_t = 0)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report nats as bits.
    #[arg(long)]
    bits: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    source: Source,
    /// Write CSV here; defaults to the configuration's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR grid `start:stop:step` in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<SnrGrid>,
    /// Comma-separated modes.
    #[arg(long, value_enum, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    #[arg(long)]
    bits: bool,
    /// Append a per-row wall_time_s column (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

fn write_table(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            table.write_csv(BufWriter::new(file))
        }
        None => table.write_csv(io::stdout().lock()),
    }
}

fn point(args: &PointArgs, mode: Mode) -> Result<()> {
    let loaded = args.source.load()?;
    let snr_db = match (args.snr_db, args.rho) {
        (Some(s), _) => s,
        (None, Some(r)) if r > 0.0 => snr_db_from_rho(r),
        (None, Some(r)) => {
            return Err(CliError::config(format!("--rho must be positive, got {r}")))
        }
        (None, None) => snr_db_from_rho(loaded.spec.rho()),
    };
    let cfg = ExperimentConfig {
        snr_db: SnrGrid::single(snr_db),
        trials: args.trials,
        seed: args.seed,
        modes: vec![mode],
        output: None,
        bits: args.bits,
        timing: false,
    };
    let table = run_experiment(&loaded.spec, &cfg)?;
    write_table(&table, args.out.as_deref())
}

fn solve(args: &PointArgs) -> Result<()> {
    let loaded = args.source.load()?;
    let rho = match (args.snr_db, args.rho) {
        (Some(s), _) => dscatter::grid::rho_from_snr_db(s),
        (None, Some(r)) => r,
        (None, None) => loaded.spec.rho(),
    };
    let spec = loaded
        .spec
        .with_rho(rho)
        .map_err(|e| CliError::config(e.to_string()))?;
    let sol = solve_fundamental(&spec, &SolverOptions::default())
        .map_err(|e| CliError::solver("fixed point", e))?;
    let json = serde_json::json!({
        "rho": rho,
        "gbar": sol.gbar,
        "g": sol.g,
        "delta": sol.delta,
        "iterations": sol.iterations,
        "residual": sol.residual,
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
    Ok(())
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let loaded = args.source.load()?;
    let mut cfg = loaded.experiment;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.snr_db {
        cfg.snr_db = g;
    }
    if let Some(m) = &args.modes {
        cfg.modes = m.clone();
    }
    cfg.bits = args.bits;
    cfg.timing = args.timing;
    let table = run_experiment(&loaded.spec, &cfg)?;
    write_table(&table, args.out.as_deref().or(cfg.output.as_deref()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Mi(a) => point(&a, Mode::Mi),
        Command::Sinr(a) => point(&a, Mode::Sinr),
        Command::Sumrate(a) => point(&a, Mode::Sumrate),
        Command::Waterfill(a) => point(&a, Mode::Waterfill),
        Command::Oracle(a) => point(&a, Mode::Oracle),
        Command::Experiment(a) => experiment(&a),
        Command::Preset { name } => {
            let file = config::preset(&name)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &file).expect("json");
            writeln!(out).ok();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
