//! Configuration-driven experiment runner for the radial energy-critical wave lab.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::commands::Context;
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "wavecone-lab", version, about)]
struct Cli {
    /// TOML experiment configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory receiving the artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for random data and sampling checks.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Worker threads for parameter sweeps; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Nonlinear trajectory and energy series.
    Simulate,
    /// Radiation profile of the free evolution, its inverse and the round trip.
    Radiation,
    /// Exterior defect curves over the cone offsets.
    Exterior,
    /// Boosted soliton energy law, elliptic residuals and a soliton fit.
    Soliton,
    /// Localized virial identities along a trajectory.
    Virial,
    /// Exterior energy of the free wave outside the light cone.
    Channels,
    /// Sampled checks of the cone geometry lemma and the cosine inequality.
    GeometrySelftest,
    /// Print the resolved configuration as TOML.
    PrintConfig,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Radiation => "radiation",
            Command::Exterior => "exterior",
            Command::Soliton => "soliton",
            Command::Virial => "virial",
            Command::Channels => "channels",
            Command::GeometrySelftest => "geometry-selftest",
            Command::PrintConfig => "print-config",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let cfg = ExperimentConfig::default();
            cfg.validate()?;
            cfg
        }
    };
    if let Command::PrintConfig = cli.command {
        print!("{}", cfg.canonical());
        return Ok(());
    }
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }

    let start = Instant::now();
    let mut ctx = Context::new(&cfg, &cli.out, cli.seed)?;
    let result = match cli.command {
        Command::Simulate => commands::simulate(&mut ctx),
        Command::Radiation => commands::radiation(&mut ctx),
        Command::Exterior => commands::exterior(&mut ctx),
        Command::Soliton => commands::soliton(&mut ctx),
        Command::Virial => commands::virial(&mut ctx),
        Command::Channels => commands::channels(&mut ctx),
        Command::GeometrySelftest => commands::geometry_selftest(&mut ctx),
        Command::PrintConfig => unreachable!(),
    };
    if result.is_ok() || matches!(result, Err(CliError::Accuracy { .. })) {
        write_manifest(cli, &cfg, &ctx, start.elapsed().as_secs_f64(), result.is_ok())?;
    }
    result
}

fn write_manifest(cli: &Cli, cfg: &ExperimentConfig, ctx: &Context, wall_time: f64, passed: bool) -> CliResult<()> {
    let canonical = cfg.canonical();
    let manifest = json!({
        "subcommand": cli.command.name(),
        "config_sha256": hex::encode(Sha256::digest(canonical.as_bytes())),
        "config_path": cli.config.as_ref().map(|p| p.display().to_string()),
        "seed": cli.seed,
        "threads": rayon::current_num_threads(),
        "versions": {
            "wavecone-lab": env!("CARGO_PKG_VERSION"),
            "wavecone-core": wavecone_core::VERSION,
        },
        "wall_time_seconds": wall_time,
        "passed": passed,
        "outputs": ctx.outputs,
    });
    let file = std::fs::File::create(ctx.path("manifest.json"))?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(())
}
