// SPDX-License-Identifier: Apache-2.0

//! Command-line driver: configuration loading, subcommand dispatch and result
//! persistence for the `tempomux` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::Value;

use crate::config::{ExperimentConfig, ENV_PREFIX};
use crate::error::CliError;
use crate::output::{Format, OutputDir, RunManifest, MANIFEST_SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "tempomux", version, about = "Temporal-mode multiplexing of itinerant microwave photons")]
pub struct Cli {
    /// Experiment configuration (TOML). Defaults apply when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "tempomux-out")]
    pub out: PathBuf,

    /// Seed for sampled quantities; overrides the config and environment.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Worker threads for independent runs (0 uses every core).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub workers: usize,

    /// Table format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Construct a mode basis and report its overlap matrix.
    Modes,
    /// Emission rates, sender/receiver couplings and the DAC study.
    Drives,
    /// Emission, mode-selective absorption, rejection and re-capture runs.
    Simulate,
    /// Absorption efficiency against the receiver delay offset.
    Sweep,
    /// Process tomography of the transfer for each configured mode.
    Tomography,
    /// Mode-count maps, single-budget counts and Wigner exports.
    Capacity,
    /// Check the configuration and compare the two operator-role readings.
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Drives => "drives",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Tomography => "tomography",
            Command::Capacity => "capacity",
            Command::Validate => "validate",
        }
    }
}

/// Resolved inputs shared by every subcommand.
pub struct Context {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub out: OutputDir,
}

/// Loads the configuration with `env` overrides and runs the command.
/// Returns the summary printed on stdout.
pub fn run(cli: &Cli, env: &[(String, String)]) -> Result<Value, CliError> {
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let mut config = config::load(cli.config.as_deref(), env)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let config_hash = config.hash()?;
    let workers = if cli.workers == 0 { rayon::current_num_threads() } else { cli.workers };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;

    let mut ctx = Context { seed: config.seed, config, out: OutputDir::create(&cli.out, cli.format)? };
    ctx.out.write_json("config.json", &ctx.config)?;
    log::info!("{} with config {config_hash}", cli.command.name());

    let summary = pool.install(|| match cli.command {
        Command::Modes => commands::modes::run(&mut ctx),
        Command::Drives => commands::drives::run(&mut ctx),
        Command::Simulate => commands::simulate::run(&mut ctx),
        Command::Sweep => commands::sweep::run(&mut ctx),
        Command::Tomography => commands::tomography::run(&mut ctx),
        Command::Capacity => commands::capacity::run(&mut ctx),
        Command::Validate => commands::validate::run(&mut ctx, &config_hash),
    })?;
    ctx.out.write_json("summary.json", &summary)?;

    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        artifact: "tempomux".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cli.command.name().into(),
        config_hash,
        seed: ctx.seed,
        format: cli.format,
        workers,
        files: Vec::new(),
        started_at: started.to_rfc3339(),
        finished_at: chrono::Utc::now().to_rfc3339(),
        wall_clock_s: clock.elapsed().as_secs_f64(),
    };
    ctx.out.write_manifest(manifest)?;
    Ok(summary)
}

/// Environment variables carrying configuration overrides.
pub fn override_env() -> Vec<(String, String)> {
    std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect()
}
