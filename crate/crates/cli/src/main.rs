//! `fairdice`: data preparation, ensemble constraint and scenario runs for
//! the coupled climate-economy model.

mod commands;
mod config;
mod data;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::Config;

#[derive(Parser, Debug)]
#[command(name = "fairdice", version, about = "Coupled climate-economy scenario runner")]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data directory.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for member-level parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic data directory.
    SynthData,
    /// Draw a prior ensemble, filter and reweight it, write the posterior.
    Constrain(ConstrainArgs),
    /// Spin members up to 2023 and export their exogenous forcing.
    Spinup,
    /// Optimize members under a scenario preset.
    RunScenario(RunArgs),
    /// Historical warming of the median member at ECS 2, 3 and 5 K.
    DemoEcs,
    /// Extend a population series from 2300 to 2500.
    ExtendPopulation(ExtendArgs),
}

#[derive(Args, Debug)]
struct ConstrainArgs {
    /// RMSE filter threshold, K.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    n_prior: Option<usize>,
    #[arg(long)]
    n_posterior: Option<usize>,
    #[arg(long)]
    with_replacement: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// optimal, wb2c, p15c or rennert.
    #[arg(long)]
    scenario: Option<String>,
    /// `all`, `median`, or ids such as `1,4,10-20`.
    #[arg(long)]
    members: Option<String>,
}

#[derive(Args, Debug)]
struct ExtendArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

/// Effective settings after merging the config file with flags.
pub struct Settings {
    pub config: Config,
    pub data: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

fn resolve(cli: &Cli) -> Result<Settings> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    macro_rules! flag {
        ($field:ident, $value:expr) => {
            if let Some(v) = $value {
                config.$field = Some(v);
            }
        };
    }
    flag!(data, cli.data.clone());
    flag!(out, cli.out.clone());
    flag!(seed, cli.seed);
    flag!(workers, cli.workers);
    match &cli.command {
        Command::Constrain(a) => {
            flag!(threshold, a.threshold);
            flag!(n_prior, a.n_prior);
            flag!(n_posterior, a.n_posterior);
            if a.with_replacement {
                config.with_replacement = Some(true);
            }
        }
        Command::RunScenario(a) => {
            flag!(scenario, a.scenario.clone());
            flag!(members, a.members.clone());
        }
        _ => {}
    }
    let seed = *config.seed.get_or_insert(0);
    Ok(Settings {
        data: config.data.clone().unwrap_or_else(|| "data".into()),
        out: config.out.clone().unwrap_or_else(|| "out".into()),
        seed,
        config,
    })
}

fn run(cli: Cli) -> Result<()> {
    let settings = resolve(&cli)?;
    if let Some(n) = settings.config.workers {
        anyhow::ensure!(n > 0, "--workers must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    match &cli.command {
        Command::SynthData => commands::synth_data::run(&settings),
        Command::Constrain(_) => commands::constrain::run(&settings),
        Command::Spinup => commands::spinup::run(&settings),
        Command::RunScenario(_) => commands::run_scenario::run(&settings),
        Command::DemoEcs => commands::demo_ecs::run(&settings),
        Command::ExtendPopulation(a) => commands::extend_population::run(&settings, &a.input, &a.output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
