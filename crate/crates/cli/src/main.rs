//! `nftmarket`: command-line driver for the NFT market analysis pipeline.
//!
//! Exit codes: 0 success, 1 validation error, 2 runtime error, 64 unknown
//! subcommand.

mod commands;
mod config;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use log::error;

use config::RunConfig;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "NFTMARKET_THREADS";

pub enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<nftmarket::Error> for Failure {
    fn from(e: nftmarket::Error) -> Self {
        match e {
            nftmarket::Error::Config(m) => Failure::Validation(m),
            other => Failure::Runtime(other.into()),
        }
    }
}

#[derive(Parser)]
#[command(name = "nftmarket", version, about = "NFT market analysis pipeline")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random component.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    inputs: InputArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Trade export (CSV or JSONL); repeat for several files.
    #[arg(long = "trades", global = true)]
    trades: Vec<PathBuf>,
    /// Daily USD exchange rates (CSV).
    #[arg(long, global = true)]
    rates: Option<PathBuf>,
    /// Ingest settings and category map (TOML).
    #[arg(long, global = true)]
    ingest_config: Option<PathBuf>,
    /// Object embeddings (EMB1).
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic market under <out>/synth.
    Synth {
        #[arg(long)]
        n_collections: Option<usize>,
        #[arg(long)]
        n_traders: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Clean trade exports into the canonical store.
    Ingest {
        /// Abort on the first malformed row.
        #[arg(long)]
        strict: bool,
    },
    /// Market time series, price percentiles, sale timelines, power laws.
    Stats {
        #[arg(long)]
        window_days: Option<u32>,
    },
    /// Trader and NFT networks, modularity against the null model, SCCs.
    Network {
        #[arg(long)]
        null_realizations: Option<usize>,
    },
    /// Embedding distances, PCA and group separation.
    Visual {
        #[arg(long)]
        pca_k: Option<usize>,
    },
    /// Feature extraction, regressions and classifiers.
    Predict {
        /// Experiment grid (TOML), replacing the `[predict]` table.
        #[arg(long)]
        experiment: Option<PathBuf>,
    },
    /// Bundle all CSV and JSON outputs with a manifest.
    Report,
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "[{}] {}", record.level(), record.args()))
        .target(env_logger::Target::Stderr)
        .init();
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Validation(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Runtime(e.into()))
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if !cli.inputs.trades.is_empty() {
        cfg.inputs.trades = cli.inputs.trades.clone();
    }
    for (flag, slot) in [
        (&cli.inputs.rates, &mut cfg.inputs.rates),
        (&cli.inputs.ingest_config, &mut cfg.inputs.ingest_config),
        (&cli.inputs.embeddings, &mut cfg.inputs.embeddings),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    match &cli.command {
        Command::Synth { n_collections, n_traders, theta } => {
            if let Some(v) = n_collections {
                cfg.synth.n_collections = *v;
            }
            if let Some(v) = n_traders {
                cfg.synth.n_traders = *v;
            }
            if let Some(v) = theta {
                cfg.synth.theta = *v;
            }
        }
        Command::Ingest { strict } => cfg.ingest.strict |= strict,
        Command::Stats { window_days: Some(v) } => cfg.stats.window_days = *v,
        Command::Network { null_realizations: Some(v) } => cfg.network.null_realizations = *v,
        Command::Visual { pca_k: Some(v) } => cfg.visual.pca_k = *v,
        Command::Predict { experiment: Some(p) } => {
            config::require_file(p, "experiment file")?;
            cfg.predict = nftmarket::predict::ExperimentSpec::load(p)
                .map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let cfg = resolve(&cli)?;
    match cli.command {
        Command::Synth { .. } => commands::synth(&cfg),
        Command::Ingest { .. } => commands::ingest(&cfg).map(|_| ()),
        Command::Stats { .. } => commands::stats(&cfg),
        Command::Network { .. } => commands::network(&cfg),
        Command::Visual { .. } => commands::visual(&cfg),
        Command::Predict { .. } => commands::predict(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            error!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            error!("{e:#}");
            ExitCode::from(2)
        }
    }
}
