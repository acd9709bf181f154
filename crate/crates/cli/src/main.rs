//! `needcast`: anticipate a user's information needs from check-in activity.

mod commands;
mod config;
mod error;
mod http;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "needcast", version, about)]
struct Cli {
    /// Pipeline configuration file (`key = value` lines).
    #[arg(long, global = true, env = "NEEDCAST_CONFIG")]
    config: Option<PathBuf>,

    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the taxonomy, venues and check-ins; rank venues per category.
    Ingest,
    /// Deduplicate check-ins and cut them into sessions.
    Sessions,
    /// Fit activity transition models on the training sessions.
    FitTransitions,
    /// Mine need terms from query suggestions for the top venues.
    BuildNeeds,
    /// Cluster synonymous terms into canonical needs.
    NormalizeNeeds,
    /// Fit temporal scopes from votes and derive gamma.
    FitTemporal,
    /// Print the dashboard for a last activity.
    Rank(RankArgs),
    /// Score the models on the most frequent test transitions.
    Evaluate(EvalArgs),
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    last_activity: String,
    #[arg(long, default_value = "m2")]
    model: String,
    /// Number of cards; defaults to `dashboard_k`.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_delimiter = ',', default_value = "m0,m1,m2,m3")]
    models: Vec<String>,
    /// Activity level to evaluate; defaults to `eval_level`.
    #[arg(long)]
    level: Option<u8>,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let cwd = std::env::current_dir()?;
    for raw in &cli.overrides {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{raw}`")))?;
        cfg.set(k.trim(), v.trim(), &cwd)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Rank(a) => {
            let k = a.k.unwrap_or(cfg.dashboard_k);
            cfg.validate()?;
            commands::rank(&cfg, &a.last_activity, &a.model, k)
        }
        Command::Evaluate(a) => {
            if let Some(level) = a.level {
                cfg.set("eval_level", &level.to_string(), std::path::Path::new("."))?;
            }
            cfg.validate()?;
            commands::evaluate(&cfg, &a.models)
        }
        other => {
            cfg.validate()?;
            match other {
                Command::Ingest => commands::ingest(&cfg),
                Command::Sessions => commands::sessions(&cfg),
                Command::FitTransitions => commands::fit_transitions(&cfg),
                Command::BuildNeeds => commands::build_needs(&cfg),
                Command::NormalizeNeeds => commands::normalize_needs(&cfg),
                Command::FitTemporal => commands::fit_temporal(&cfg),
                Command::Rank(_) | Command::Evaluate(_) => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("NEEDCAST_LOG")
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("needcast: {e}");
            e.exit_code()
        }
    }
}
