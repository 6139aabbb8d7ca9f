//! `outbreak`: run the spatial-epidemiology pipeline from a JSON config.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use outbreak_core::pipeline::fixture::{write_mini_region, FixtureSpec};
use outbreak_core::pipeline::{run, PipelineConfig, RunOptions, StageSelection};
use outbreak_core::Error;
use serde_json::json;

#[derive(Parser)]
#[command(name = "outbreak", version, about = "District-level outbreak analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage or the whole pipeline.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// all, ingest, weights, esda, features, train or importance
        #[arg(long, default_value = "all")]
        stage: StageSelection,
        /// Re-run stages even when the manifest says they are current.
        #[arg(long)]
        force: bool,
        /// Overrides the ESDA and learning seeds.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Write the synthetic mini-region inputs and config into a directory.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            let line = json!({
                "ts": buf.timestamp().to_string(),
                "level": record.level().as_str(),
                "target": record.target(),
                "msg": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .init();
}

fn failing_stage(err: &anyhow::Error) -> Option<&'static str> {
    match err.downcast_ref::<Error>()? {
        Error::Stage { stage, .. } | Error::UnmetDependency { stage, .. } => Some(stage),
        _ => None,
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            stage,
            force,
            seed,
            threads,
        } => {
            let mut cfg = PipelineConfig::load(&config)
                .with_context(|| format!("loading config {}", config.display()))?;
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            let report = run(&cfg, stage, RunOptions { force, threads })?;
            let stages: Vec<_> = report
                .stages
                .iter()
                .map(|(s, o)| json!({ "stage": s, "outcome": o }))
                .collect();
            println!("{}", json!({ "status": "ok", "stages": stages }));
        }
        Command::Fixture { out, seed } => {
            let spec = FixtureSpec { seed, ..FixtureSpec::default() };
            let path = write_mini_region(&out, &spec)?;
            println!("{}", json!({ "status": "ok", "config": path }));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            let report = json!({
                "status": "error",
                "stage": failing_stage(&err),
                "error": err.to_string(),
                "causes": chain,
            });
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
