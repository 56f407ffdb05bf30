use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bandit_omd::bench::LseGame;
use bandit_omd_cli::experiment::{build_game, prepare, run_experiment, write_all};
use bandit_omd_cli::{compare_schedules, parse_config, GameSpec, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bandit-omd", version, about = "Bandit learning of critical points in continuous games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace CSV and summary JSON.
    Solve {
        /// Path to a `key = value` config file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides `run.output`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides `run.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `run.horizon`.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Run several schedules on the same game and merge their traces.
    Compare {
        /// Comma-separated config paths.
        #[arg(long, value_delimiter = ',', required = true)]
        configs: Vec<PathBuf>,
        /// Combined CSV; the ranking goes next to it as JSON.
        #[arg(long, default_value = "compare.csv")]
        output: PathBuf,
    },
    /// Parse a config and run the schedule and step-size checks only.
    Validate {
        /// Path to a `key = value` config file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the LSE instance described by a config to a replayable file.
    ExportLse {
        /// Path to a `key = value` config file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("config {}", path.display()))
}

fn label_for(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve {
            config,
            output,
            seed,
            horizon,
        } => {
            let mut cfg = load(&config)?;
            if let Some(o) = output {
                cfg.output = o;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            let summary = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Compare { configs, output } => {
            let mut labelled = Vec::with_capacity(configs.len());
            for path in &configs {
                labelled.push((label_for(path), load(path)?));
            }
            let report = compare_schedules(&labelled)?;
            let ranking = serde_json::to_string_pretty(&report.ranking)? + "\n";
            write_all(&[(output.clone(), report.csv), (output.with_extension("ranking.json"), ranking.clone())])?;
            print!("{ranking}");
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let prepared = prepare(&cfg)?;
            let g = prepared.solver.guard();
            println!(
                "ok: (tau*L/mu)^2 = {:.6} with L = {} ({:?}), mu = {}{}",
                g.value,
                g.lipschitz,
                g.lipschitz_source,
                g.modulus,
                if g.overridden { " [guard overridden]" } else { "" }
            );
        }
        Command::ExportLse { config, output } => {
            let cfg = load(&config)?;
            if !matches!(cfg.game, GameSpec::Lse(_)) {
                bail!("export-lse needs game.kind = lse");
            }
            let data: LseGame = build_game(&cfg.game)?.lse.context("no LSE data")?;
            write_all(&[(output, data.to_text())])?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
