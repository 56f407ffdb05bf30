//! Builds a solver from a [`RunConfig`], runs it, and renders the trace and
//! summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bandit_omd::bench::{make_rps, LseGame};
use bandit_omd::solver::LipschitzSource;
use bandit_omd::{
    GameInstance, JointAction, MirrorStructure, RunRecord, Schedules, Solver, SolverOptions,
};
use serde::{Deserialize, Serialize};

use crate::config::{schedule_echo, GameSpec, MirrorChoice, RunConfig};

pub const TRACE_HEADER: &str = "k,delta_k,t_k,cumulative_queries,rel_distance,rel_step,residual";

/// A game resolved from its config selector.
pub struct BuiltGame {
    pub game: GameInstance,
    /// The regression data when the game is an LSE instance.
    pub lse: Option<LseGame>,
}

pub fn build_game(spec: &GameSpec) -> Result<BuiltGame> {
    Ok(match spec {
        GameSpec::Rps => BuiltGame {
            game: make_rps(),
            lse: None,
        },
        GameSpec::Lse(params) => {
            let data = LseGame::generate(params)?;
            let bench = data.instance()?;
            BuiltGame {
                game: bench.game,
                lse: Some(data),
            }
        }
        GameSpec::File(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading LSE instance {}", path.display()))?;
            let data = LseGame::from_text(&text)
                .with_context(|| format!("parsing LSE instance {}", path.display()))?;
            let bench = data.instance()?;
            BuiltGame {
                game: bench.game,
                lse: Some(data),
            }
        }
    })
}

pub fn build_mirror(cfg: &RunConfig, dims: &[usize]) -> Result<MirrorStructure> {
    let block = |m: MirrorChoice| -> Result<MirrorStructure> {
        Ok(match m {
            MirrorChoice::Entropy => MirrorStructure::negative_entropy(),
            MirrorChoice::Euclidean => MirrorStructure::euclidean(cfg.mirror_modulus)?,
        })
    };
    match cfg.mirrors.as_slice() {
        [one] => Ok(MirrorStructure::broadcast(block(*one)?, dims)?),
        many if many.len() == dims.len() => {
            let blocks = many
                .iter()
                .zip(dims)
                .map(|(m, d)| block(*m).map(|b| (b, *d)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MirrorStructure::product(blocks)?)
        }
        many => bail!(
            "mirror.kind lists {} entries but the game has {} players",
            many.len(),
            dims.len()
        ),
    }
}

pub fn schedules(cfg: &RunConfig) -> Schedules {
    Schedules {
        tau: cfg.tau,
        delta: cfg.delta,
        samples: cfg.samples,
        horizon: cfg.horizon,
    }
}

/// A validated solver with its starting point.
pub struct Prepared {
    pub solver: Solver,
    pub x0: JointAction,
    pub seed: u64,
}

/// Builds the game, mirror and solver. Fails on schedule violations, the
/// step-size guard, or an infeasible starting point, before any output.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let built = build_game(&cfg.game)?;
    let game = built.game;
    let mirror = build_mirror(cfg, game.dims())?;
    let options = SolverOptions {
        lipschitz: cfg.lipschitz,
        override_step_guard: cfg.override_step_guard,
        allow_non_convergent: cfg.non_convergent,
        max_total_queries: cfg.query_cap,
        ..SolverOptions::default()
    };
    let x0 = match &cfg.x0 {
        Some(v) => game.action(v.clone()).context("run.x0")?,
        None => game.ball_centers(),
    };
    let solver = Solver::new(game, mirror, schedules(cfg), options)?;
    solver.initial_state(x0.clone(), cfg.seed).context("run.x0")?;
    Ok(Prepared {
        solver,
        x0,
        seed: cfg.seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardSummary {
    pub value: f64,
    pub lipschitz: f64,
    pub lipschitz_source: String,
    pub modulus: f64,
    pub passed: bool,
    pub overridden: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub game: String,
    pub iterations: usize,
    pub final_rel_distance: Option<f64>,
    pub min_residual: Option<f64>,
    pub total_queries: u64,
    pub wall_time_secs: f64,
    pub truncated: bool,
    pub non_convergent_mode: bool,
    pub guard: GuardSummary,
    pub schedule: BTreeMap<String, String>,
}

/// Everything a run produces, before anything is written.
pub struct ExperimentOutput {
    pub records: Vec<RunRecord>,
    pub trace: String,
    pub summary: SummaryReport,
}

pub fn execute(cfg: &RunConfig) -> Result<ExperimentOutput> {
    let prepared = prepare(cfg)?;
    let start = Instant::now();
    let outcome = prepared.solver.run(prepared.x0, prepared.seed)?;
    let wall = start.elapsed().as_secs_f64();
    let guard = prepared.solver.guard();
    let summary = SummaryReport {
        game: prepared.solver.game().name().to_string(),
        iterations: outcome.records.len(),
        final_rel_distance: outcome.records.last().and_then(|r| r.rel_distance),
        min_residual: outcome
            .records
            .iter()
            .filter_map(|r| r.residual)
            .reduce(f64::min),
        total_queries: outcome.final_state.cumulative_queries,
        wall_time_secs: wall,
        truncated: outcome.truncated,
        non_convergent_mode: cfg.non_convergent,
        guard: GuardSummary {
            value: guard.value,
            lipschitz: guard.lipschitz,
            lipschitz_source: match guard.lipschitz_source {
                LipschitzSource::Configured => "configured".into(),
                LipschitzSource::Registered => "registered".into(),
                LipschitzSource::Estimated { probes } => format!("estimated ({probes} probes)"),
            },
            modulus: guard.modulus,
            passed: guard.passed,
            overridden: guard.overridden,
        },
        schedule: schedule_echo(cfg).into_iter().collect(),
    };
    let trace = trace_csv(&outcome.records);
    Ok(ExperimentOutput {
        records: outcome.records,
        trace,
        summary,
    })
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn trace_csv(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.k,
            fmt_float(r.delta_k),
            r.t_k,
            r.cumulative_queries,
            fmt_opt(r.rel_distance),
            fmt_opt(r.rel_step),
            fmt_opt(r.residual)
        );
    }
    s
}

/// Where the summary of a trace at `trace` is written.
pub fn summary_path(trace: &Path) -> PathBuf {
    trace.with_extension("summary.json")
}

/// Writes every file to a sibling temporary first and renames afterwards,
/// so a failure never leaves a partial output behind.
pub fn write_all(files: &[(PathBuf, String)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, content) in files {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let mut tmp = path.clone().into_os_string();
        tmp.push(".partial");
        let tmp = PathBuf::from(tmp);
        if let Err(e) = fs::write(&tmp, content) {
            for t in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(e).with_context(|| format!("writing {}", tmp.display()));
        }
        staged.push(tmp);
    }
    for (tmp, (path, _)) in staged.iter().zip(files) {
        fs::rename(tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    }
    Ok(())
}

/// Runs `cfg` and writes its trace CSV and summary JSON.
pub fn run_experiment(cfg: &RunConfig) -> Result<SummaryReport> {
    let out = execute(cfg)?;
    let summary_json = serde_json::to_string_pretty(&out.summary)? + "\n";
    write_all(&[
        (cfg.output.clone(), out.trace),
        (summary_path(&cfg.output), summary_json),
    ])?;
    Ok(out.summary)
}
