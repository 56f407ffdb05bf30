//! Runs several schedules on one game and merges their traces.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::experiment::{execute, ExperimentOutput};

const TRACE_FIELDS: [&str; 6] = [
    "delta_k",
    "t_k",
    "cumulative_queries",
    "rel_distance",
    "rel_step",
    "residual",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: usize,
    pub label: String,
    pub final_rel_distance: Option<f64>,
    pub total_queries: u64,
    pub iterations: usize,
    pub truncated: bool,
    pub non_convergent_mode: bool,
}

#[derive(Clone, Debug)]
pub struct ComparisonReport {
    /// Wide CSV keyed by `k`, with each run's `cumulative_queries` column
    /// giving the second axis.
    pub csv: String,
    /// Runs ordered by final relative distance; runs without one come last.
    pub ranking: Vec<RankEntry>,
}

fn same_problem(a: &RunConfig, b: &RunConfig) -> Vec<String> {
    let mut out = Vec::new();
    if a.game != b.game {
        out.push("game".to_string());
    }
    if a.mirrors != b.mirrors || a.mirror_modulus != b.mirror_modulus {
        out.push("mirror".to_string());
    }
    if a.x0 != b.x0 {
        out.push("starting point".to_string());
    }
    out
}

/// Runs every labelled config concurrently. All configs must share the
/// game, mirror and starting point.
pub fn compare_schedules(configs: &[(String, RunConfig)]) -> Result<ComparisonReport> {
    if configs.len() < 2 {
        bail!("compare needs at least two configs, got {}", configs.len());
    }
    let (first_label, first) = &configs[0];
    for (label, cfg) in &configs[1..] {
        let diff = same_problem(first, cfg);
        if !diff.is_empty() {
            bail!(
                "configs '{first_label}' and '{label}' differ in {}; only schedules and seeds may vary",
                diff.join(", ")
            );
        }
    }
    let mut labels: Vec<&String> = configs.iter().map(|(l, _)| l).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != configs.len() {
        bail!("config labels must be distinct");
    }

    let outputs: Vec<ExperimentOutput> = configs
        .par_iter()
        .map(|(label, cfg)| execute(cfg).map_err(|e| e.context(format!("config '{label}'"))))
        .collect::<Result<_>>()?;

    let mut csv = String::from("k");
    for (label, _) in configs {
        for f in TRACE_FIELDS {
            let _ = write!(csv, ",{label}:{f}");
        }
    }
    csv.push('\n');
    // Reuse the single-run rows, minus their `k`, so values match the solo traces.
    let bodies: Vec<Vec<&str>> = outputs
        .iter()
        .map(|o| {
            o.trace
                .lines()
                .skip(1)
                .map(|l| l.split_once(',').map(|(_, r)| r).unwrap_or(""))
                .collect()
        })
        .collect();
    let rows = bodies.iter().map(Vec::len).max().unwrap_or(0);
    for k in 0..rows {
        let _ = write!(csv, "{}", k + 1);
        for body in &bodies {
            match body.get(k) {
                Some(rest) => {
                    let _ = write!(csv, ",{rest}");
                }
                None => csv.push_str(&",".repeat(TRACE_FIELDS.len())),
            }
        }
        csv.push('\n');
    }

    let mut ranking: Vec<RankEntry> = configs
        .iter()
        .zip(&outputs)
        .map(|((label, cfg), out)| RankEntry {
            rank: 0,
            label: label.clone(),
            final_rel_distance: out.summary.final_rel_distance,
            total_queries: out.summary.total_queries,
            iterations: out.summary.iterations,
            truncated: out.summary.truncated,
            non_convergent_mode: cfg.non_convergent,
        })
        .collect();
    ranking.sort_by(|a, b| {
        let key = |e: &RankEntry| e.final_rel_distance.unwrap_or(f64::INFINITY);
        key(a).total_cmp(&key(b)).then_with(|| a.label.cmp(&b.label))
    });
    for (i, e) in ranking.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(ComparisonReport { csv, ranking })
}
