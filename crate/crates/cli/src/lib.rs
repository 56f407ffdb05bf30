//! Config-driven experiment runner for bandit optimistic mirror descent.

pub mod compare;
pub mod config;
pub mod experiment;

pub use compare::{compare_schedules, ComparisonReport, RankEntry};
pub use config::{parse_config, print_config, ConfigError, GameSpec, MirrorChoice, RunConfig};
pub use experiment::{execute, prepare, run_experiment, ExperimentOutput, SummaryReport};
