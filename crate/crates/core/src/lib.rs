//! Bandit learning of critical points in multi-player continuous games.
//!
//! Players observe only their own costs at perturbed joint actions. Each
//! iteration builds a multi-point gradient estimate and feeds it to an
//! optimistic mirror-descent step.

pub mod bench;
pub mod error;
pub mod estimator;
pub mod game;
pub mod linalg;
pub mod mirror;
pub mod sets;
pub mod solver;

pub use error::{Error, Result};
pub use estimator::{mpg_estimate, EstimateBundle, PerturbationSpec, SeedTree};
pub use game::{GameInstance, JointAction};
pub use mirror::{MirrorKind, MirrorStructure};
pub use sets::{Ball, ConvexSet, FeasibleSet};
pub use solver::{
    DeltaSchedule, EstimatorMode, RunOutcome, RunRecord, SampleSchedule, Schedules, Solver,
    SolverOptions, SolverState,
};
