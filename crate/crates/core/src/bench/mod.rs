//! Benchmark games with known critical points.

pub mod lse;
pub mod rps;

pub use lse::{lse_analytic_solution, make_lse, LseBenchmark, LseGame, LseParams};
pub use rps::{make_rps, make_rps_untransformed, RpsGame, RPS_LIPSCHITZ};
