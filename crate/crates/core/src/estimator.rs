//! Feasible perturbation and the multi-point pseudo-gradient (MPG) estimate.
//!
//! At sample `t` every player `i` draws `u^i_t` uniformly on its unit sphere
//! and plays `x_bar^i + delta u^i_t`, where
//! `x_bar^i = (1 - delta/r^i) x^i + (delta/r^i) p^i` pulls the leading
//! iterate towards the interior ball `B(p^i, r^i)`. All players perturb
//! together, so sample `t` is one joint action. With `T` samples plus the
//! baseline `t = 0`,
//!
//! ```text
//! G^i = n^i / (delta T) * sum_{t=1..T} (J^i(X_t) - J^i(X_0)) u^i_t
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{GameInstance, JointAction};
use crate::linalg::norm;
use crate::sets::FeasibleSet;

/// Objective evaluations per iteration above which they fan out on rayon.
const PARALLEL_MIN_ACTIONS: usize = 512;

/// Query radius and sample count for one estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbationSpec {
    pub delta: f64,
    pub samples: usize,
}

impl PerturbationSpec {
    pub fn new(delta: f64, samples: usize) -> Self {
        PerturbationSpec { delta, samples }
    }

    /// Checks `0 < delta <= min_i r^i` and `samples >= 1`.
    pub fn validate(&self, game: &GameInstance) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Precondition(format!(
                "query radius must be positive, got {}",
                self.delta
            )));
        }
        if self.samples == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        let r_min = min_ball_radius(game);
        if self.delta > r_min {
            return Err(Error::Precondition(format!(
                "query radius {} exceeds the smallest interior-ball radius {r_min}",
                self.delta
            )));
        }
        Ok(())
    }
}

pub fn min_ball_radius(game: &GameInstance) -> f64 {
    game.sets()
        .iter()
        .map(|s| s.interior_ball().radius)
        .fold(f64::INFINITY, f64::min)
}

/// The estimate together with everything that was played and observed.
#[derive(Clone, Debug)]
pub struct EstimateBundle {
    /// Stacked `G = [G^i]_i`.
    pub estimate: Vec<f64>,
    /// `T + 1` joint actions; index 0 is the baseline.
    pub actions: Vec<JointAction>,
    /// `observed[i][t] = J^i(actions[t])`.
    pub observed: Vec<Vec<f64>>,
}

impl EstimateBundle {
    pub fn samples(&self) -> usize {
        self.actions.len() - 1
    }
}

/// Supplies per-sample direction draws.
pub trait DirectionSource {
    /// Unit directions `u^i_t` for every player at sample index `t`.
    fn directions(&mut self, t: usize, dims: &[usize]) -> Vec<Vec<f64>>;
}

impl<R: Rng> DirectionSource for R {
    fn directions(&mut self, _t: usize, dims: &[usize]) -> Vec<Vec<f64>> {
        dims.iter().map(|d| gaussian_direction(self, *d)).collect()
    }
}

/// Deterministic tree of generator streams keyed by `(root, iteration, sample)`.
///
/// Each leaf is an independent ChaCha stream, so changing how many samples
/// one iteration takes never shifts the draws of another.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        SeedTree { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn iteration(&self, k: usize) -> IterationStreams {
        IterationStreams {
            root: self.root,
            k: k as u64,
        }
    }

    /// A stream reserved for one-off draws outside the iteration loop
    /// (Lipschitz probes and the like), separated from iteration streams
    /// by its tag.
    pub fn auxiliary(&self, tag: u64) -> ChaCha8Rng {
        stream_rng(self.root, tag, u64::MAX, *b"auxiliar")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterationStreams {
    root: u64,
    k: u64,
}

impl IterationStreams {
    pub fn sample_rng(&self, t: usize) -> ChaCha8Rng {
        stream_rng(self.root, self.k, t as u64, *b"mpg-dirs")
    }
}

impl DirectionSource for IterationStreams {
    fn directions(&mut self, t: usize, dims: &[usize]) -> Vec<Vec<f64>> {
        let mut rng = self.sample_rng(t);
        dims.iter().map(|d| gaussian_direction(&mut rng, *d)).collect()
    }
}

fn stream_rng(root: u64, a: u64, b: u64, tag: [u8; 8]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&root.to_le_bytes());
    seed[8..16].copy_from_slice(&a.to_le_bytes());
    seed[16..24].copy_from_slice(&b.to_le_bytes());
    seed[24..].copy_from_slice(&tag);
    ChaCha8Rng::from_seed(seed)
}

/// Uniform direction on the unit sphere in `R^dim`.
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::Structural("cannot sample the sphere in R^0".into()));
    }
    Ok(gaussian_direction(rng, dim))
}

pub(crate) fn gaussian_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n >= 1e-30 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// `(1 - delta/r) x + (delta/r)(p + r u) = x_bar + delta u`.
pub fn perturb(x: &[f64], set: &FeasibleSet, delta: f64, u: &[f64]) -> Result<Vec<f64>> {
    let ball = set.interior_ball();
    if x.len() != ball.center.len() || u.len() != x.len() {
        return Err(Error::Structural(format!(
            "perturb: point of length {}, direction of length {}, set of dimension {}",
            x.len(),
            u.len(),
            ball.center.len()
        )));
    }
    if !(delta >= 0.0 && delta <= ball.radius) {
        return Err(Error::Precondition(format!(
            "query radius {delta} must lie in [0, {}]",
            ball.radius
        )));
    }
    Ok(perturb_unchecked(x, &ball.center, ball.radius, delta, u))
}

fn shrink_weight(delta: f64, radius: f64) -> f64 {
    delta / radius
}

fn perturb_unchecked(x: &[f64], center: &[f64], radius: f64, delta: f64, u: &[f64]) -> Vec<f64> {
    let w = shrink_weight(delta, radius);
    x.iter()
        .zip(center)
        .zip(u)
        .map(|((xi, pi), ui)| (1.0 - w) * xi + w * pi + delta * ui)
        .collect()
}

/// The shrunk point `x_bar` around which samples are drawn.
pub fn shrunk_point(game: &GameInstance, x: &JointAction, delta: f64) -> JointAction {
    let mut out = x.clone();
    for (i, set) in game.sets().iter().enumerate() {
        let ball = set.interior_ball();
        let w = shrink_weight(delta, ball.radius);
        for (v, p) in out.block_mut(i).iter_mut().zip(&ball.center) {
            *v = (1.0 - w) * *v + w * p;
        }
    }
    out
}

/// Draws `T + 1` joint perturbations of `lead`, plays them and assembles
/// the multi-point estimate.
pub fn mpg_estimate<D: DirectionSource + ?Sized>(
    game: &GameInstance,
    lead: &JointAction,
    spec: &PerturbationSpec,
    directions: &mut D,
) -> Result<EstimateBundle> {
    game.check_shape(lead)?;
    game.check_membership(lead)?;
    spec.validate(game)?;
    let dims = game.dims();
    let balls: Vec<_> = game.sets().iter().map(FeasibleSet::interior_ball).collect();

    // Direction draws are sequential; evaluation may fan out afterwards.
    let mut draws = Vec::with_capacity(spec.samples + 1);
    let mut actions = Vec::with_capacity(spec.samples + 1);
    for t in 0..=spec.samples {
        let u = directions.directions(t, dims);
        let mut action = lead.clone();
        for (i, ball) in balls.iter().enumerate() {
            let moved = perturb_unchecked(lead.block(i), &ball.center, ball.radius, spec.delta, &u[i]);
            action.block_mut(i).copy_from_slice(&moved);
        }
        if !game.contains(&action) {
            return Err(Error::Internal(format!(
                "perturbed action {:?} left the feasible set",
                action.stacked()
            )));
        }
        draws.push(u);
        actions.push(action);
    }

    let players = game.num_players();
    let evaluate = |a: &JointAction| -> Vec<f64> {
        (0..players)
            .map(|i| game.objective_unchecked(i, a.stacked()))
            .collect()
    };
    let values: Vec<Vec<f64>> = if actions.len() * players >= PARALLEL_MIN_ACTIONS {
        actions.par_iter().map(evaluate).collect()
    } else {
        actions.iter().map(evaluate).collect()
    };

    let mut observed = vec![Vec::with_capacity(actions.len()); players];
    for row in &values {
        for (i, v) in row.iter().enumerate() {
            observed[i].push(*v);
        }
    }

    let mut estimate = vec![0.0; game.total_dim()];
    let mut offset = 0;
    for i in 0..players {
        let n_i = dims[i] as f64;
        let coef = n_i / (spec.delta * spec.samples as f64);
        let baseline = observed[i][0];
        let block = &mut estimate[offset..offset + dims[i]];
        for t in 1..=spec.samples {
            let diff = observed[i][t] - baseline;
            for (g, u) in block.iter_mut().zip(&draws[t][i]) {
                *g += coef * diff * u;
            }
        }
        offset += dims[i];
    }
    if estimate.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("MPG estimate is not finite".into()));
    }
    Ok(EstimateBundle {
        estimate,
        actions,
        observed,
    })
}

/// Monte-Carlo estimate of `grad_{x^i} J~^i_delta(x_bar)` from independent
/// single-sample terms, with per-coordinate standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothedGradient {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

impl SmoothedGradient {
    pub fn std_error_norm(&self) -> f64 {
        norm(&self.std_error)
    }
}

/// Averages `n^i/delta (J^i(x_bar + delta u_1) - J^i(x_bar + delta u_0)) u^i_1`
/// over `mc_samples` independent pairs. No shrinking is applied: `x_bar`
/// itself must admit every perturbation of radius `delta`.
pub fn smoothed_gradient_oracle<R: Rng + ?Sized>(
    game: &GameInstance,
    player: usize,
    x_bar: &JointAction,
    delta: f64,
    mc_samples: usize,
    rng: &mut R,
) -> Result<SmoothedGradient> {
    game.check_shape(x_bar)?;
    if player >= game.num_players() {
        return Err(Error::Structural(format!("player index {player} out of range")));
    }
    if mc_samples < 2 {
        return Err(Error::Precondition("need at least two Monte-Carlo samples".into()));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Precondition(format!("query radius must be positive, got {delta}")));
    }
    let dims = game.dims();
    let n_i = dims[player] as f64;
    let mut sum = vec![0.0; dims[player]];
    let mut sum_sq = vec![0.0; dims[player]];
    let play = |rng: &mut R| -> Result<(f64, Vec<f64>)> {
        let mut a = x_bar.clone();
        let mut own = Vec::new();
        for (j, d) in dims.iter().enumerate() {
            let u = gaussian_direction(rng, *d);
            for (v, ui) in a.block_mut(j).iter_mut().zip(&u) {
                *v += delta * ui;
            }
            if j == player {
                own = u;
            }
        }
        if !game.contains(&a) {
            return Err(Error::Domain(
                "x_bar + delta u leaves the feasible set; shrink delta".into(),
            ));
        }
        Ok((game.objective_unchecked(player, a.stacked()), own))
    };
    for _ in 0..mc_samples {
        let (j0, _) = play(rng)?;
        let (j1, u) = play(rng)?;
        let c = n_i / delta * (j1 - j0);
        for ((s, q), ui) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(&u) {
            let term = c * ui;
            *s += term;
            *q += term * term;
        }
    }
    let m = mc_samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q / m - mu * mu).max(0.0) * m / (m - 1.0) / m).sqrt())
        .collect();
    Ok(SmoothedGradient { mean, std_error })
}
