//! Optimistic mirror descent driven by multi-point estimates.
//!
//! Each iteration `k`:
//!
//! ```text
//! X_{k+1/2} = P_{X_k}(-tau G_{k-1})
//! G_k       = MPG(X_{k+1/2}; delta_k, T_k)
//! X_{k+1}   = P_{X_k}(-tau G_k)
//! ```
//!
//! with `G_0 = 0` and `X_0 = X_{1/2} = X_1 = x0`.

use crate::error::{Error, Result};
use crate::estimator::{min_ball_radius, mpg_estimate, EstimateBundle, PerturbationSpec, SeedTree};
use crate::game::{GameInstance, JointAction};
use crate::linalg::{distance, norm, scale};
use crate::mirror::MirrorStructure;

/// Probe pairs used when the Lipschitz constant has to be estimated.
pub const DEFAULT_LIPSCHITZ_PROBES: usize = 10_000;

/// `delta_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaSchedule {
    /// `c (k + a)^(-e)`.
    Power { c: f64, a: f64, e: f64 },
    Constant(f64),
}

impl DeltaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            DeltaSchedule::Power { c, a, e } => c * (k as f64 + a).powf(-e),
            DeltaSchedule::Constant(v) => v,
        }
    }

    /// Whether `sum delta_k` converges.
    pub fn is_summable(&self) -> bool {
        matches!(*self, DeltaSchedule::Power { e, .. } if e > 1.0)
    }
}

/// `T_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSchedule {
    /// `ceil(c k^e + floor)`.
    Power { c: f64, e: f64, floor: f64 },
    Constant(usize),
    /// `ceil(c (k + a)^(-e))`, the literal decaying form; never summable.
    Decaying { c: f64, a: f64, e: f64 },
}

impl SampleSchedule {
    pub fn at(&self, k: usize) -> usize {
        let raw = match *self {
            SampleSchedule::Power { c, e, floor } => (c * (k as f64).powf(e) + floor).ceil(),
            SampleSchedule::Constant(t) => t as f64,
            SampleSchedule::Decaying { c, a, e } => (c * (k as f64 + a).powf(-e)).ceil(),
        };
        if raw.is_finite() && raw >= 1.0 {
            raw as usize
        } else {
            0
        }
    }

    /// Whether `sum 1/T_k` converges.
    pub fn is_summable(&self) -> bool {
        matches!(*self, SampleSchedule::Power { c, e, .. } if c > 0.0 && e > 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedules {
    pub tau: f64,
    pub delta: DeltaSchedule,
    pub samples: SampleSchedule,
    pub horizon: usize,
}

impl Schedules {
    /// Every violation of the convergence hypotheses for this game.
    ///
    /// With `allow_non_convergent`, summability and monotonicity of the
    /// sample schedule are not enforced (ablation runs).
    pub fn violations(&self, game: &GameInstance, allow_non_convergent: bool) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.tau.is_finite() && self.tau > 0.0) {
            out.push(format!("step size tau must be positive, got {}", self.tau));
        }
        let r_min = min_ball_radius(game);
        let mut prev_delta = f64::INFINITY;
        let mut prev_t = 0usize;
        let mut delta_monotone = true;
        let mut t_monotone = true;
        let mut bad_delta = None;
        let mut bad_t = None;
        for k in 1..=self.horizon.max(1) {
            let d = self.delta.at(k);
            if !(d.is_finite() && d > 0.0) && bad_delta.is_none() {
                bad_delta = Some((k, d));
            }
            if d > prev_delta {
                delta_monotone = false;
            }
            prev_delta = d;
            let t = self.samples.at(k);
            if t == 0 && bad_t.is_none() {
                bad_t = Some(k);
            }
            if t < prev_t {
                t_monotone = false;
            }
            prev_t = t;
        }
        if let Some((k, d)) = bad_delta {
            out.push(format!("query radius delta_{k} = {d} is not positive"));
        }
        if let Some(k) = bad_t {
            out.push(format!("sample count T_{k} is below 1"));
        }
        let d1 = self.delta.at(1);
        if d1 > r_min {
            out.push(format!(
                "delta_1 = {d1} exceeds the smallest interior-ball radius {r_min}"
            ));
        }
        if !delta_monotone {
            out.push("delta_k must be nonincreasing".into());
        }
        if !self.delta.is_summable() {
            out.push(
                "delta schedule must be summable (power form with exponent > 1)".into(),
            );
        }
        if !allow_non_convergent {
            if !t_monotone {
                out.push("1/T_k must be nonincreasing (T_k nondecreasing)".into());
            }
            if !self.samples.is_summable() {
                out.push(
                    "sum of 1/T_k must be finite (power form with c > 0 and exponent > 1); \
                     set the non-convergent flag for ablations"
                        .into(),
                );
            }
        }
        out
    }
}

/// `(tau L / mu)^2 <= 1/12`.
pub fn check_step_size(tau: f64, lipschitz: f64, modulus: f64) -> Result<bool> {
    Ok(step_guard_value(tau, lipschitz, modulus)? <= GUARD_BOUND * (1.0 + 1e-12))
}

/// Largest admissible `(tau L / mu)^2`, accepted up to rounding.
pub const GUARD_BOUND: f64 = 1.0 / 12.0;

/// `(tau L / mu)^2`.
pub fn step_guard_value(tau: f64, lipschitz: f64, modulus: f64) -> Result<f64> {
    for (name, v) in [("tau", tau), ("L", lipschitz), ("mu", modulus)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
        }
    }
    Ok((tau * lipschitz / modulus).powi(2))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzEstimate {
    /// Largest observed `|F(x) - F(x')| / |x - x'|`; a lower bound on `L`.
    pub value: f64,
    pub probes: usize,
}

/// Lower bound on the Lipschitz constant of `F` from random feasible pairs.
pub fn estimate_lipschitz<R: rand::RngCore>(
    game: &GameInstance,
    probes: usize,
    rng: &mut R,
) -> Result<LipschitzEstimate> {
    if !game.has_pseudo_gradient() {
        return Err(Error::Unsupported(
            "Lipschitz estimation needs an analytic pseudo-gradient".into(),
        ));
    }
    let set = game.product_set();
    let mut best: f64 = 0.0;
    for _ in 0..probes {
        let x = game.action(set.sample(rng))?;
        let y = game.action(set.sample(rng))?;
        let dx = distance(x.stacked(), y.stacked());
        if dx < 1e-12 {
            continue;
        }
        let df = distance(&game.pseudo_gradient(&x)?, &game.pseudo_gradient(&y)?);
        best = best.max(df / dx);
    }
    Ok(LipschitzEstimate {
        value: best,
        probes,
    })
}

/// How the solver obtains its pseudo-gradient proxy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EstimatorMode {
    /// Bandit feedback through MPG.
    #[default]
    Mpg,
    /// Analytic `F` at the leading state; a single query per iteration.
    ExactGradient,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Overrides the game's registered constant; estimated when both absent.
    pub lipschitz: Option<f64>,
    pub lipschitz_probes: usize,
    pub override_step_guard: bool,
    /// Skips summability and monotonicity checks on `T_k`.
    pub allow_non_convergent: bool,
    /// Stops before the iteration that would exceed this many queries.
    pub max_total_queries: Option<u64>,
    /// Overrides the game's registered critical point for distance metrics.
    pub reference_cp: Option<JointAction>,
    pub estimator: EstimatorMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            lipschitz: None,
            lipschitz_probes: DEFAULT_LIPSCHITZ_PROBES,
            override_step_guard: false,
            allow_non_convergent: false,
            max_total_queries: None,
            reference_cp: None,
            estimator: EstimatorMode::Mpg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LipschitzSource {
    Configured,
    Registered,
    Estimated { probes: usize },
}

/// Outcome of the step-size check performed at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardReport {
    pub lipschitz: f64,
    pub lipschitz_source: LipschitzSource,
    pub modulus: f64,
    /// `(tau L / mu)^2`.
    pub value: f64,
    pub passed: bool,
    pub overridden: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    /// `X_k`.
    pub base: JointAction,
    /// `X_{k+1/2}` of the last completed iteration.
    pub lead: JointAction,
    /// `G_{k-1}`.
    pub prev_estimate: Vec<f64>,
    /// The baseline action played at the last completed iteration.
    pub last_play: JointAction,
    /// Number of completed iterations.
    pub k: usize,
    pub cumulative_queries: u64,
    pub seeds: SeedTree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub k: usize,
    pub delta_k: f64,
    pub t_k: usize,
    /// `|X^_{k+1/2,0} - x*| / |x*|`.
    pub rel_distance: Option<f64>,
    /// `|X^_{k+1/2,0} - X^_{k-1/2,0}| / |X^_{k-1/2,0}|`; `None` when the
    /// previous play is the origin.
    pub rel_step: Option<f64>,
    /// `eps(X_k)`.
    pub residual: Option<f64>,
    pub cumulative_queries: u64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub final_state: SolverState,
    /// The query cap stopped the run before the horizon.
    pub truncated: bool,
}

/// A validated solver for one game, geometry and schedule.
#[derive(Clone, Debug)]
pub struct Solver {
    game: GameInstance,
    mirror: MirrorStructure,
    schedules: Schedules,
    options: SolverOptions,
    reference: Option<JointAction>,
    guard: GuardReport,
}

impl Solver {
    /// Validates schedules and the step-size guard; refuses to build when
    /// `(tau L / mu)^2 > 1/12` unless the override flag is set.
    pub fn new(
        game: GameInstance,
        mirror: MirrorStructure,
        schedules: Schedules,
        options: SolverOptions,
    ) -> Result<Self> {
        let mut problems = schedules.violations(&game, options.allow_non_convergent);
        let n = game.total_dim();
        let mirror = match mirror.aligned_to(game.dims()) {
            Ok(m) => m,
            Err(e) => {
                problems.push(e.to_string());
                mirror
            }
        };
        let reference = options
            .reference_cp
            .clone()
            .or_else(|| game.reference_cp().cloned());
        if let Some(cp) = &reference {
            if game.check_shape(cp).is_err() {
                problems.push(format!("reference point must have dims {:?}", game.dims()));
            } else if norm(cp.stacked()) == 0.0 {
                problems.push("reference point is the origin; relative distance undefined".into());
            }
        }
        if let Some(cap) = options.max_total_queries {
            if cap == 0 {
                problems.push("query cap must be positive".into());
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }

        let (lipschitz, lipschitz_source) = match (options.lipschitz, game.lipschitz()) {
            (Some(l), _) => (l, LipschitzSource::Configured),
            (None, Some(l)) => (l, LipschitzSource::Registered),
            (None, None) => {
                let mut rng = SeedTree::new(0x4c49_5053).auxiliary(n as u64);
                let est = estimate_lipschitz(&game, options.lipschitz_probes, &mut rng)
                    .map_err(|e| match e {
                        Error::Unsupported(_) => Error::Config(vec![
                            "no Lipschitz constant configured and the game has no analytic \
                             pseudo-gradient to estimate one"
                                .into(),
                        ]),
                        other => other,
                    })?;
                (
                    est.value,
                    LipschitzSource::Estimated {
                        probes: est.probes,
                    },
                )
            }
        };
        let modulus = mirror.modulus();
        let value = step_guard_value(schedules.tau, lipschitz, modulus)?;
        let passed = check_step_size(schedules.tau, lipschitz, modulus)?;
        if !passed && !options.override_step_guard {
            return Err(Error::StepGuard {
                value,
                tau: schedules.tau,
                lipschitz,
                modulus,
            });
        }
        let guard = GuardReport {
            lipschitz,
            lipschitz_source,
            modulus,
            value,
            passed,
            overridden: !passed,
        };
        Ok(Solver {
            game,
            mirror,
            schedules,
            options,
            reference,
            guard,
        })
    }

    pub fn game(&self) -> &GameInstance {
        &self.game
    }

    pub fn mirror(&self) -> &MirrorStructure {
        &self.mirror
    }

    pub fn schedules(&self) -> &Schedules {
        &self.schedules
    }

    pub fn guard(&self) -> &GuardReport {
        &self.guard
    }

    pub fn reference(&self) -> Option<&JointAction> {
        self.reference.as_ref()
    }

    /// `X_0 = X_{1/2} = X_1 = x0`, `G_0 = 0`.
    pub fn initial_state(&self, x0: JointAction, seed: u64) -> Result<SolverState> {
        self.game.check_shape(&x0)?;
        self.game.check_membership(&x0)?;
        if !self.mirror.in_domain(x0.stacked()) {
            return Err(Error::Domain(format!(
                "initial point {:?} is outside the mirror domain",
                x0.stacked()
            )));
        }
        let x0 = self.game.action(x0.into_stacked())?;
        Ok(SolverState {
            lead: x0.clone(),
            last_play: x0.clone(),
            prev_estimate: vec![0.0; self.game.total_dim()],
            base: x0,
            k: 0,
            cumulative_queries: 0,
            seeds: SeedTree::new(seed),
        })
    }

    fn queries_for(&self, t_k: usize) -> u64 {
        match self.options.estimator {
            EstimatorMode::Mpg => t_k as u64 + 1,
            EstimatorMode::ExactGradient => 1,
        }
    }

    /// One iteration; returns the record and the estimate bundle.
    pub fn step(&self, state: &mut SolverState) -> Result<(RunRecord, EstimateBundle)> {
        let k = state.k + 1;
        self.step_inner(state, k).map_err(|e| e.at_iteration(k))
    }

    fn step_inner(&self, state: &mut SolverState, k: usize) -> Result<(RunRecord, EstimateBundle)> {
        let set = self.game.product_set();
        let tau = self.schedules.tau;
        let delta_k = self.schedules.delta.at(k);
        let t_k = self.schedules.samples.at(k);

        let lead = self.game.action(self.mirror.prox_map(
            set,
            state.base.stacked(),
            &scale(&state.prev_estimate, -tau),
        )?)?;

        let bundle = match self.options.estimator {
            EstimatorMode::Mpg => {
                let spec = PerturbationSpec::new(delta_k, t_k);
                mpg_estimate(&self.game, &lead, &spec, &mut state.seeds.iteration(k))?
            }
            EstimatorMode::ExactGradient => {
                let estimate = self.game.pseudo_gradient(&lead)?;
                let observed = (0..self.game.num_players())
                    .map(|i| self.game.evaluate_objective(i, &lead).map(|v| vec![v]))
                    .collect::<Result<_>>()?;
                EstimateBundle {
                    estimate,
                    actions: vec![lead.clone()],
                    observed,
                }
            }
        };

        let residual = if self.game.has_pseudo_gradient() {
            Some(self.game.cp_residual(&self.mirror, &state.base, tau)?)
        } else {
            None
        };

        let base = self.game.action(self.mirror.prox_map(
            set,
            state.base.stacked(),
            &scale(&bundle.estimate, -tau),
        )?)?;
        if !self.game.contains(&base) || !self.mirror.in_domain(base.stacked()) {
            return Err(Error::Internal(format!(
                "base iterate {:?} left the feasible domain",
                base.stacked()
            )));
        }

        let play = &bundle.actions[0];
        let rel_distance = self
            .reference
            .as_ref()
            .map(|cp| distance(play.stacked(), cp.stacked()) / norm(cp.stacked()));
        let prev_norm = norm(state.last_play.stacked());
        let rel_step = (prev_norm > 0.0)
            .then(|| distance(play.stacked(), state.last_play.stacked()) / prev_norm);

        state.cumulative_queries += self.queries_for(t_k);
        state.last_play = play.clone();
        state.prev_estimate = bundle.estimate.clone();
        state.lead = lead;
        state.base = base;
        state.k = k;

        let record = RunRecord {
            k,
            delta_k,
            t_k,
            rel_distance,
            rel_step,
            residual,
            cumulative_queries: state.cumulative_queries,
        };
        Ok((record, bundle))
    }

    pub fn run(&self, x0: JointAction, seed: u64) -> Result<RunOutcome> {
        self.run_observed(x0, seed, |_, _| {})
    }

    /// Runs to the horizon (or the query cap), handing every record and
    /// bundle to `observer`.
    pub fn run_observed<F>(&self, x0: JointAction, seed: u64, mut observer: F) -> Result<RunOutcome>
    where
        F: FnMut(&RunRecord, &EstimateBundle),
    {
        let mut state = self.initial_state(x0, seed)?;
        let mut records = Vec::with_capacity(self.schedules.horizon);
        let mut truncated = false;
        while state.k < self.schedules.horizon {
            let next = state.k + 1;
            if let Some(cap) = self.options.max_total_queries {
                let need = self.queries_for(self.schedules.samples.at(next));
                if state.cumulative_queries + need > cap {
                    truncated = true;
                    break;
                }
            }
            let (record, bundle) = self.step(&mut state)?;
            observer(&record, &bundle);
            records.push(record);
        }
        Ok(RunOutcome {
            records,
            final_state: state,
            truncated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::FeasibleSet;

    fn reference_delta() -> DeltaSchedule {
        DeltaSchedule::Power {
            c: 0.1,
            a: 20.0,
            e: 1.1,
        }
    }

    fn reference_samples() -> SampleSchedule {
        SampleSchedule::Power {
            c: 1e-3,
            e: 1.1,
            floor: 20.0,
        }
    }

    fn constant_game() -> GameInstance {
        GameInstance::new(
            "constant",
            vec![FeasibleSet::transformed_simplex(2).unwrap(); 2],
            |_, _| 1.0,
        )
        .unwrap()
        .with_lipschitz(1.0)
        .unwrap()
    }

    fn entropy2() -> MirrorStructure {
        MirrorStructure::product(vec![
            (MirrorStructure::negative_entropy(), 2),
            (MirrorStructure::negative_entropy(), 2),
        ])
        .unwrap()
    }

    #[test]
    fn step_size_guard_examples() {
        assert!(check_step_size(0.1, 1.0, 1.0).unwrap());
        assert!(!check_step_size(0.3, 1.0, 1.0).unwrap());
        let boundary = 1.0 / 12f64.sqrt();
        assert!(check_step_size(boundary, 1.0, 1.0).unwrap());
        assert!(matches!(check_step_size(0.0, 1.0, 1.0), Err(Error::Precondition(_))));
        assert!(matches!(check_step_size(0.1, -1.0, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn reference_schedule_values() {
        let d1 = reference_delta().at(1);
        assert!((d1 - 0.1 * 21f64.powf(-1.1)).abs() < 1e-16);
        assert_eq!(reference_samples().at(1), 21);
        assert!(reference_delta().is_summable());
        assert!(reference_samples().is_summable());
        assert!(!SampleSchedule::Constant(2).is_summable());
        assert!(!DeltaSchedule::Power { c: 0.1, a: 20.0, e: 1.0 }.is_summable());
        assert_eq!(SampleSchedule::Decaying { c: 0.1, a: 50.0, e: 1.1 }.at(5), 1);
    }

    #[test]
    fn schedule_violations_reported_together() {
        let game = constant_game();
        let s = Schedules {
            tau: -1.0,
            delta: DeltaSchedule::Power { c: 5.0, a: 0.0, e: 1.0 },
            samples: SampleSchedule::Constant(2),
            horizon: 10,
        };
        let v = s.violations(&game, false);
        assert!(v.len() >= 4, "{v:?}");
        let v = s.violations(&game, true);
        assert!(v.iter().all(|m| !m.contains("1/T_k")));
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let game = constant_game();
        let s = Schedules {
            tau: 0.1,
            delta: reference_delta(),
            samples: reference_samples(),
            horizon: 0,
        };
        let solver = Solver::new(game.clone(), entropy2(), s, SolverOptions::default()).unwrap();
        let x0 = game.action(vec![0.5, 0.2, 0.1, 0.3]).unwrap();
        let out = solver.run(x0.clone(), 1).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.final_state.base, x0);
        assert!(!out.truncated);
    }

    #[test]
    fn constant_objectives_fix_the_state() {
        let game = constant_game();
        let s = Schedules {
            tau: 0.1,
            delta: reference_delta(),
            samples: reference_samples(),
            horizon: 25,
        };
        let solver = Solver::new(game.clone(), entropy2(), s, SolverOptions::default()).unwrap();
        let x0 = game.action(vec![0.5, 0.2, 0.1, 0.3]).unwrap();
        let out = solver.run(x0.clone(), 3).unwrap();
        assert_eq!(out.records.len(), 25);
        assert_eq!(out.final_state.base, x0);
        assert_eq!(out.final_state.lead, x0);
        let mut q = 0;
        for r in &out.records {
            q += r.t_k as u64 + 1;
            assert_eq!(r.cumulative_queries, q);
            assert!(r.residual.is_none() && r.rel_distance.is_none());
        }
    }

    #[test]
    fn first_lead_equals_base() {
        let game = constant_game();
        let s = Schedules {
            tau: 0.1,
            delta: reference_delta(),
            samples: reference_samples(),
            horizon: 1,
        };
        let solver = Solver::new(game.clone(), entropy2(), s, SolverOptions::default()).unwrap();
        let x0 = game.action(vec![0.5, 0.2, 0.1, 0.3]).unwrap();
        let mut state = solver.initial_state(x0.clone(), 0).unwrap();
        solver.step(&mut state).unwrap();
        assert_eq!(state.lead, x0);
    }

    #[test]
    fn query_cap_truncates() {
        let game = constant_game();
        let s = Schedules {
            tau: 0.1,
            delta: reference_delta(),
            samples: reference_samples(),
            horizon: 100,
        };
        let opts = SolverOptions {
            max_total_queries: Some(100),
            ..SolverOptions::default()
        };
        let solver = Solver::new(game.clone(), entropy2(), s, opts).unwrap();
        let out = solver.run(game.ball_centers(), 0).unwrap();
        assert!(out.truncated);
        assert_eq!(out.records.len(), 4);
        assert!(out.final_state.cumulative_queries <= 100);
    }

    #[test]
    fn guard_refuses_and_override_accepts() {
        let game = constant_game().with_lipschitz(3f64.sqrt()).unwrap();
        let s = Schedules {
            tau: 0.5,
            delta: reference_delta(),
            samples: reference_samples(),
            horizon: 3,
        };
        let err = Solver::new(game.clone(), entropy2(), s, SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::StepGuard { .. }));
        let opts = SolverOptions {
            override_step_guard: true,
            ..SolverOptions::default()
        };
        let solver = Solver::new(game, entropy2(), s, opts).unwrap();
        assert!(solver.guard().overridden);
    }

    #[test]
    fn missing_lipschitz_without_gradient_is_config_error() {
        let game = GameInstance::new(
            "blind",
            vec![FeasibleSet::symmetric_box(1, 1.0).unwrap()],
            |_, x| x[0],
        )
        .unwrap();
        let s = Schedules {
            tau: 0.1,
            delta: DeltaSchedule::Power { c: 0.1, a: 1.0, e: 2.0 },
            samples: reference_samples(),
            horizon: 3,
        };
        let err = Solver::new(game, MirrorStructure::euclidean(1.0).unwrap(), s, SolverOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn lipschitz_of_linear_and_constant_maps() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let constant = GameInstance::new(
            "c",
            vec![FeasibleSet::symmetric_box(2, 1.0).unwrap()],
            |_, x| x[0] + x[1],
        )
        .unwrap()
        .with_pseudo_gradient(|_| vec![1.0, 1.0]);
        assert_eq!(estimate_lipschitz(&constant, 100, &mut rng).unwrap().value, 0.0);
        let scaled = GameInstance::new(
            "s",
            vec![FeasibleSet::symmetric_box(2, 1.0).unwrap()],
            |_, x| 1.5 * (x[0] * x[0] + x[1] * x[1]),
        )
        .unwrap()
        .with_pseudo_gradient(|x| x.iter().map(|v| 3.0 * v).collect());
        let est = estimate_lipschitz(&scaled, 100, &mut rng).unwrap();
        assert!((est.value - 3.0).abs() < 1e-12);
    }
}
