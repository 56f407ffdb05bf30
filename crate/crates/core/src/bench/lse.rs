//! Least-squares regression recast as a two-player zero-sum bilinear game.
//!
//! With `Z~ = [z~_1, ..., z~_M]`, `z~_j = [1; z_j]`, and
//! `J(w, lambda) = lambda'(Z~' w - y) - |lambda|^2 / 2`, player 1 minimizes
//! `J` over `w in [-w_bar, w_bar]^(N+1)` and player 2 minimizes `-J` over
//! `lambda in [-lambda_bar, lambda_bar]^M`. The unique critical point is the
//! least-squares fit `w*` with `lambda* = Z~' w* - y`.

use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{GameInstance, JointAction};
use crate::sets::FeasibleSet;

const FILE_MAGIC: &str = "lse-instance 1";

/// Generation parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LseParams {
    pub n_features: usize,
    pub m_samples: usize,
    pub w_bound: f64,
    pub lambda_bound: f64,
    pub noise_halfwidth: f64,
    pub seed: u64,
}

impl LseParams {
    /// `N = 5`, `M = 20`, `w_bar = lambda_bar = 5`, noise on `[-0.6, 0.6]`.
    pub fn benchmark(seed: u64) -> Self {
        LseParams {
            n_features: 5,
            m_samples: 20,
            w_bound: 5.0,
            lambda_bound: 5.0,
            noise_halfwidth: 0.6,
            seed,
        }
    }
}

/// Data of one regression instance.
#[derive(Clone, Debug, PartialEq)]
pub struct LseGame {
    /// `(N+1) x M`; column `j` is `[1; z_j]`.
    pub features: DMatrix<f64>,
    pub targets: DVector<f64>,
    pub w_bound: f64,
    pub lambda_bound: f64,
    pub noise_halfwidth: f64,
    /// Generating parameters `w~_0`, reporting only.
    pub true_params: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

/// A constructed instance: data, game and analytic critical point.
#[derive(Clone, Debug)]
pub struct LseBenchmark {
    pub data: LseGame,
    pub game: GameInstance,
    pub cp: JointAction,
}

/// Solves the normal equations `Z~ Z~' w = Z~ y`.
pub fn lse_analytic_solution(features: &DMatrix<f64>, targets: &DVector<f64>) -> Result<Vec<f64>> {
    if features.ncols() != targets.len() {
        return Err(Error::Structural(format!(
            "features have {} columns but there are {} targets",
            features.ncols(),
            targets.len()
        )));
    }
    let gram = features * features.transpose();
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::Precondition(format!(
            "normal equations are singular (eigenvalues in [{min:e}, {max:e}])"
        )));
    }
    let rhs = features * targets;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Precondition("normal equations are not positive definite".into()))?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

impl LseGame {
    /// Draws `z_j ~ U[-1,1]^N`, `w~_0 ~ U[-2,2]^(N+1)` and
    /// `y_j = w~_0' z~_j + xi_j` with `xi_j ~ U[-h, h]`.
    pub fn generate(params: &LseParams) -> Result<Self> {
        if params.n_features == 0 || params.m_samples == 0 {
            return Err(Error::Precondition("feature and sample counts must be >= 1".into()));
        }
        if !(params.noise_halfwidth >= 0.0 && params.noise_halfwidth.is_finite()) {
            return Err(Error::Precondition(format!(
                "noise half-width must be nonnegative, got {}",
                params.noise_halfwidth
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let n1 = params.n_features + 1;
        let m = params.m_samples;
        let truth: Vec<f64> = (0..n1).map(|_| rng.random_range(-2.0..=2.0)).collect();
        let mut features = DMatrix::zeros(n1, m);
        let mut targets = DVector::zeros(m);
        for j in 0..m {
            features[(0, j)] = 1.0;
            for r in 1..n1 {
                features[(r, j)] = rng.random_range(-1.0..=1.0);
            }
            let noise = if params.noise_halfwidth > 0.0 {
                rng.random_range(-params.noise_halfwidth..=params.noise_halfwidth)
            } else {
                0.0
            };
            targets[j] = (0..n1).map(|r| truth[r] * features[(r, j)]).sum::<f64>() + noise;
        }
        let data = LseGame {
            features,
            targets,
            w_bound: params.w_bound,
            lambda_bound: params.lambda_bound,
            noise_halfwidth: params.noise_halfwidth,
            true_params: Some(truth),
            seed: Some(params.seed),
        };
        data.validate_bounds()?;
        Ok(data)
    }

    /// Builds an instance from raw samples `z_j` (rows) and `y_j`.
    pub fn from_samples(
        samples: &[Vec<f64>],
        targets: &[f64],
        w_bound: f64,
        lambda_bound: f64,
    ) -> Result<Self> {
        if samples.is_empty() || samples.len() != targets.len() {
            return Err(Error::Structural(format!(
                "{} samples but {} targets",
                samples.len(),
                targets.len()
            )));
        }
        let n = samples[0].len();
        if n == 0 || samples.iter().any(|z| z.len() != n) {
            return Err(Error::Structural("samples must share a nonzero feature count".into()));
        }
        let m = samples.len();
        let features = DMatrix::from_fn(n + 1, m, |r, j| if r == 0 { 1.0 } else { samples[j][r - 1] });
        let data = LseGame {
            features,
            targets: DVector::from_column_slice(targets),
            w_bound,
            lambda_bound,
            noise_halfwidth: 0.0,
            true_params: None,
            seed: None,
        };
        data.validate_bounds()?;
        Ok(data)
    }

    fn validate_bounds(&self) -> Result<()> {
        for (name, v) in [("w_bound", self.w_bound), ("lambda_bound", self.lambda_bound)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows() - 1
    }

    pub fn m_samples(&self) -> usize {
        self.features.ncols()
    }

    /// `Z~' w - y`.
    pub fn residuals(&self, w: &[f64]) -> DVector<f64> {
        self.features.transpose() * DVector::from_column_slice(w) - &self.targets
    }

    /// `J(w, lambda)`.
    pub fn saddle_value(&self, w: &[f64], lambda: &[f64]) -> f64 {
        let r = self.residuals(w);
        let l = DVector::from_column_slice(lambda);
        l.dot(&r) - 0.5 * l.norm_squared()
    }

    /// The analytic critical point `(w*, Z~' w* - y)`; fails when it does not
    /// lie strictly inside the boxes.
    pub fn critical_point(&self) -> Result<Vec<f64>> {
        let w = lse_analytic_solution(&self.features, &self.targets)?;
        let lambda = self.residuals(&w);
        let w_max = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let l_max = lambda.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if w_max >= self.w_bound || l_max >= self.lambda_bound {
            return Err(Error::Precondition(format!(
                "analytic critical point is not strictly inside the boxes \
                 (max |w*| = {w_max}, w_bound = {}; max |lambda*| = {l_max}, lambda_bound = {}); \
                 enlarge the bounds",
                self.w_bound, self.lambda_bound
            )));
        }
        let mut cp = w;
        cp.extend(lambda.iter());
        Ok(cp)
    }

    /// Spectral norm of `[[0, Z~], [-Z~', I]]`, the Lipschitz constant of `F`.
    pub fn lipschitz(&self) -> f64 {
        let n1 = self.features.nrows();
        let m = self.features.ncols();
        let mut op = DMatrix::zeros(n1 + m, n1 + m);
        op.view_mut((0, n1), (n1, m)).copy_from(&self.features);
        op.view_mut((n1, 0), (m, n1)).copy_from(&(-self.features.transpose()));
        for j in 0..m {
            op[(n1 + j, n1 + j)] = 1.0;
        }
        op.singular_values().max()
    }

    /// The game over `[-w_bar, w_bar]^(N+1) x [-lambda_bar, lambda_bar]^M`.
    pub fn instance(&self) -> Result<LseBenchmark> {
        let cp_values = self.critical_point()?;
        let n1 = self.features.nrows();
        let m = self.features.ncols();
        let sets = vec![
            FeasibleSet::symmetric_box(n1, self.w_bound)?,
            FeasibleSet::symmetric_box(m, self.lambda_bound)?,
        ];
        // Row-major copy of Z~ for the hot objective loop.
        let z: Arc<[f64]> = (0..n1)
            .flat_map(|r| (0..m).map(move |j| (r, j)))
            .map(|(r, j)| self.features[(r, j)])
            .collect();
        let y: Arc<[f64]> = self.targets.iter().copied().collect();
        let (zo, yo) = (z.clone(), y.clone());
        let objective = move |i: usize, x: &[f64]| {
            let (w, lambda) = x.split_at(n1);
            let mut value = 0.0;
            for j in 0..m {
                let mut r = -yo[j];
                for (k, wk) in w.iter().enumerate() {
                    r += zo[k * m + j] * wk;
                }
                value += lambda[j] * (r - 0.5 * lambda[j]);
            }
            if i == 0 {
                value
            } else {
                -value
            }
        };
        let pgrad = move |x: &[f64]| {
            let (w, lambda) = x.split_at(n1);
            let mut g = vec![0.0; n1 + m];
            for k in 0..n1 {
                g[k] = (0..m).map(|j| z[k * m + j] * lambda[j]).sum();
            }
            for j in 0..m {
                let r: f64 = (0..n1).map(|k| z[k * m + j] * w[k]).sum::<f64>() - y[j];
                g[n1 + j] = lambda[j] - r;
            }
            g
        };
        let dims = [n1, m];
        let cp = JointAction::from_stacked(cp_values, &dims)?;
        let game = GameInstance::new("lse", sets, objective)?
            .with_pseudo_gradient(pgrad)
            .with_reference_cp(cp.clone())?
            .with_lipschitz(self.lipschitz())?;
        let cp = game.action(cp.into_stacked())?;
        Ok(LseBenchmark {
            data: self.clone(),
            game,
            cp,
        })
    }

    /// Plain-text instance file; floats use shortest round-trip notation so
    /// export, import and re-export are byte-identical.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FILE_MAGIC}");
        let _ = writeln!(s, "n_features {}", self.n_features());
        let _ = writeln!(s, "m_samples {}", self.m_samples());
        let _ = writeln!(s, "w_bound {:e}", self.w_bound);
        let _ = writeln!(s, "lambda_bound {:e}", self.lambda_bound);
        let _ = writeln!(s, "noise_halfwidth {:e}", self.noise_halfwidth);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "seed {seed}");
            }
            None => s.push_str("seed none\n"),
        }
        match &self.true_params {
            Some(p) => {
                let _ = writeln!(s, "true_params {}", join_floats(p.iter().copied()));
            }
            None => s.push_str("true_params none\n"),
        }
        s.push_str("features\n");
        for r in 0..self.features.nrows() {
            let _ = writeln!(s, "{}", join_floats(self.features.row(r).iter().copied()));
        }
        s.push_str("targets\n");
        let _ = writeln!(s, "{}", join_floats(self.targets.iter().copied()));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Structural(format!("instance file ends before {what}")))
        };
        if next("magic")? != FILE_MAGIC {
            return Err(Error::Structural(format!("instance file must start with '{FILE_MAGIC}'")));
        }
        let n: usize = parse_num(field(next("n_features")?, "n_features")?)?;
        let m: usize = parse_num(field(next("m_samples")?, "m_samples")?)?;
        let w_bound: f64 = parse_num(field(next("w_bound")?, "w_bound")?)?;
        let lambda_bound: f64 = parse_num(field(next("lambda_bound")?, "lambda_bound")?)?;
        let noise_halfwidth: f64 = parse_num(field(next("noise_halfwidth")?, "noise_halfwidth")?)?;
        let seed = match field(next("seed")?, "seed")? {
            "none" => None,
            v => Some(parse_num(v)?),
        };
        let true_params = match field(next("true_params")?, "true_params")? {
            "none" => None,
            v => Some(parse_row(v, n + 1)?),
        };
        if next("features")? != "features" {
            return Err(Error::Structural("expected 'features' section".into()));
        }
        let mut features = DMatrix::zeros(n + 1, m);
        for r in 0..=n {
            let row = parse_row(next("feature rows")?, m)?;
            for (j, v) in row.into_iter().enumerate() {
                features[(r, j)] = v;
            }
        }
        if next("targets")? != "targets" {
            return Err(Error::Structural("expected 'targets' section".into()));
        }
        let targets = DVector::from_vec(parse_row(next("target row")?, m)?);
        if lines.next().is_some() {
            return Err(Error::Structural("trailing content after targets".into()));
        }
        let data = LseGame {
            features,
            targets,
            w_bound,
            lambda_bound,
            noise_halfwidth,
            true_params,
            seed,
        };
        data.validate_bounds()?;
        Ok(data)
    }
}

fn join_floats(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" ")
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .ok_or_else(|| Error::Structural(format!("expected '{key} <value>', got '{line}'")))
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Structural(format!("cannot parse number '{v}'")))
}

fn parse_row(line: &str, expected: usize) -> Result<Vec<f64>> {
    let row: Vec<f64> = line
        .split_whitespace()
        .map(parse_num)
        .collect::<Result<_>>()?;
    if row.len() != expected {
        return Err(Error::Structural(format!(
            "expected {expected} values on a row, found {}",
            row.len()
        )));
    }
    Ok(row)
}

/// Generates an instance and returns it with its game and critical point.
pub fn make_lse(params: &LseParams) -> Result<LseBenchmark> {
    LseGame::generate(params)?.instance()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> LseGame {
        LseGame::from_samples(&[vec![-0.5], vec![0.5]], &[0.0, 2.0], 5.0, 5.0).unwrap()
    }

    #[test]
    fn exact_recovery() {
        let data = noiseless();
        let w = lse_analytic_solution(&data.features, &data.targets).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-10 && (w[1] - 2.0).abs() < 1e-10);
        let cp = data.critical_point().unwrap();
        assert!(cp[2].abs() < 1e-10 && cp[3].abs() < 1e-10);
    }

    #[test]
    fn singular_system_rejected() {
        let data = LseGame::from_samples(&[vec![0.3], vec![0.3]], &[1.0, 2.0], 5.0, 5.0).unwrap();
        assert!(matches!(data.critical_point(), Err(Error::Precondition(_))));
    }

    #[test]
    fn small_boxes_rejected() {
        let data = LseGame::from_samples(&[vec![-0.5], vec![0.5]], &[0.0, 2.0], 1.5, 5.0).unwrap();
        let err = data.instance().unwrap_err();
        assert!(err.to_string().contains("enlarge"));
    }

    #[test]
    fn benchmark_instance_builds() {
        let b = make_lse(&LseParams::benchmark(1)).unwrap();
        assert_eq!(b.game.dims(), &[6, 20]);
        assert!(b.game.contains(&b.cp));
        assert!(b.data.lipschitz() > 1.0);
        let cp = b.game.reference_cp().unwrap();
        assert_eq!(cp, &b.cp);
    }

    #[test]
    fn objective_zero_multiplier() {
        let b = make_lse(&LseParams::benchmark(2)).unwrap();
        let mut x = vec![0.0; 26];
        x[0] = 1.3;
        x[3] = -0.7;
        let x = b.game.action(x).unwrap();
        assert_eq!(b.game.evaluate_objective(0, &x).unwrap(), 0.0);
        assert_eq!(b.game.evaluate_objective(1, &x).unwrap(), 0.0);
    }

    #[test]
    fn text_round_trip_is_byte_exact() {
        let data = LseGame::generate(&LseParams::benchmark(3)).unwrap();
        let text = data.to_text();
        let back = LseGame::from_text(&text).unwrap();
        assert_eq!(back, data);
        assert_eq!(back.to_text(), text);
        let plain = noiseless();
        assert_eq!(LseGame::from_text(&plain.to_text()).unwrap(), plain);
    }

    #[test]
    fn malformed_files_rejected() {
        assert!(LseGame::from_text("").is_err());
        assert!(LseGame::from_text("lse-instance 2\n").is_err());
        let text = noiseless().to_text();
        let truncated: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        assert!(LseGame::from_text(&truncated).is_err());
        let extra = format!("{text}1 2\n");
        assert!(LseGame::from_text(&extra).is_err());
    }
}
