//! Rock-paper-scissors played in transformed simplex coordinates.
//!
//! Each player's mixed strategy `x in R^3` is parameterized by `y in R^2`
//! through `phi(y) = (y1, y2, 1 - y1 - y2)`, so the feasible set
//! `{y >= 0, y1 + y2 <= 1}` has non-empty interior.

use crate::error::Result;
use crate::game::{GameInstance, JointAction};
use crate::sets::FeasibleSet;

/// Payoff matrix of player a; player b uses its negation.
pub const PAYOFF_A: [[f64; 3]; 3] = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];

/// Exact Lipschitz constant of the transformed pseudo-gradient.
///
/// In `y` coordinates `F` is linear with a skew matrix whose singular
/// values are all 3.
pub const RPS_LIPSCHITZ: f64 = 3.0;

/// `phi(y) = (y1, y2, 1 - y1 - y2)`.
pub fn phi(y: &[f64]) -> [f64; 3] {
    [y[0], y[1], 1.0 - y[0] - y[1]]
}

/// Drops the last coordinate.
pub fn phi_inverse(x: &[f64]) -> [f64; 2] {
    [x[0], x[1]]
}

/// Lifts a gradient in `y` coordinates to the zero-sum gradient in `x`
/// coordinates whose chain-rule image is `g_tilde`.
pub fn rps_pullback(g_tilde: &[f64]) -> [f64; 3] {
    let (a, b) = (g_tilde[0], g_tilde[1]);
    [
        2.0 / 3.0 * a - 1.0 / 3.0 * b,
        -1.0 / 3.0 * a + 2.0 / 3.0 * b,
        -1.0 / 3.0 * a - 1.0 / 3.0 * b,
    ]
}

/// Chain rule `J^T g` for the lift `phi`.
pub fn rps_pushforward(g: &[f64; 3]) -> [f64; 2] {
    [g[0] - g[2], g[1] - g[2]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RpsGame {
    pub payoff_a: [[f64; 3]; 3],
    pub payoff_b: [[f64; 3]; 3],
}

impl Default for RpsGame {
    fn default() -> Self {
        let mut payoff_b = PAYOFF_A;
        for row in &mut payoff_b {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        RpsGame {
            payoff_a: PAYOFF_A,
            payoff_b,
        }
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

fn mat_t_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|i| m[i][j] * v[i]).sum();
    }
    out
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl RpsGame {
    /// `J^a = -(x^a)' A^a x^b`.
    pub fn cost_a(&self, xa: &[f64; 3], xb: &[f64; 3]) -> f64 {
        -dot3(xa, &mat_vec(&self.payoff_a, xb))
    }

    /// `J^b = -(x^a)' A^b x^b`.
    pub fn cost_b(&self, xa: &[f64; 3], xb: &[f64; 3]) -> f64 {
        -dot3(xa, &mat_vec(&self.payoff_b, xb))
    }

    /// Pseudo-gradient in the original simplex coordinates, `R^6`.
    pub fn raw_pseudo_gradient(&self, xa: &[f64; 3], xb: &[f64; 3]) -> [f64; 6] {
        let ga = mat_vec(&self.payoff_a, xb);
        let gb = mat_t_vec(&self.payoff_b, xa);
        [-ga[0], -ga[1], -ga[2], -gb[0], -gb[1], -gb[2]]
    }

    /// Pseudo-gradient in transformed coordinates, `R^4`.
    pub fn transformed_pseudo_gradient(&self, y: &[f64]) -> Vec<f64> {
        let raw = self.raw_pseudo_gradient(&phi(&y[0..2]), &phi(&y[2..4]));
        let ga = rps_pushforward(&[raw[0], raw[1], raw[2]]);
        let gb = rps_pushforward(&[raw[3], raw[4], raw[5]]);
        vec![ga[0], ga[1], gb[0], gb[1]]
    }
}

/// The transformed RPS game with its unique critical point registered.
pub fn make_rps() -> GameInstance {
    let rps = RpsGame::default();
    let grad = rps.clone();
    let set = FeasibleSet::TransformedSimplex { dim: 2 };
    let cp = JointAction::from_blocks(&[vec![1.0 / 3.0; 2], vec![1.0 / 3.0; 2]]);
    GameInstance::new("rps", vec![set.clone(), set], move |i, y| {
        let xa = phi(&y[0..2]);
        let xb = phi(&y[2..4]);
        if i == 0 {
            rps.cost_a(&xa, &xb)
        } else {
            rps.cost_b(&xa, &xb)
        }
    })
    .and_then(|g| g.with_pseudo_gradient(move |y| grad.transformed_pseudo_gradient(y)).with_reference_cp(cp))
    .and_then(|g| g.with_lipschitz(RPS_LIPSCHITZ))
    .expect("RPS construction is infallible")
}

/// RPS in the original coordinates with each player on the box `[0,1]^3`.
///
/// Only a diagnostic: the payoffs are the bilinear forms extended off the
/// simplex, so the pseudo-gradient is the untransformed linear operator.
pub fn make_rps_untransformed() -> Result<GameInstance> {
    let rps = RpsGame::default();
    let grad = rps.clone();
    let unit = FeasibleSet::new_box(vec![0.0; 3], vec![1.0; 3])?;
    let game = GameInstance::new("rps-untransformed", vec![unit.clone(), unit], move |i, x| {
        let xa = [x[0], x[1], x[2]];
        let xb = [x[3], x[4], x[5]];
        if i == 0 {
            rps.cost_a(&xa, &xb)
        } else {
            rps.cost_b(&xa, &xb)
        }
    })?
    .with_pseudo_gradient(move |x| {
        grad.raw_pseudo_gradient(&[x[0], x[1], x[2]], &[x[3], x[4], x[5]])
            .to_vec()
    });
    Ok(game)
}
