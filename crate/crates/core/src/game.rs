//! Multi-player continuous games over product feasible sets.
//!
//! Player `i` picks `x^i` in its own set `X^i` and minimizes `J^i(x^i; x^-i)`.
//! The pseudo-gradient stacks every player's partial gradient of its own
//! objective, and the residual `eps(x) = |x - P_x(-tau F(x))|^2` vanishes
//! exactly at critical points.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, scale};
use crate::mirror::MirrorStructure;
use crate::sets::FeasibleSet;

/// `(player, stacked joint action) -> J^player`.
pub type ObjectiveFn = dyn Fn(usize, &[f64]) -> f64 + Send + Sync;
/// `stacked joint action -> F(x)`.
pub type PseudoGradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A joint action `x = [x^1; ...; x^N]` stored stacked, with block offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct JointAction {
    values: Vec<f64>,
    offsets: Arc<[usize]>,
}

impl JointAction {
    pub fn from_blocks(blocks: &[Vec<f64>]) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        let mut values = Vec::new();
        for b in blocks {
            values.extend_from_slice(b);
            offsets.push(values.len());
        }
        JointAction {
            values,
            offsets: offsets.into(),
        }
    }

    pub fn from_stacked(values: Vec<f64>, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if total != values.len() {
            return Err(Error::Structural(format!(
                "stacked action has length {}, dims sum to {total}",
                values.len()
            )));
        }
        Ok(JointAction {
            values,
            offsets: offsets_of(dims),
        })
    }

    pub(crate) fn with_offsets(values: Vec<f64>, offsets: Arc<[usize]>) -> Self {
        debug_assert_eq!(values.len(), *offsets.last().unwrap());
        JointAction { values, offsets }
    }

    pub fn num_players(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn block(&self, player: usize) -> &[f64] {
        &self.values[self.offsets[player]..self.offsets[player + 1]]
    }

    pub fn block_mut(&mut self, player: usize) -> &mut [f64] {
        &mut self.values[self.offsets[player]..self.offsets[player + 1]]
    }

    pub fn stacked(&self) -> &[f64] {
        &self.values
    }

    pub fn into_stacked(self) -> Vec<f64> {
        self.values
    }

    pub fn dims(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn offsets_of(dims: &[usize]) -> Arc<[usize]> {
    let mut offsets = Vec::with_capacity(dims.len() + 1);
    offsets.push(0);
    for d in dims {
        offsets.push(offsets.last().unwrap() + d);
    }
    offsets.into()
}

/// A game instance. Immutable once built; cheap to clone.
#[derive(Clone)]
pub struct GameInstance {
    name: String,
    dims: Vec<usize>,
    offsets: Arc<[usize]>,
    objective: Arc<ObjectiveFn>,
    analytic_pgrad: Option<Arc<PseudoGradientFn>>,
    sets: Vec<FeasibleSet>,
    product: FeasibleSet,
    reference_cp: Option<JointAction>,
    lipschitz: Option<f64>,
}

impl fmt::Debug for GameInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameInstance")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .field("sets", &self.sets)
            .field("has_analytic_pgrad", &self.analytic_pgrad.is_some())
            .field("reference_cp", &self.reference_cp)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl GameInstance {
    pub fn new<F>(name: impl Into<String>, sets: Vec<FeasibleSet>, objective: F) -> Result<Self>
    where
        F: Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    {
        if sets.is_empty() {
            return Err(Error::Structural("a game needs at least one player".into()));
        }
        if let Some(i) = sets.iter().position(|s| matches!(s, FeasibleSet::Product(_))) {
            return Err(Error::Structural(format!(
                "player {i}: per-player sets cannot be products"
            )));
        }
        let dims: Vec<usize> = sets.iter().map(FeasibleSet::dim).collect();
        if let Some(i) = dims.iter().position(|d| *d == 0) {
            return Err(Error::Structural(format!("player {i} has dimension 0")));
        }
        Ok(GameInstance {
            name: name.into(),
            offsets: offsets_of(&dims),
            dims,
            objective: Arc::new(objective),
            analytic_pgrad: None,
            product: FeasibleSet::Product(sets.clone()),
            sets,
            reference_cp: None,
            lipschitz: None,
        })
    }

    pub fn with_pseudo_gradient<G>(mut self, pgrad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.analytic_pgrad = Some(Arc::new(pgrad));
        self
    }

    /// Registers a known critical point, used for distance metrics.
    pub fn with_reference_cp(mut self, cp: JointAction) -> Result<Self> {
        self.check_shape(&cp)?;
        self.check_membership(&cp)?;
        self.reference_cp = Some(cp);
        Ok(self)
    }

    /// Registers a known Lipschitz constant of the pseudo-gradient.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::Precondition(format!(
                "Lipschitz constant must be positive and finite, got {lipschitz}"
            )));
        }
        self.lipschitz = Some(lipschitz);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension `n = sum n^i`.
    pub fn total_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn sets(&self) -> &[FeasibleSet] {
        &self.sets
    }

    pub fn set(&self, player: usize) -> &FeasibleSet {
        &self.sets[player]
    }

    /// The product set `X = X^1 x ... x X^N`.
    pub fn product_set(&self) -> &FeasibleSet {
        &self.product
    }

    pub fn reference_cp(&self) -> Option<&JointAction> {
        self.reference_cp.as_ref()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn has_pseudo_gradient(&self) -> bool {
        self.analytic_pgrad.is_some()
    }

    /// Wraps a stacked vector as a joint action with this game's blocks.
    pub fn action(&self, values: Vec<f64>) -> Result<JointAction> {
        if values.len() != self.total_dim() {
            return Err(Error::Structural(format!(
                "joint action has length {}, game dimension is {}",
                values.len(),
                self.total_dim()
            )));
        }
        Ok(JointAction::with_offsets(values, self.offsets.clone()))
    }

    pub fn action_from_blocks(&self, blocks: &[Vec<f64>]) -> Result<JointAction> {
        let x = JointAction::from_blocks(blocks);
        self.check_shape(&x)?;
        Ok(JointAction::with_offsets(x.into_stacked(), self.offsets.clone()))
    }

    /// Centers of the players' interior balls, stacked.
    pub fn ball_centers(&self) -> JointAction {
        let values = self
            .sets
            .iter()
            .flat_map(|s| s.interior_ball().center)
            .collect();
        JointAction::with_offsets(values, self.offsets.clone())
    }

    pub fn check_shape(&self, x: &JointAction) -> Result<()> {
        if x.dims() != self.dims {
            return Err(Error::Structural(format!(
                "joint action blocks {:?} do not match game dims {:?}",
                x.dims(),
                self.dims
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: &JointAction) -> bool {
        x.dims() == self.dims
            && self
                .sets
                .iter()
                .enumerate()
                .all(|(i, s)| s.contains(x.block(i)))
    }

    pub(crate) fn check_membership(&self, x: &JointAction) -> Result<()> {
        for (i, s) in self.sets.iter().enumerate() {
            if !s.contains(x.block(i)) {
                return Err(Error::Domain(format!(
                    "player {i} action {:?} lies outside its feasible set",
                    x.block(i)
                )));
            }
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players() {
            return Err(Error::Structural(format!(
                "player index {player} out of range for {} players",
                self.num_players()
            )));
        }
        Ok(())
    }

    /// `J^player(x)` for a feasible joint action.
    pub fn evaluate_objective(&self, player: usize, x: &JointAction) -> Result<f64> {
        self.check_player(player)?;
        self.check_shape(x)?;
        self.check_membership(x)?;
        Ok((self.objective)(player, x.stacked()))
    }

    /// Objective call without shape or membership checks.
    pub(crate) fn objective_unchecked(&self, player: usize, x: &[f64]) -> f64 {
        (self.objective)(player, x)
    }

    /// `F(x) = [grad_{x^i} J^i(x)]_i`.
    pub fn pseudo_gradient(&self, x: &JointAction) -> Result<Vec<f64>> {
        let pgrad = self.analytic_pgrad.as_ref().ok_or_else(|| {
            Error::Unsupported(format!("game '{}' has no analytic pseudo-gradient", self.name))
        })?;
        self.check_shape(x)?;
        self.check_membership(x)?;
        let g = pgrad(x.stacked());
        if g.len() != self.total_dim() {
            return Err(Error::Structural(format!(
                "pseudo-gradient returned length {}, expected {}",
                g.len(),
                self.total_dim()
            )));
        }
        Ok(g)
    }

    /// Central-difference approximation of `grad_{x^player} J^player(x)`.
    pub fn finite_diff_gradient(&self, player: usize, x: &JointAction, h: f64) -> Result<Vec<f64>> {
        self.check_player(player)?;
        self.check_shape(x)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Precondition(format!("step h must be positive, got {h}")));
        }
        let set = &self.sets[player];
        let mut probe = x.clone();
        let mut grad = Vec::with_capacity(self.dims[player]);
        for j in 0..self.dims[player] {
            let orig = x.block(player)[j];
            probe.block_mut(player)[j] = orig + h;
            if !set.contains(probe.block(player)) {
                return Err(Error::Domain(format!(
                    "player {player}: x + h e_{j} leaves the feasible set"
                )));
            }
            let plus = (self.objective)(player, probe.stacked());
            probe.block_mut(player)[j] = orig - h;
            if !set.contains(probe.block(player)) {
                return Err(Error::Domain(format!(
                    "player {player}: x - h e_{j} leaves the feasible set"
                )));
            }
            let minus = (self.objective)(player, probe.stacked());
            probe.block_mut(player)[j] = orig;
            grad.push((plus - minus) / (2.0 * h));
        }
        Ok(grad)
    }

    /// Critical-point residual `eps(x) = |x - P_{x,X}(-tau F(x))|^2`.
    pub fn cp_residual(&self, mirror: &MirrorStructure, x: &JointAction, tau: f64) -> Result<f64> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Precondition(format!("tau must be positive, got {tau}")));
        }
        let f = self.pseudo_gradient(x)?;
        let step = scale(&f, -tau);
        let mirror = mirror.aligned_to(&self.dims)?;
        let moved = mirror.prox_map(&self.product, x.stacked(), &step)?;
        let r: f64 = x
            .stacked()
            .iter()
            .zip(&moved)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        if !r.is_finite() {
            return Err(Error::Numeric("residual is not finite".into()));
        }
        Ok(r)
    }
}

pub(crate) fn check_finite(label: &str, v: &[f64]) -> Result<()> {
    if all_finite(v) {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{label} contains non-finite entries")))
    }
}
