//! Distance-generating functions, Bregman divergences, prox-mappings and
//! mirror maps.
//!
//! Two block geometries are supported in closed form:
//!
//! * Euclidean, `psi(x) = (mu/2)|x|^2` on any feasible set. The prox-mapping
//!   is the Euclidean projection of `x + y/mu`.
//! * Negative entropy on the transformed simplex `{y >= 0, sum y <= 1}`,
//!   `psi(y) = sum_j y_j ln y_j + s ln s` with `s = 1 - sum y`. In the
//!   lifted coordinates `x = (y, s)` this is the usual negative entropy and
//!   the prox-mapping is the multiplicative-weights update.
//!
//! A product structure applies one block geometry per player.

use crate::error::{Error, Result};
use crate::game::check_finite;
use crate::linalg::{dot, sub};
use crate::sets::FeasibleSet;

/// Lower clamp applied to lifted simplex coordinates after every entropy
/// prox or mirror evaluation.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Strong-convexity modulus of the negative entropy in transformed simplex
/// coordinates with respect to the Euclidean norm.
///
/// For `v = J dy` (zero-sum, `J` the lift Jacobian):
/// `v' diag(1/x) v >= |v|_1^2 >= 2 |v|_2^2 >= 2 |dy|_2^2`.
pub const ENTROPY_MODULUS: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MirrorKind {
    Euclidean,
    NegativeEntropy,
    Product,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MirrorStructure {
    Euclidean { modulus: f64 },
    NegativeEntropy,
    Product {
        blocks: Vec<MirrorStructure>,
        dims: Vec<usize>,
    },
}

impl MirrorStructure {
    pub fn euclidean(modulus: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus > 0.0) {
            return Err(Error::Precondition(format!(
                "Euclidean modulus must be positive, got {modulus}"
            )));
        }
        Ok(MirrorStructure::Euclidean { modulus })
    }

    pub fn negative_entropy() -> Self {
        MirrorStructure::NegativeEntropy
    }

    /// Product of per-player structures; each block is paired with its
    /// dimension.
    pub fn product(blocks: Vec<(MirrorStructure, usize)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structural("product mirror needs at least one block".into()));
        }
        if blocks.iter().any(|(m, d)| matches!(m, MirrorStructure::Product { .. }) || *d == 0) {
            return Err(Error::Structural(
                "product mirror blocks must be non-product with dim >= 1".into(),
            ));
        }
        let (blocks, dims) = blocks.into_iter().unzip();
        Ok(MirrorStructure::Product { blocks, dims })
    }

    /// The same block geometry for every player.
    pub fn broadcast(block: MirrorStructure, dims: &[usize]) -> Result<Self> {
        Self::product(dims.iter().map(|d| (block.clone(), *d)).collect())
    }

    /// A product structure over `dims`: products must match, a single block
    /// geometry is broadcast.
    pub fn aligned_to(&self, dims: &[usize]) -> Result<Self> {
        match self {
            MirrorStructure::Product { dims: own, .. } => {
                if own.as_slice() == dims {
                    Ok(self.clone())
                } else {
                    Err(Error::Structural(format!(
                        "mirror blocks {own:?} do not match game dims {dims:?}"
                    )))
                }
            }
            block => Self::broadcast(block.clone(), dims),
        }
    }

    pub fn kind(&self) -> MirrorKind {
        match self {
            MirrorStructure::Euclidean { .. } => MirrorKind::Euclidean,
            MirrorStructure::NegativeEntropy => MirrorKind::NegativeEntropy,
            MirrorStructure::Product { .. } => MirrorKind::Product,
        }
    }

    /// Strong-convexity modulus; the minimum over blocks for a product.
    pub fn modulus(&self) -> f64 {
        match self {
            MirrorStructure::Euclidean { modulus } => *modulus,
            MirrorStructure::NegativeEntropy => ENTROPY_MODULUS,
            MirrorStructure::Product { blocks, .. } => blocks
                .iter()
                .map(MirrorStructure::modulus)
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn split<'a>(&self, dims: &[usize], x: &'a [f64]) -> Result<Vec<&'a [f64]>> {
        let total: usize = dims.iter().sum();
        if total != x.len() {
            return Err(Error::Structural(format!(
                "point of length {} does not match product dims {:?}",
                x.len(),
                dims
            )));
        }
        let mut out = Vec::with_capacity(dims.len());
        let mut offset = 0;
        for d in dims {
            out.push(&x[offset..offset + d]);
            offset += d;
        }
        Ok(out)
    }

    /// Membership in the open domain of `psi`.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        match self {
            MirrorStructure::Euclidean { .. } => x.iter().all(|v| v.is_finite()),
            MirrorStructure::NegativeEntropy => {
                x.iter().all(|v| *v > 0.0) && 1.0 - x.iter().sum::<f64>() > 0.0
            }
            MirrorStructure::Product { blocks, dims } => match self.split(dims, x) {
                Ok(parts) => blocks.iter().zip(parts).all(|(b, p)| b.in_domain(p)),
                Err(_) => false,
            },
        }
    }

    /// `psi(x)`; the entropy accepts the closure of its domain (`0 ln 0 = 0`).
    pub fn dgf_value(&self, x: &[f64]) -> Result<f64> {
        check_finite("DGF argument", x)?;
        match self {
            MirrorStructure::Euclidean { modulus } => Ok(0.5 * modulus * dot(x, x)),
            MirrorStructure::NegativeEntropy => {
                let lifted = lift_closed(x)?;
                Ok(lifted.iter().map(|v| xlogx(*v)).sum())
            }
            MirrorStructure::Product { blocks, dims } => {
                let parts = self.split(dims, x)?;
                blocks.iter().zip(parts).map(|(b, p)| b.dgf_value(p)).sum()
            }
        }
    }

    /// `grad psi(x)`; the entropy requires a strictly interior point.
    pub fn dgf_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_finite("DGF argument", x)?;
        match self {
            MirrorStructure::Euclidean { modulus } => Ok(x.iter().map(|v| modulus * v).collect()),
            MirrorStructure::NegativeEntropy => {
                let lifted = lift_open(x)?;
                let ln_last = lifted[x.len()].ln();
                Ok(x.iter().map(|v| v.ln() - ln_last).collect())
            }
            MirrorStructure::Product { blocks, dims } => {
                let parts = self.split(dims, x)?;
                let mut out = Vec::with_capacity(x.len());
                for (b, p) in blocks.iter().zip(parts) {
                    out.extend(b.dgf_grad(p)?);
                }
                Ok(out)
            }
        }
    }

    /// `D(p, x) = psi(p) - psi(x) - <grad psi(x), p - x>`.
    pub fn bregman_divergence(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        if p.len() != x.len() {
            return Err(Error::Structural(format!(
                "Bregman arguments have lengths {} and {}",
                p.len(),
                x.len()
            )));
        }
        check_finite("Bregman argument p", p)?;
        check_finite("Bregman argument x", x)?;
        match self {
            MirrorStructure::Euclidean { modulus } => {
                let d = sub(p, x);
                Ok(0.5 * modulus * dot(&d, &d))
            }
            MirrorStructure::NegativeEntropy => {
                // Both lifted points sum to one, so D is the KL divergence.
                let lp = lift_closed(p)?;
                let lx = lift_open(x)?;
                let kl: f64 = lp
                    .iter()
                    .zip(&lx)
                    .map(|(a, b)| if *a > 0.0 { a * (a / b).ln() } else { 0.0 })
                    .sum();
                Ok(kl.max(0.0))
            }
            MirrorStructure::Product { blocks, dims } => {
                let ps = self.split(dims, p)?;
                let xs = self.split(dims, x)?;
                blocks
                    .iter()
                    .zip(ps.into_iter().zip(xs))
                    .map(|(b, (pp, xx))| b.bregman_divergence(pp, xx))
                    .sum()
            }
        }
    }

    /// `P_{x,X}(y) = argmin_{x' in X} <y, x - x'> + D(x', x)`.
    pub fn prox_map(&self, set: &FeasibleSet, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        if x.len() != set.dim() || y.len() != set.dim() {
            return Err(Error::Structural(format!(
                "prox arguments of lengths {} and {} for a set of dimension {}",
                x.len(),
                y.len(),
                set.dim()
            )));
        }
        check_finite("prox step", y)?;
        check_finite("prox anchor", x)?;
        match self {
            MirrorStructure::Euclidean { modulus } => {
                let target: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b / modulus).collect();
                set.project(&target)
            }
            MirrorStructure::NegativeEntropy => {
                require_simplex(set)?;
                let lifted = lift_open(x)?;
                if y.iter().all(|v| *v == 0.0) {
                    return Ok(x.to_vec());
                }
                let mut logits: Vec<f64> = lifted.iter().map(|v| v.ln()).collect();
                for (l, step) in logits.iter_mut().zip(y) {
                    *l += step;
                }
                Ok(normalized_exp_dropping_last(&logits))
            }
            MirrorStructure::Product { blocks, dims } => {
                let sets = product_blocks(set, dims)?;
                let xs = self.split(dims, x)?;
                let ys = self.split(dims, y)?;
                let mut out = Vec::with_capacity(x.len());
                for ((b, s), (xx, yy)) in blocks.iter().zip(sets).zip(xs.into_iter().zip(ys)) {
                    out.extend(b.prox_map(s, xx, yy)?);
                }
                Ok(out)
            }
        }
    }

    /// `grad psi*(z) = argmax_{x in X} <z, x> - psi(x)`.
    pub fn mirror_map(&self, set: &FeasibleSet, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != set.dim() {
            return Err(Error::Structural(format!(
                "mirror argument of length {} for a set of dimension {}",
                z.len(),
                set.dim()
            )));
        }
        check_finite("mirror argument", z)?;
        match self {
            MirrorStructure::Euclidean { modulus } => {
                let target: Vec<f64> = z.iter().map(|v| v / modulus).collect();
                set.project(&target)
            }
            MirrorStructure::NegativeEntropy => {
                require_simplex(set)?;
                let mut logits = z.to_vec();
                logits.push(0.0);
                Ok(normalized_exp_dropping_last(&logits))
            }
            MirrorStructure::Product { blocks, dims } => {
                let sets = product_blocks(set, dims)?;
                let zs = self.split(dims, z)?;
                let mut out = Vec::with_capacity(z.len());
                for ((b, s), zz) in blocks.iter().zip(sets).zip(zs) {
                    out.extend(b.mirror_map(s, zz)?);
                }
                Ok(out)
            }
        }
    }
}

fn require_simplex(set: &FeasibleSet) -> Result<()> {
    match set {
        FeasibleSet::TransformedSimplex { .. } => Ok(()),
        other => Err(Error::Unsupported(format!(
            "negative entropy needs a transformed simplex, got a {:?} set",
            other.kind()
        ))),
    }
}

fn product_blocks<'a>(set: &'a FeasibleSet, dims: &[usize]) -> Result<&'a [FeasibleSet]> {
    match set {
        FeasibleSet::Product(blocks)
            if blocks.len() == dims.len()
                && blocks.iter().zip(dims).all(|(b, d)| b.dim() == *d) =>
        {
            Ok(blocks)
        }
        _ => Err(Error::Structural(format!(
            "product mirror with dims {dims:?} needs a product set with matching blocks"
        ))),
    }
}

fn xlogx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// `(y, 1 - sum y)`, accepting the closed simplex.
fn lift_closed(y: &[f64]) -> Result<Vec<f64>> {
    let slack = 1.0 - y.iter().sum::<f64>();
    if y.iter().any(|v| *v < 0.0) || slack < -crate::sets::FEASIBILITY_TOL {
        return Err(Error::Domain(format!(
            "{y:?} lies outside the closed transformed simplex"
        )));
    }
    let mut lifted = y.to_vec();
    lifted.push(slack.max(0.0));
    Ok(lifted)
}

/// `(y, 1 - sum y)`, requiring every lifted coordinate to be positive.
fn lift_open(y: &[f64]) -> Result<Vec<f64>> {
    let slack = 1.0 - y.iter().sum::<f64>();
    if y.iter().any(|v| *v <= 0.0) || slack <= 0.0 {
        return Err(Error::Domain(format!(
            "{y:?} lies on the boundary of the entropy domain"
        )));
    }
    let mut lifted = y.to_vec();
    lifted.push(slack);
    Ok(lifted)
}

/// Softmax of `logits` clamped below at [`ENTROPY_FLOOR`] and renormalized;
/// returns all but the last coordinate.
fn normalized_exp_dropping_last(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    if w.iter().any(|v| *v < ENTROPY_FLOOR) {
        for v in &mut w {
            *v = v.max(ENTROPY_FLOOR);
        }
        let total: f64 = w.iter().sum();
        for v in &mut w {
            *v /= total;
        }
    }
    w.pop();
    w
}
