//! Convex compact feasible sets with membership, Euclidean projection and a
//! designated interior ball used by the perturbation step.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::linalg::norm;

/// Absolute slack applied to every defining inequality in membership tests.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// A closed Euclidean ball `B(center, radius)` contained in a set.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// User-provided convex compact set.
pub trait ConvexSet: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn contains(&self, x: &[f64], tol: f64) -> bool;
    fn project(&self, x: &[f64]) -> Vec<f64>;
    fn interior_ball(&self) -> Ball;
    fn diameter(&self) -> f64;
    /// Draws a member point; used for probing and property checks.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Box,
    TransformedSimplex,
    Custom,
    Product,
}

/// Feasible set of one player, or the product of all players' sets.
#[derive(Clone, Debug)]
pub enum FeasibleSet {
    /// Axis-aligned box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{ y in R^dim : y >= 0, sum(y) <= 1 }`, the image of the probability
    /// simplex in `R^(dim+1)` after dropping the last coordinate.
    TransformedSimplex { dim: usize },
    Custom(Arc<dyn ConvexSet>),
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    /// The symmetric box `[-bound, bound]^dim`.
    pub fn symmetric_box(dim: usize, bound: f64) -> Result<Self> {
        Self::new_box(vec![-bound; dim], vec![bound; dim])
    }

    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Structural(format!(
                "box bounds must be non-empty and of equal length (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
                return Err(Error::Precondition(format!(
                    "box coordinate {j} needs finite bounds with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    pub fn transformed_simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structural("transformed simplex needs dim >= 1".into()));
        }
        Ok(FeasibleSet::TransformedSimplex { dim })
    }

    pub fn product(blocks: Vec<FeasibleSet>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Structural("product of zero sets".into()));
        }
        Ok(FeasibleSet::Product(blocks))
    }

    pub fn kind(&self) -> SetKind {
        match self {
            FeasibleSet::Box { .. } => SetKind::Box,
            FeasibleSet::TransformedSimplex { .. } => SetKind::TransformedSimplex,
            FeasibleSet::Custom(_) => SetKind::Custom,
            FeasibleSet::Product(_) => SetKind::Product,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::TransformedSimplex { dim } => *dim,
            FeasibleSet::Custom(set) => set.dim(),
            FeasibleSet::Product(blocks) => blocks.iter().map(FeasibleSet::dim).sum(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with_tol(x, FEASIBILITY_TOL)
    }

    pub fn contains_with_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| *v >= lo - tol && *v <= hi + tol),
            FeasibleSet::TransformedSimplex { .. } => {
                x.iter().all(|v| *v >= -tol) && x.iter().sum::<f64>() <= 1.0 + tol
            }
            FeasibleSet::Custom(set) => set.contains(x, tol),
            FeasibleSet::Product(blocks) => {
                let mut offset = 0;
                blocks.iter().all(|b| {
                    let d = b.dim();
                    let ok = b.contains_with_tol(&x[offset..offset + d], tol);
                    offset += d;
                    ok
                })
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Structural(format!(
                "projection input has length {}, set has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("cannot project a non-finite point".into()));
        }
        Ok(match self {
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                .collect(),
            FeasibleSet::TransformedSimplex { .. } => project_capped_simplex(x),
            FeasibleSet::Custom(set) => set.project(x),
            FeasibleSet::Product(blocks) => {
                let mut out = Vec::with_capacity(x.len());
                let mut offset = 0;
                for b in blocks {
                    let d = b.dim();
                    out.extend(b.project(&x[offset..offset + d])?);
                    offset += d;
                }
                out
            }
        })
    }

    /// The designated interior ball. Boxes use their midpoint and smallest
    /// half-width; the transformed simplex uses its inscribed ball; a
    /// product uses the concatenated centers and the smallest radius.
    pub fn interior_ball(&self) -> Ball {
        match self {
            FeasibleSet::Box { lower, upper } => Ball {
                center: lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
                radius: lower
                    .iter()
                    .zip(upper)
                    .map(|(l, u)| 0.5 * (u - l))
                    .fold(f64::INFINITY, f64::min),
            },
            FeasibleSet::TransformedSimplex { dim } => {
                // Inradius of the corner simplex conv{0, e_1, ..., e_d}.
                let c = 1.0 / (*dim as f64 + (*dim as f64).sqrt());
                Ball {
                    center: vec![c; *dim],
                    radius: c,
                }
            }
            FeasibleSet::Custom(set) => set.interior_ball(),
            FeasibleSet::Product(blocks) => {
                let balls: Vec<Ball> = blocks.iter().map(FeasibleSet::interior_ball).collect();
                Ball {
                    center: balls.iter().flat_map(|b| b.center.iter().copied()).collect(),
                    radius: balls.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min),
                }
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            FeasibleSet::Box { lower, upper } => {
                let width: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                norm(&width)
            }
            FeasibleSet::TransformedSimplex { dim } => {
                if *dim == 1 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                }
            }
            FeasibleSet::Custom(set) => set.diameter(),
            FeasibleSet::Product(blocks) => blocks
                .iter()
                .map(|b| b.diameter().powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Draws a member point: uniform on boxes and on the transformed simplex
    /// (flat Dirichlet with the last coordinate dropped).
    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self {
            FeasibleSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| rng.random_range(*l..=*u))
                .collect(),
            FeasibleSet::TransformedSimplex { dim } => {
                let draws: Vec<f64> = (0..=*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = draws.iter().sum();
                draws[..*dim].iter().map(|e| e / total).collect()
            }
            FeasibleSet::Custom(set) => set.sample(rng),
            FeasibleSet::Product(blocks) => blocks.iter().flat_map(|b| b.sample(rng)).collect(),
        }
    }
}

/// Projection onto `{ y >= 0, sum(y) <= 1 }`.
fn project_capped_simplex(x: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= 1.0 {
        return clipped;
    }
    project_probability_simplex(x)
}

/// Projection onto `{ y >= 0, sum(y) = 1 }` by the sort-and-threshold rule.
pub(crate) fn project_probability_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (j as f64 + 1.0);
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Uniform point on the sphere of radius `radius` about `center`.
#[cfg(test)]
pub(crate) fn sphere_point<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let u = crate::estimator::gaussian_direction(rng, center.len());
    center.iter().zip(&u).map(|(c, u)| c + radius * u).collect()
}
