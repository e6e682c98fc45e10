//! Mirror maps, Bregman divergences and dual-space updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Coordinates below this are raised to it before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Largest exponent argument treated as representable.
const EXP_LIMIT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MirrorMap {
    /// `M(x) = ½‖x‖²`; the update reduces to an additive gradient step.
    Euclidean,
    /// `M(x) = Σ x_i ln x_i` over the simplex; the update is exponentiated gradient.
    NegativeEntropy,
}

/// Result of a dual-space update.
#[derive(Clone, Debug, PartialEq)]
pub struct MirrorStep {
    pub point: Vector,
    /// Set when the exponentiation saturated and coordinates were clamped.
    pub saturated: bool,
}

impl MirrorMap {
    /// Constant `L_M` with `‖∇M*(∇M(x) − y) − x‖ ≤ L_M ‖y‖`.
    pub fn smoothness(&self) -> f64 {
        match self {
            MirrorMap::Euclidean => 1.0,
            // the softmax Jacobian diag(p) − ppᵀ has spectral norm at most ½
            MirrorMap::NegativeEntropy => 0.5,
        }
    }

    fn check_domain(&self, x: &Vector) -> Result<()> {
        if let MirrorMap::NegativeEntropy = self {
            if let Some(i) = x.as_slice().iter().position(|&c| c <= 0.0) {
                return Err(Error::Domain(format!(
                    "negative-entropy map needs positive coordinates, coordinate {i} is {}",
                    x[i]
                )));
            }
        }
        Ok(())
    }

    pub fn potential(&self, x: &Vector) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            MirrorMap::Euclidean => 0.5 * x.norm_squared(),
            MirrorMap::NegativeEntropy => x
                .as_slice()
                .iter()
                .map(|&c| {
                    let c = c.max(ENTROPY_FLOOR);
                    c * c.ln()
                })
                .sum(),
        })
    }

    /// `∇M(x)`.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        self.check_domain(x)?;
        Ok(match self {
            MirrorMap::Euclidean => x.clone(),
            MirrorMap::NegativeEntropy => x.map(|c| 1.0 + c.max(ENTROPY_FLOOR).ln()),
        })
    }

    /// `D_M(x‖y) = M(x) − M(y) − ⟨x − y, ∇M(y)⟩`.
    pub fn bregman(&self, x: &Vector, y: &Vector) -> Result<f64> {
        x.check_dim(y.dim())?;
        self.check_domain(x)?;
        self.check_domain(y)?;
        let d = match self {
            MirrorMap::Euclidean => 0.5 * x.distance(y).powi(2),
            // closed form of the generic expression; no cancellation between M(x) and M(y)
            MirrorMap::NegativeEntropy => x
                .as_slice()
                .iter()
                .zip(y.as_slice())
                .map(|(&a, &b)| {
                    let (a, b) = (a.max(ENTROPY_FLOOR), b.max(ENTROPY_FLOOR));
                    a * (a / b).ln() - a + b
                })
                .sum(),
        };
        Ok(d.max(0.0))
    }

    /// `∇M*(∇M(x) + step)`. For the entropy map the result is renormalised
    /// onto the simplex.
    pub fn update(&self, x: &Vector, step: &Vector) -> Result<MirrorStep> {
        x.check_dim(step.dim())?;
        if !step.is_finite() {
            return Err(Error::Argument("mirror step is not finite".into()));
        }
        self.check_domain(x)?;
        match self {
            MirrorMap::Euclidean => Ok(MirrorStep {
                point: x + step,
                saturated: false,
            }),
            MirrorMap::NegativeEntropy => {
                let logits: Vec<f64> = x
                    .as_slice()
                    .iter()
                    .zip(step.as_slice())
                    .map(|(&c, &s)| c.max(ENTROPY_FLOOR).ln() + s)
                    .collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut saturated = step.as_slice().iter().any(|s| s.abs() > EXP_LIMIT);
                let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                let total: f64 = weights.iter().sum();
                let mut point: Vec<f64> = weights.iter().map(|w| w / total).collect();
                if point.iter().any(|&p| p < ENTROPY_FLOOR) {
                    saturated = true;
                    for p in point.iter_mut() {
                        *p = p.max(ENTROPY_FLOOR);
                    }
                    let s: f64 = point.iter().sum();
                    for p in point.iter_mut() {
                        *p /= s;
                    }
                }
                Ok(MirrorStep {
                    point: Vector::from_raw(point),
                    saturated,
                })
            }
        }
    }
}
