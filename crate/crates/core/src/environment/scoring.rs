use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Separable linear score `g(x_k, x_u) = c₁⟨w₁, x_k⟩ + c₂⟨w₂, x_u⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringFn {
    pub c1: f64,
    pub w1: Vector,
    pub c2: f64,
    pub w2: Vector,
}

impl ScoringFn {
    /// Requires `c₁, c₂ > 0` and `‖c₂ w₂‖ ≤ 1`, so `g₂` is 1-Lipschitz.
    pub fn new(c1: f64, w1: Vector, c2: f64, w2: Vector) -> Result<Self> {
        if !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::Argument("score weights c1, c2 must be > 0".into()));
        }
        let s = ScoringFn { c1, w1, c2, w2 };
        if s.hidden_lipschitz() > 1.0 + 1e-12 {
            return Err(Error::Argument(format!(
                "hidden score part must be 1-Lipschitz, ‖c2 w2‖ = {}",
                s.hidden_lipschitz()
            )));
        }
        Ok(s)
    }

    /// Averages of the coordinates, `w = 1/√d` in each component.
    pub fn balanced(known_dim: usize, hidden_dim: usize) -> Self {
        let w1 = Vector::filled(known_dim, 1.0 / (known_dim as f64).sqrt());
        let w2 = Vector::filled(hidden_dim, 1.0 / (hidden_dim as f64).sqrt());
        ScoringFn { c1: 1.0, w1, c2: 1.0, w2 }
    }

    pub fn hidden_lipschitz(&self) -> f64 {
        self.c2 * self.w2.norm()
    }

    pub fn known_part(&self, known: &Vector) -> Result<f64> {
        known.check_dim(self.w1.dim())?;
        Ok(self.c1 * self.w1.dot(known))
    }

    pub fn hidden_part(&self, hidden: &Vector) -> Result<f64> {
        hidden.check_dim(self.w2.dim())?;
        Ok(self.c2 * self.w2.dot(hidden))
    }

    pub fn score(&self, known: &Vector, hidden: &Vector) -> Result<f64> {
        Ok(self.known_part(known)? + self.hidden_part(hidden)?)
    }

    /// `|g(x_k, x̂_u) − g(x_k, x_u)|`
    pub fn score_error(&self, known: &Vector, estimate: &Vector, hidden: &Vector) -> Result<f64> {
        Ok((self.score(known, estimate)? - self.score(known, hidden)?).abs())
    }
}
