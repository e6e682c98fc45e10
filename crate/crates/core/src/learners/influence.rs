use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// How the known context is mapped into the hidden-context space.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "kebab-case")]
pub enum Reduction {
    /// Keep the first `d₂` coordinates.
    #[default]
    Truncate,
    /// Row-major `d₂ × d₁` matrix.
    Linear(Vec<Vec<f64>>),
}

/// Rule for the signed influence coefficient `λ_{t+1}` used at round `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InfluenceWeight {
    Constant { lambda: f64 },
    /// `λ_{t+1} = scale · η_t`; `scale = ±1` gives `|λ_{t+1}| = η_t`.
    MatchStep { scale: f64 },
}

/// Linear influence `Φ_{t+1}(x) = λ_{t+1} · reduce(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceFn {
    pub weight: InfluenceWeight,
    pub reduction: Reduction,
    pub hidden_dim: usize,
}

impl InfluenceFn {
    pub fn new(weight: InfluenceWeight, reduction: Reduction, hidden_dim: usize) -> Result<Self> {
        if hidden_dim == 0 {
            return Err(Error::Argument("hidden dimension must be >= 1".into()));
        }
        if let Reduction::Linear(rows) = &reduction {
            if rows.len() != hidden_dim {
                return Err(Error::Dimension {
                    expected: hidden_dim,
                    actual: rows.len(),
                });
            }
            let width = rows.first().map_or(0, Vec::len);
            if width == 0 || rows.iter().any(|r| r.len() != width) {
                return Err(Error::Argument("reduction matrix rows must share a nonzero width".into()));
            }
            if rows.iter().flatten().any(|c| !c.is_finite()) {
                return Err(Error::Argument("reduction matrix must be finite".into()));
            }
        }
        Ok(InfluenceFn {
            weight,
            reduction,
            hidden_dim,
        })
    }

    /// No influence at all (`λ = 0`).
    pub fn none(hidden_dim: usize) -> Self {
        InfluenceFn {
            weight: InfluenceWeight::Constant { lambda: 0.0 },
            reduction: Reduction::Truncate,
            hidden_dim,
        }
    }

    pub fn constant(lambda: f64, hidden_dim: usize) -> Self {
        InfluenceFn {
            weight: InfluenceWeight::Constant { lambda },
            reduction: Reduction::Truncate,
            hidden_dim,
        }
    }

    pub fn matching_step(scale: f64, hidden_dim: usize) -> Self {
        InfluenceFn {
            weight: InfluenceWeight::MatchStep { scale },
            reduction: Reduction::Truncate,
            hidden_dim,
        }
    }

    /// Minimum known-context dimension this map accepts.
    pub fn known_dim_required(&self) -> usize {
        match &self.reduction {
            Reduction::Truncate => self.hidden_dim,
            Reduction::Linear(rows) => rows[0].len(),
        }
    }

    pub fn lambda(&self, eta: f64) -> f64 {
        match self.weight {
            InfluenceWeight::Constant { lambda } => lambda,
            InfluenceWeight::MatchStep { scale } => scale * eta,
        }
    }

    /// Largest `|λ|` the rule can produce when steps are bounded by `max_eta`.
    pub fn lambda_bound(&self, max_eta: f64) -> f64 {
        self.lambda(max_eta).abs()
    }

    pub fn reduce(&self, known: &Vector) -> Result<Vector> {
        match &self.reduction {
            Reduction::Truncate => {
                if known.dim() < self.hidden_dim {
                    return Err(Error::Dimension {
                        expected: self.hidden_dim,
                        actual: known.dim(),
                    });
                }
                Vector::new(known.as_slice()[..self.hidden_dim].to_vec())
            }
            Reduction::Linear(rows) => {
                known.check_dim(rows[0].len())?;
                Vector::new(
                    rows.iter()
                        .map(|row| row.iter().zip(known.as_slice()).map(|(a, b)| a * b).sum())
                        .collect(),
                )
            }
        }
    }

    /// `Φ_{t+1}(x_k^{t+1})`, or the zero vector past the end of the stream.
    pub fn apply(&self, eta: f64, next_known: Option<&Vector>) -> Result<Vector> {
        match next_known {
            None => Ok(Vector::zeros(self.hidden_dim)),
            Some(x) => Ok(self.reduce(x)?.scale(self.lambda(eta))),
        }
    }
}
