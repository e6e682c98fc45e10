use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step size `η_t` for the update made at the end of round `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepSchedule {
    /// `σ / √(t − τ)` for `t > τ`, else 0.
    ConvexSqrt { sigma: f64, tau: usize },
    /// `1 / (γ (t − τ))` for `t > τ`, else 0.
    StronglyConvex { gamma: f64, tau: usize },
    Constant { eta: f64 },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} must be > 0, got {v}")))
            }
        };
        match *self {
            StepSchedule::ConvexSqrt { sigma, .. } => positive("sigma", sigma),
            StepSchedule::StronglyConvex { gamma, .. } => positive("gamma", gamma),
            StepSchedule::Constant { eta } => positive("eta", eta),
        }
    }

    pub fn tau(&self) -> Option<usize> {
        match *self {
            StepSchedule::ConvexSqrt { tau, .. } | StepSchedule::StronglyConvex { tau, .. } => {
                Some(tau)
            }
            StepSchedule::Constant { .. } => None,
        }
    }

    pub fn eta(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::ConvexSqrt { sigma, tau } if t > tau => {
                sigma / ((t - tau) as f64).sqrt()
            }
            StepSchedule::StronglyConvex { gamma, tau } if t > tau => {
                1.0 / (gamma * (t - tau) as f64)
            }
            StepSchedule::Constant { eta } => eta,
            _ => 0.0,
        }
    }
}

/// Weight `β_t` on the influence term.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum BetaRule {
    /// `β_t = η_t`.
    #[default]
    MatchStep,
    Fixed(f64),
}

impl BetaRule {
    pub fn beta(&self, eta: f64) -> f64 {
        match *self {
            BetaRule::MatchStep => eta,
            BetaRule::Fixed(b) => b,
        }
    }
}

/// `σ` solving `σ = R / ((L + σR) √τ)`: the positive root of
/// `√τ R σ² + √τ L σ − R = 0`.
pub fn tune_convex_sigma(lipschitz: f64, radius: f64, tau: usize) -> Result<f64> {
    tune_sqrt_scale(lipschitz, radius, tau as f64)
}

/// `σ` solving `σ² = R² / (τ L_M L′²)` with `L′ = L + σR`.
pub fn tune_mirror_sigma(lipschitz: f64, radius: f64, tau: usize, mirror_smoothness: f64) -> Result<f64> {
    if !(mirror_smoothness > 0.0) {
        return Err(Error::Argument("mirror smoothness must be > 0".into()));
    }
    tune_sqrt_scale(lipschitz, radius, tau as f64 * mirror_smoothness)
}

// positive root of √c R σ² + √c L σ − R = 0, in the cancellation-free form
fn tune_sqrt_scale(lipschitz: f64, radius: f64, c: f64) -> Result<f64> {
    if !(lipschitz > 0.0) || !(radius >= 0.0) || !(c >= 1e-300) {
        return Err(Error::Argument(format!(
            "tuning needs L > 0, R >= 0, tau >= 1 (got L={lipschitz}, R={radius}, scale={c})"
        )));
    }
    let s = c.sqrt();
    Ok(2.0 * radius / (s * lipschitz + (c * lipschitz * lipschitz + 4.0 * s * radius * radius).sqrt()))
}

/// Constant step for the adversarial-delay learner:
/// `η = 1 / √(T (L² + 2|λ| L R) + 4 L² D)`.
pub fn tune_adversarial_eta(lipschitz: f64, radius: f64, lambda: f64, horizon: usize, delay_sum: u64) -> Result<f64> {
    if !(lipschitz > 0.0) || horizon == 0 {
        return Err(Error::Argument("tuning needs L > 0 and T >= 1".into()));
    }
    let l = lipschitz;
    let denom = horizon as f64 * (l * l + 2.0 * lambda.abs() * l * radius)
        + 4.0 * l * l * delay_sum as f64;
    Ok(1.0 / denom.sqrt())
}
