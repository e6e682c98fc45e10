//! Trajectories, regret against the best fixed decision, scaling fits and
//! cross-trial aggregation.

mod comparator;

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::environment::GameSeeds;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::learners::Warnings;
use crate::losses::LossSpec;
use crate::vector::Vector;

pub use comparator::{
    offline_optimum, offline_optimum_iterative, quadratic_closed_form, total_loss, Comparator, SolverMethod,
};

/// What happened in one round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub t: usize,
    pub estimate: Vector,
    pub known: Vector,
    pub loss: f64,
    pub score_error: f64,
    /// Loss profile applied to the score error.
    pub score_loss: f64,
    /// Source rounds whose feedback arrived at the end of this round.
    pub delivered: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub learner: String,
    pub rounds: Vec<RoundRecord>,
    pub losses: Vec<LossSpec>,
    pub delays: Vec<usize>,
    pub delay_sum: u64,
    /// Feedback that would only have arrived after the horizon.
    pub post_horizon: Vec<(usize, Vec<usize>)>,
    pub warmup_rounds: usize,
    pub fingerprint: String,
    pub seeds: GameSeeds,
    pub warnings: Warnings,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    /// Re-evaluates every recorded loss from the stored losses and estimates.
    pub fn replay_check(&self) -> Result<()> {
        if self.losses.len() != self.rounds.len() {
            return Err(Error::Logic("trajectory has mismatched loss and round counts".into()));
        }
        for (r, l) in self.rounds.iter().zip(&self.losses) {
            let v = l.eval(&r.estimate)?;
            if v != r.loss {
                return Err(Error::Logic(format!("round {}: stored loss {} but replay gives {v}", r.t, r.loss)));
            }
        }
        Ok(())
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.rounds[self.warmup_rounds..].iter().map(|r| r.loss).sum()
    }

    /// One row per round: `t, estimate_*, hidden_*, loss, score_error, delivered`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let dim = self.rounds.first().map_or(0, |r| r.estimate.dim());
        let mut header = vec!["t".to_string()];
        header.extend((0..dim).map(|i| format!("estimate_{i}")));
        header.extend((0..dim).map(|i| format!("hidden_{i}")));
        header.extend(["loss", "score_error", "delivered"].map(String::from));
        w.write_record(&header)?;
        for (r, l) in self.rounds.iter().zip(&self.losses) {
            let mut row = vec![r.t.to_string()];
            row.extend(r.estimate.as_slice().iter().map(f64::to_string));
            row.extend(l.anchor.as_slice().iter().map(f64::to_string));
            row.push(r.loss.to_string());
            row.push(r.score_error.to_string());
            row.push(r.delivered.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Regret of one trajectory after warm-up, against the fixed decision that
/// is best over the same scored rounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegretReport {
    pub learner: String,
    pub warmup_rounds: usize,
    pub rounds: usize,
    pub cumulative_loss: f64,
    pub regret: f64,
    pub comparator: Comparator,
    pub delay_sum: u64,
    /// `Σ f(|ĝ − g|)` over the scored rounds.
    pub score_loss: f64,
    pub fingerprint: String,
    pub warnings: Warnings,
    /// Running learner loss, one entry per scored round.
    pub cumulative_series: Vec<f64>,
    /// Running regret against the final comparator, one entry per scored round.
    pub regret_series: Vec<f64>,
}

impl RegretReport {
    /// Series values at absolute rounds `t`.
    pub fn curve(&self, checkpoints: &[usize]) -> Result<Vec<CurvePoint>> {
        checkpoints
            .iter()
            .map(|&t| {
                let i = self.index_of(t)?;
                Ok(CurvePoint {
                    t,
                    cumulative_loss: self.cumulative_series[i],
                    regret: self.regret_series[i],
                })
            })
            .collect()
    }

    fn index_of(&self, t: usize) -> Result<usize> {
        if t <= self.warmup_rounds || t > self.warmup_rounds + self.rounds {
            return Err(Error::Argument(format!(
                "checkpoint {t} outside scored rounds {}..={}",
                self.warmup_rounds + 1,
                self.warmup_rounds + self.rounds
            )));
        }
        Ok(t - self.warmup_rounds - 1)
    }

    /// `Σ f(|ĝ − g|) ≤ D* + R(T)` up to `tol`.
    pub fn score_chain_holds(&self, tol: f64) -> bool {
        self.score_loss <= self.comparator.loss + self.regret + tol
    }
}

pub fn regret(traj: &Trajectory, body: &ConvexBody) -> Result<RegretReport> {
    let w = traj.warmup_rounds;
    let scored = &traj.losses[w..];
    let comparator = offline_optimum(scored, body)?;
    let mut cumulative_series = Vec::with_capacity(scored.len());
    let mut regret_series = Vec::with_capacity(scored.len());
    let (mut played, mut best) = (0.0, 0.0);
    for (r, l) in traj.rounds[w..].iter().zip(scored) {
        played += r.loss;
        best += l.eval(&comparator.point)?;
        cumulative_series.push(played);
        regret_series.push(played - best);
    }
    Ok(RegretReport {
        learner: traj.learner.clone(),
        warmup_rounds: w,
        rounds: scored.len(),
        cumulative_loss: played,
        regret: played - comparator.loss,
        comparator,
        delay_sum: traj.delay_sum,
        score_loss: traj.rounds[w..].iter().map(|r| r.score_loss).sum(),
        fingerprint: traj.fingerprint.clone(),
        warnings: traj.warnings,
        cumulative_series,
        regret_series,
    })
}

/// Cumulative loss and regret at round `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: usize,
    pub cumulative_loss: f64,
    pub regret: f64,
}

/// Diagnostic curve with the comparator re-solved on rounds `warmup+1..=t`
/// at every checkpoint, so each point is the regret of a horizon-`t` game.
pub fn regret_curve(traj: &Trajectory, body: &ConvexBody, checkpoints: &[usize]) -> Result<Vec<CurvePoint>> {
    let w = traj.warmup_rounds;
    checkpoints
        .iter()
        .map(|&t| {
            if t <= w || t > traj.horizon() {
                return Err(Error::Argument(format!("checkpoint {t} outside scored rounds {}..={}", w + 1, traj.horizon())));
            }
            let comparator = offline_optimum(&traj.losses[w..t], body)?;
            let cumulative_loss: f64 = traj.rounds[w..t].iter().map(|r| r.loss).sum();
            Ok(CurvePoint { t, cumulative_loss, regret: cumulative_loss - comparator.loss })
        })
        .collect()
}

/// About `count` roughly log-spaced checkpoints ending at `horizon`.
pub fn log_checkpoints(first: usize, horizon: usize, count: usize) -> Vec<usize> {
    let first = first.clamp(1, horizon);
    if count <= 1 || first == horizon {
        return vec![horizon];
    }
    let ratio = (horizon as f64 / first as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<usize> = (0..count)
        .map(|i| ((first as f64) * ratio.powi(i as i32)).round() as usize)
        .map(|t| t.clamp(first, horizon))
        .collect();
    out.push(horizon);
    out.sort_unstable();
    out.dedup();
    out
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    /// `C` in `y ≈ C x^exponent`.
    pub constant: f64,
    /// Half-width of the 95% interval on the exponent.
    pub half_width: f64,
    pub points_used: usize,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.constant * x.powf(self.exponent)
    }
}

/// Points with a nonpositive coordinate are dropped; at least three must remain.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = logs.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("scaling fit needs 3 positive points, have {n}")));
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("scaling fit needs distinct x values".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let dof = nf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Logic(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(ScalingFit {
        exponent: slope,
        constant: intercept.exp(),
        half_width: t * se,
        points_used: n,
    })
}

/// Sample mean and standard error (`n − 1` denominator; zero for one sample).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregatePoint {
    pub t: usize,
    pub cum_loss_mean: f64,
    pub cum_loss_stderr: f64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
}

/// One trial's curve, tagged with its configuration fingerprint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialCurve {
    pub fingerprint: String,
    pub points: Vec<CurvePoint>,
}

/// Pointwise mean and standard error across trials of one configuration.
pub fn aggregate(trials: &[TrialCurve]) -> Result<Vec<AggregatePoint>> {
    let Some(first) = trials.first() else {
        return Err(Error::InsufficientData("nothing to aggregate".into()));
    };
    for c in trials {
        if c.fingerprint != first.fingerprint {
            return Err(Error::Argument(format!(
                "cannot aggregate configurations {} and {}",
                first.fingerprint, c.fingerprint
            )));
        }
        if c.points.len() != first.points.len() || c.points.iter().zip(&first.points).any(|(a, b)| a.t != b.t) {
            return Err(Error::Argument("trial curves use different checkpoints".into()));
        }
    }
    Ok((0..first.points.len())
        .map(|i| {
            let loss: Vec<f64> = trials.iter().map(|c| c.points[i].cumulative_loss).collect();
            let reg: Vec<f64> = trials.iter().map(|c| c.points[i].regret).collect();
            let (cum_loss_mean, cum_loss_stderr) = mean_stderr(&loss);
            let (regret_mean, regret_stderr) = mean_stderr(&reg);
            AggregatePoint { t: first.points[i].t, cum_loss_mean, cum_loss_stderr, regret_mean, regret_stderr }
        })
        .collect())
}

pub fn write_aggregate_csv<W: Write>(out: W, points: &[AggregatePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
