//! Online learners producing the next hidden-context estimate.
//!
//! Every learner follows the same round protocol: at round `t` it has
//! already committed to `x̂^t`; it then receives the feedback set `F_t`
//! (losses whose delay expired this round) together with the next agent's
//! known context `x_k^{t+1}`, and commits to `x̂^{t+1}`. Gradients of
//! delivered losses are always evaluated at the decision that was played in
//! the loss's own round.

mod influence;
mod schedule;

pub use influence::{InfluenceFn, InfluenceWeight, Reduction};
pub use schedule::{tune_convex_sigma, tune_mirror_sigma, tune_adversarial_eta, BetaRule, StepSchedule};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, MirrorMap, MirrorStep};
use crate::losses::LossSpec;
use crate::vector::Vector;

/// One delivered loss: source round `s` and the now fully revealed `f_s`.
#[derive(Clone, Copy, Debug)]
pub struct Feedback<'a> {
    pub source: usize,
    pub loss: &'a LossSpec,
}

/// Counters for recoverable numerical events.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Warnings {
    /// Subgradients taken exactly at a kink (zero substituted).
    pub kink_gradients: usize,
    /// Mirror updates whose exponentiation saturated.
    pub mirror_saturations: usize,
}

/// `−η g + β Φ`
pub fn combined_step(eta: f64, gradient: &Vector, beta: f64, influence: &Vector) -> Vector {
    gradient.scale(-eta).add_scaled(beta, influence)
}

/// `Π_K(x − η g + β Φ)`
pub fn ogd_step(
    body: &ConvexBody,
    x: &Vector,
    eta: f64,
    gradient: &Vector,
    beta: f64,
    influence: &Vector,
) -> Result<Vector> {
    x.check_dim(gradient.dim())?;
    x.check_dim(influence.dim())?;
    body.project(&(x + &combined_step(eta, gradient, beta, influence)))
}

/// `∇M*(∇M(x) − η g + β Φ)`, projected for the Euclidean map.
pub fn omd_step(
    map: MirrorMap,
    body: &ConvexBody,
    x: &Vector,
    eta: f64,
    gradient: &Vector,
    beta: f64,
    influence: &Vector,
) -> Result<MirrorStep> {
    x.check_dim(gradient.dim())?;
    x.check_dim(influence.dim())?;
    let mut out = map.update(x, &combined_step(eta, gradient, beta, influence))?;
    if map == MirrorMap::Euclidean {
        out.point = body.project(&out.point)?;
    }
    Ok(out)
}

/// `Π_K(x − η Σ_s g_s + β Φ)`; an empty gradient set leaves only the drift.
pub fn adversarial_step(
    body: &ConvexBody,
    x: &Vector,
    eta: f64,
    gradients: &[Vector],
    beta: f64,
    influence: &Vector,
) -> Result<Vector> {
    let mut total = Vector::zeros(x.dim());
    for g in gradients {
        x.check_dim(g.dim())?;
        total = &total + g;
    }
    ogd_step(body, x, eta, &total, beta, influence)
}

/// Arithmetic mean of the revealed hidden contexts; zero when none are known.
pub fn naive_estimate(history: &[Vector], dim: usize) -> Result<Vector> {
    let Some(first) = history.first() else {
        return Ok(Vector::zeros(dim));
    };
    first.check_dim(dim)?;
    let mut sum = Vector::zeros(dim);
    for x in history {
        x.check_dim(dim)?;
        sum = &sum + x;
    }
    Ok(sum.scale(1.0 / history.len() as f64))
}

/// Common interface of the online learners.
pub trait Learner: Send {
    fn name(&self) -> &'static str;

    /// Decision `x̂^t` for the current round.
    fn estimate(&self) -> &Vector;

    /// Decisions played so far, `x̂^1..x̂^t`.
    fn decisions(&self) -> &[Vector];

    /// Ends round `t` with feedback set `F_t` and the next known context,
    /// returning `x̂^{t+1}`.
    fn advance(
        &mut self,
        t: usize,
        delivered: &[Feedback<'_>],
        next_known: Option<&Vector>,
    ) -> Result<Vector>;

    fn warnings(&self) -> Warnings;
}

/// Decision history shared by every learner.
#[derive(Clone, Debug)]
pub struct LearnerState {
    body: ConvexBody,
    decisions: Vec<Vector>,
    warnings: Warnings,
}

impl LearnerState {
    /// Starts at the feasible point nearest the origin: `0` for bodies that
    /// contain it, the uniform point for the simplex.
    pub fn new(body: ConvexBody) -> Result<Self> {
        let start = body.project(&Vector::zeros(body.dim()))?;
        Ok(LearnerState {
            body,
            decisions: vec![start],
            warnings: Warnings::default(),
        })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn round(&self) -> usize {
        self.decisions.len()
    }

    pub fn current(&self) -> &Vector {
        self.decisions.last().expect("at least one decision")
    }

    pub fn decisions(&self) -> &[Vector] {
        &self.decisions
    }

    pub fn decision_at(&self, round: usize) -> Result<&Vector> {
        if round == 0 {
            return Err(Error::Logic("rounds are numbered from 1".into()));
        }
        self.decisions
            .get(round - 1)
            .ok_or_else(|| Error::Logic(format!("no stored decision for round {round}")))
    }

    fn expect_round(&self, t: usize) -> Result<()> {
        if t != self.round() {
            return Err(Error::Logic(format!(
                "learner is at round {}, asked to advance round {t}",
                self.round()
            )));
        }
        Ok(())
    }

    /// `∇f_s(x̂^s)` for a delivered loss.
    pub fn delivered_gradient(&mut self, t: usize, fb: &Feedback<'_>) -> Result<Vector> {
        if fb.source > t {
            return Err(Error::Logic(format!(
                "feedback from round {} delivered at earlier round {t}",
                fb.source
            )));
        }
        let played = self.decision_at(fb.source)?.clone();
        let g = fb.loss.gradient(&played)?;
        if g.at_kink {
            self.warnings.kink_gradients += 1;
        }
        Ok(g.vector)
    }

    fn commit(&mut self, next: Vector) -> Vector {
        debug_assert!(self.body.contains(&next, 1e-9));
        self.decisions.push(next.clone());
        next
    }
}

/// Delayed correlated online gradient descent for a fixed delay `τ`.
#[derive(Clone, Debug)]
pub struct DelayedOgd {
    state: LearnerState,
    schedule: StepSchedule,
    beta: BetaRule,
    influence: InfluenceFn,
}

impl DelayedOgd {
    pub fn new(body: ConvexBody, schedule: StepSchedule, beta: BetaRule, influence: InfluenceFn) -> Result<Self> {
        schedule.validate()?;
        check_influence_dim(&body, &influence)?;
        Ok(DelayedOgd {
            state: LearnerState::new(body)?,
            schedule,
            beta,
            influence,
        })
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }
}

/// At most one delivered gradient, and it must be from round `t − τ`.
fn single_delayed_gradient(
    state: &mut LearnerState,
    schedule: &StepSchedule,
    t: usize,
    delivered: &[Feedback<'_>],
) -> Result<Vector> {
    match delivered {
        [] => Ok(Vector::zeros(state.body().dim())),
        [fb] => {
            if let Some(tau) = schedule.tau() {
                if fb.source + tau != t {
                    return Err(Error::Logic(format!(
                        "fixed-delay learner (tau = {tau}) received round {} at round {t}",
                        fb.source
                    )));
                }
            }
            state.delivered_gradient(t, fb)
        }
        many => Err(Error::Logic(format!(
            "fixed-delay learner received {} losses at round {t}",
            many.len()
        ))),
    }
}

fn check_influence_dim(body: &ConvexBody, influence: &InfluenceFn) -> Result<()> {
    if influence.hidden_dim != body.dim() {
        return Err(Error::Dimension {
            expected: body.dim(),
            actual: influence.hidden_dim,
        });
    }
    Ok(())
}

impl Learner for DelayedOgd {
    fn name(&self) -> &'static str {
        "ogd"
    }

    fn estimate(&self) -> &Vector {
        self.state.current()
    }

    fn decisions(&self) -> &[Vector] {
        self.state.decisions()
    }

    fn advance(&mut self, t: usize, delivered: &[Feedback<'_>], next_known: Option<&Vector>) -> Result<Vector> {
        self.state.expect_round(t)?;
        let g = single_delayed_gradient(&mut self.state, &self.schedule, t, delivered)?;
        let eta = self.schedule.eta(t);
        let phi = self.influence.apply(eta, next_known)?;
        let next = ogd_step(self.state.body(), self.state.current(), eta, &g, self.beta.beta(eta), &phi)?;
        Ok(self.state.commit(next))
    }

    fn warnings(&self) -> Warnings {
        self.state.warnings
    }
}

/// Delayed correlated online mirror descent for a fixed delay `τ`.
#[derive(Clone, Debug)]
pub struct DelayedOmd {
    state: LearnerState,
    map: MirrorMap,
    schedule: StepSchedule,
    beta: BetaRule,
    influence: InfluenceFn,
}

impl DelayedOmd {
    pub fn new(
        body: ConvexBody,
        map: MirrorMap,
        schedule: StepSchedule,
        beta: BetaRule,
        influence: InfluenceFn,
    ) -> Result<Self> {
        schedule.validate()?;
        check_influence_dim(&body, &influence)?;
        if map == MirrorMap::NegativeEntropy && !matches!(body.shape(), crate::geometry::Shape::Simplex { .. }) {
            return Err(Error::Config(
                "the negative-entropy map requires a simplex feasible set".into(),
            ));
        }
        Ok(DelayedOmd {
            state: LearnerState::new(body)?,
            map,
            schedule,
            beta,
            influence,
        })
    }
}

impl Learner for DelayedOmd {
    fn name(&self) -> &'static str {
        "omd"
    }

    fn estimate(&self) -> &Vector {
        self.state.current()
    }

    fn decisions(&self) -> &[Vector] {
        self.state.decisions()
    }

    fn advance(&mut self, t: usize, delivered: &[Feedback<'_>], next_known: Option<&Vector>) -> Result<Vector> {
        self.state.expect_round(t)?;
        let g = single_delayed_gradient(&mut self.state, &self.schedule, t, delivered)?;
        let eta = self.schedule.eta(t);
        let phi = self.influence.apply(eta, next_known)?;
        let out = omd_step(
            self.map,
            self.state.body(),
            self.state.current(),
            eta,
            &g,
            self.beta.beta(eta),
            &phi,
        )?;
        if out.saturated {
            self.state.warnings.mirror_saturations += 1;
        }
        Ok(self.state.commit(out.point))
    }

    fn warnings(&self) -> Warnings {
        self.state.warnings
    }
}

/// Correlated online gradient descent under arbitrary delays, constant `η`, `β`.
#[derive(Clone, Debug)]
pub struct AdversarialOgd {
    state: LearnerState,
    eta: f64,
    beta: f64,
    influence: InfluenceFn,
}

impl AdversarialOgd {
    pub fn new(body: ConvexBody, eta: f64, beta: f64, influence: InfluenceFn) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) || !beta.is_finite() {
            return Err(Error::Argument(format!("need eta > 0 and finite beta, got {eta}, {beta}")));
        }
        check_influence_dim(&body, &influence)?;
        Ok(AdversarialOgd {
            state: LearnerState::new(body)?,
            eta,
            beta,
            influence,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl Learner for AdversarialOgd {
    fn name(&self) -> &'static str {
        "adversarial"
    }

    fn estimate(&self) -> &Vector {
        self.state.current()
    }

    fn decisions(&self) -> &[Vector] {
        self.state.decisions()
    }

    fn advance(&mut self, t: usize, delivered: &[Feedback<'_>], next_known: Option<&Vector>) -> Result<Vector> {
        self.state.expect_round(t)?;
        let gradients = delivered
            .iter()
            .map(|fb| self.state.delivered_gradient(t, fb))
            .collect::<Result<Vec<_>>>()?;
        let phi = self.influence.apply(self.eta, next_known)?;
        let next = adversarial_step(self.state.body(), self.state.current(), self.eta, &gradients, self.beta, &phi)?;
        Ok(self.state.commit(next))
    }

    fn warnings(&self) -> Warnings {
        self.state.warnings
    }
}

/// Sample mean of every hidden context revealed so far.
#[derive(Clone, Debug)]
pub struct NaiveMean {
    state: LearnerState,
    sum: Vector,
    count: usize,
}

impl NaiveMean {
    pub fn new(body: ConvexBody) -> Result<Self> {
        let dim = body.dim();
        Ok(NaiveMean {
            state: LearnerState::new(body)?,
            sum: Vector::zeros(dim),
            count: 0,
        })
    }
}

impl Learner for NaiveMean {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn estimate(&self) -> &Vector {
        self.state.current()
    }

    fn decisions(&self) -> &[Vector] {
        self.state.decisions()
    }

    fn advance(&mut self, t: usize, delivered: &[Feedback<'_>], _next_known: Option<&Vector>) -> Result<Vector> {
        self.state.expect_round(t)?;
        for fb in delivered {
            if fb.source > t {
                return Err(Error::Logic(format!(
                    "feedback from round {} delivered at earlier round {t}",
                    fb.source
                )));
            }
            fb.loss.anchor.check_dim(self.sum.dim())?;
            self.sum = &self.sum + &fb.loss.anchor;
            self.count += 1;
        }
        let next = if self.count == 0 {
            self.state.current().clone()
        } else {
            self.state.body().project(&self.sum.scale(1.0 / self.count as f64))?
        };
        Ok(self.state.commit(next))
    }

    fn warnings(&self) -> Warnings {
        self.state.warnings
    }
}
