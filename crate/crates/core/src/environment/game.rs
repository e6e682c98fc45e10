use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scoring::ScoringFn;
use super::stream::{ContextBodies, ContextStream, StreamSpec};
use crate::error::{Error, Result};
use crate::evaluation::{RoundRecord, Trajectory};
use crate::feedback::{DelaySchedule, FeedbackBuffer};
use crate::geometry::{ConvexBody, MirrorMap};
use crate::learners::{
    AdversarialOgd, BetaRule, DelayedOgd, DelayedOmd, Feedback, InfluenceFn, Learner, NaiveMean,
    StepSchedule,
};
use crate::losses::{LossFamily, LossSpec};

/// A loss coefficient, either fixed or drawn fresh each round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Fixed(f64),
    /// Uniform on `(lo, hi]`.
    Uniform([f64; 2]),
}

impl Coefficient {
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Coefficient::Fixed(v) => v,
            // 1 − U[0,1) lies in (0, 1], keeping draws off the lower end
            Coefficient::Uniform([lo, hi]) => lo + (hi - lo) * (1.0 - rng.random::<f64>()),
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Coefficient::Fixed(v) => v,
            Coefficient::Uniform([_, hi]) => hi,
        }
    }

    pub fn min(&self) -> f64 {
        match *self {
            Coefficient::Fixed(v) => v,
            Coefficient::Uniform([lo, _]) => lo,
        }
    }

    fn check(&self, name: &str, strictly_positive: bool) -> Result<()> {
        let ok = |v: f64| v.is_finite() && if strictly_positive { v > 0.0 } else { v >= 0.0 };
        let valid = match *self {
            Coefficient::Fixed(v) => ok(v),
            // draws lie in (lo, hi], so lo itself may be 0 for a strict bound
            Coefficient::Uniform([lo, hi]) => lo.is_finite() && lo >= 0.0 && ok(hi) && lo < hi,
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config(format!("loss coefficient {name} is out of range: {self:?}")))
        }
    }
}

/// Distribution over per-round loss families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum LossModel {
    Norm,
    Quadratic { a: Coefficient, b: Coefficient },
    Power { m: u32 },
    Exp { a: Coefficient, sigma1: f64, m: u32 },
}

impl LossModel {
    /// `a, b ~ U(0, 1]` quadratic.
    pub fn random_quadratic() -> Self {
        LossModel::Quadratic {
            a: Coefficient::Uniform([0.0, 1.0]),
            b: Coefficient::Uniform([0.0, 1.0]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LossModel::Norm => Ok(()),
            LossModel::Quadratic { a, b } => {
                a.check("a", true)?;
                b.check("b", false)
            }
            LossModel::Power { m } => LossFamily::Power { m: *m }.validate().map_err(to_config),
            LossModel::Exp { a, sigma1, m } => {
                a.check("a", true)?;
                LossFamily::Exp { a: a.max(), sigma1: *sigma1, m: *m }
                    .validate()
                    .map_err(to_config)
            }
        }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng) -> LossFamily {
        match *self {
            LossModel::Norm => LossFamily::Norm,
            LossModel::Quadratic { a, b } => LossFamily::Quadratic {
                a: a.draw(rng),
                b: b.draw(rng),
            },
            LossModel::Power { m } => LossFamily::Power { m },
            LossModel::Exp { a, sigma1, m } => LossFamily::Exp { a: a.draw(rng), sigma1, m },
        }
    }

    /// Family with the largest coefficients any draw can produce.
    pub fn steepest(&self) -> LossFamily {
        match *self {
            LossModel::Norm => LossFamily::Norm,
            LossModel::Quadratic { a, b } => LossFamily::Quadratic { a: a.max(), b: b.max() },
            LossModel::Power { m } => LossFamily::Power { m },
            LossModel::Exp { a, sigma1, m } => LossFamily::Exp { a: a.max(), sigma1, m },
        }
    }

    /// Lipschitz bound valid for every draw within `radius` of the anchor.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.steepest().lipschitz_bound(radius)
    }

    /// Strong-convexity parameter guaranteed for every draw.
    pub fn strong_convexity(&self) -> f64 {
        match *self {
            LossModel::Quadratic { a, .. } => 2.0 * a.min(),
            _ => 0.0,
        }
    }
}

fn to_config(e: Error) -> Error {
    Error::Config(e.to_string())
}

/// Which learner plays, with its parameters fully resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum LearnerSpec {
    Ogd {
        schedule: StepSchedule,
        beta: BetaRule,
        influence: InfluenceFn,
    },
    Omd {
        map: MirrorMap,
        schedule: StepSchedule,
        beta: BetaRule,
        influence: InfluenceFn,
    },
    Adversarial {
        eta: f64,
        beta: BetaRule,
        influence: InfluenceFn,
    },
    Naive,
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Ogd { .. } => "ogd",
            LearnerSpec::Omd { .. } => "omd",
            LearnerSpec::Adversarial { .. } => "adversarial",
            LearnerSpec::Naive => "naive",
        }
    }

    fn schedule(&self) -> Option<&StepSchedule> {
        match self {
            LearnerSpec::Ogd { schedule, .. } | LearnerSpec::Omd { schedule, .. } => Some(schedule),
            _ => None,
        }
    }

    pub fn build(&self, body: ConvexBody) -> Result<Box<dyn Learner>> {
        Ok(match self {
            LearnerSpec::Ogd { schedule, beta, influence } => {
                Box::new(DelayedOgd::new(body, *schedule, *beta, influence.clone())?)
            }
            LearnerSpec::Omd { map, schedule, beta, influence } => {
                Box::new(DelayedOmd::new(body, *map, *schedule, *beta, influence.clone())?)
            }
            LearnerSpec::Adversarial { eta, beta, influence } => {
                Box::new(AdversarialOgd::new(body, *eta, beta.beta(*eta), influence.clone())?)
            }
            LearnerSpec::Naive => Box::new(NaiveMean::new(body)?),
        })
    }
}

/// Everything needed to play one game, minus the randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub horizon: usize,
    pub learner: LearnerSpec,
    /// Feasible set for the learner's estimates.
    pub body: ConvexBody,
    pub stream: StreamSpec,
    /// Generated contexts are projected into these when present.
    pub context_bodies: Option<ContextBodies>,
    pub delays: DelaySchedule,
    pub loss: LossModel,
    pub scoring: ScoringFn,
    /// Leading rounds excluded from regret.
    pub warmup_rounds: usize,
}

/// Independent seeds for the context stream and the adversary drawing loss
/// coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSeeds {
    pub stream: u64,
    pub adversary: u64,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        if self.horizon == 0 {
            return cfg("horizon must be >= 1".into());
        }
        self.stream.validate()?;
        self.loss.validate()?;
        let hidden = self.stream.hidden_dim();
        let known = self.stream.known_dim();
        if self.body.dim() != hidden {
            return cfg(format!(
                "feasible set has dimension {}, hidden context has {hidden}",
                self.body.dim()
            ));
        }
        if self.scoring.w1.dim() != known || self.scoring.w2.dim() != hidden {
            return cfg("scoring weights do not match context dimensions".into());
        }
        if let Some(len) = self.stream.len() {
            if len < self.horizon {
                return cfg(format!("explicit stream has {len} rows, horizon is {}", self.horizon));
            }
        }
        if let Some(b) = &self.context_bodies {
            if b.known.dim() != known || b.hidden.dim() != hidden {
                return cfg("context bodies do not match stream dimensions".into());
            }
        }
        let influence = match &self.learner {
            LearnerSpec::Ogd { influence, .. }
            | LearnerSpec::Omd { influence, .. }
            | LearnerSpec::Adversarial { influence, .. } => Some(influence),
            LearnerSpec::Naive => None,
        };
        if let Some(f) = influence {
            if f.hidden_dim != hidden || f.known_dim_required() > known {
                return cfg("influence map does not match context dimensions".into());
            }
        }
        if let Some(schedule) = self.learner.schedule() {
            schedule.validate().map_err(to_config)?;
            let Some(tau) = self.delays.fixed_tau() else {
                return cfg(format!("learner '{}' needs a fixed delay schedule", self.learner.name()));
            };
            if let Some(expected) = schedule.tau() {
                if expected != tau {
                    return cfg(format!(
                        "step schedule assumes tau = {expected}, delay schedule has tau = {tau}"
                    ));
                }
            }
        }
        self.delays.delays(self.horizon).map_err(to_config)?;
        if self.warmup_rounds >= self.horizon {
            return cfg("warm-up must leave at least one scored round".into());
        }
        Ok(())
    }

    /// Stable hash of the configuration with every seed removed.
    pub fn fingerprint(&self) -> String {
        let mut unseeded = self.clone();
        if let DelaySchedule::Adversarial { seed, .. } = &mut unseeded.delays {
            *seed = 0;
        }
        let json = serde_json::to_string(&unseeded).expect("config serialises");
        format!("{:016x}", fnv1a(json.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Plays one game. Per round: draw the context, play the current estimate,
/// create the loss anchored at the hidden context, queue it with its delay,
/// and hand the learner whatever feedback is due.
pub fn run_game(config: &GameConfig, seeds: GameSeeds) -> Result<Trajectory> {
    config.validate()?;
    let horizon = config.horizon;
    let delays = config.delays.delays(horizon)?;
    let mut stream = ContextStream::new(config.stream.clone(), config.context_bodies.clone(), seeds.stream)?;
    let mut adversary = ChaCha8Rng::seed_from_u64(seeds.adversary);
    let mut learner = config.learner.build(config.body.clone())?;
    let mut buffer = FeedbackBuffer::new();

    let exhausted = || Error::Config("context stream ended before the horizon".into());
    let mut current = stream.next_context()?.ok_or_else(exhausted)?;
    let mut losses: Vec<LossSpec> = Vec::with_capacity(horizon);
    let mut rounds = Vec::with_capacity(horizon);

    for t in 1..=horizon {
        let estimate = learner.estimate().clone();
        let family = config.loss.draw(&mut adversary);
        let loss = LossSpec::new(current.hidden.clone(), family)?;
        let value = loss.eval(&estimate)?;
        let score_error = config.scoring.score_error(&current.known, &estimate, &current.hidden)?;
        losses.push(loss);

        buffer.push(t, delays[t - 1])?;
        let delivered = buffer.take(t);
        let upcoming = if t < horizon {
            Some(stream.next_context()?.ok_or_else(exhausted)?)
        } else {
            None
        };
        let feedback: Vec<Feedback<'_>> = delivered
            .iter()
            .map(|&s| Feedback { source: s, loss: &losses[s - 1] })
            .collect();
        learner.advance(t, &feedback, upcoming.as_ref().map(|c| &c.known))?;

        rounds.push(RoundRecord {
            t,
            estimate,
            known: current.known.clone(),
            loss: value,
            score_error,
            score_loss: family.profile(score_error),
            delivered,
        });
        if let Some(next) = upcoming {
            current = next;
        }
    }

    Ok(Trajectory {
        learner: learner.name().to_string(),
        rounds,
        losses,
        delays,
        delay_sum: buffer.delay_sum(),
        post_horizon: buffer.drain_remaining(),
        warmup_rounds: config.warmup_rounds,
        fingerprint: config.fingerprint(),
        seeds,
        warnings: learner.warnings(),
    })
}
