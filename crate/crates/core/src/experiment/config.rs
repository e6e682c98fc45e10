use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::{
    Coefficient, ContextBodies, ContextPair, GameConfig, LearnerSpec, LossModel, ScoringFn, StreamSpec,
};
use crate::error::{Error, Result};
use crate::feedback::DelaySchedule;
use crate::geometry::{ConvexBody, MirrorMap};
use crate::learners::{
    tune_convex_sigma, tune_mirror_sigma, BetaRule, InfluenceFn, InfluenceWeight, Reduction, StepSchedule,
};
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SingleRun,
    DelaySweep,
    CorrelationSweep,
    BaselineCompare,
    ScalingCheck,
}

/// Which comparator the reported regret series uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparatorMode {
    /// One comparator solved over the whole horizon.
    #[default]
    Final,
    /// Re-solved at every checkpoint.
    Prefix,
}

/// A number, or the name of a tuning rule resolved at plan time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tuned {
    Value(f64),
    Rule(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    /// Required except for scaling checks, which sweep horizons.
    pub horizon: Option<usize>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub regret: RegretSection,
    pub learner: LearnerSection,
    #[serde(default)]
    pub stream: StreamSection,
    #[serde(default)]
    pub delays: DelaySection,
    #[serde(default)]
    pub loss: LossSection,
    #[serde(default)]
    pub body: BodySection,
    pub scoring: Option<ScoringSection>,
    #[serde(default)]
    pub sweep: SweepSection,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretSection {
    #[serde(default)]
    pub comparator: ComparatorMode,
    /// Explicit rounds at which curves are reported.
    pub checkpoints: Option<Vec<usize>>,
    /// Report every this many rounds when no explicit list is given.
    pub checkpoint_every: Option<usize>,
    /// First checkpoint used in the per-point exponent fit.
    pub fit_from: Option<usize>,
    /// Write every trial's trajectory CSV.
    #[serde(default)]
    pub write_trajectories: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    /// `ogd`, `omd`, `adversarial` or `naive`.
    pub algorithm: String,
    /// `convex-sqrt`, `strongly-convex` or `constant`.
    pub schedule: Option<String>,
    /// Number or `convex` / `mirror`.
    pub sigma: Option<Tuned>,
    pub gamma: Option<f64>,
    /// Number or `delay-sum`.
    pub eta: Option<Tuned>,
    /// Fixed β; by default β follows the step size.
    pub beta: Option<f64>,
    /// `none`, `match-step` or `constant`.
    pub influence: Option<String>,
    pub influence_scale: Option<f64>,
    pub lambda: Option<f64>,
    /// Row-major `d₂ × d₁` map replacing truncation.
    pub reduction: Option<Vec<Vec<f64>>>,
    /// `euclidean` or `negative-entropy`.
    pub map: Option<String>,
    #[serde(default)]
    pub warmup_multiplier: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamSection {
    /// `gaussian`, `pentagon`, `polygon` or `explicit`.
    pub kind: String,
    pub mean: f64,
    pub variance: f64,
    pub rho: f64,
    pub known_dim: usize,
    pub hidden_dim: usize,
    /// Generated contexts are projected into centered balls of this radius.
    pub context_radius: Option<f64>,
    pub vertices: Option<Vec<[f64; 2]>>,
    /// CSV with one row per round, known coordinates first.
    pub path: Option<PathBuf>,
    /// Inline rows in the same layout as the CSV.
    pub rows: Option<Vec<Vec<f64>>>,
}

impl Default for StreamSection {
    fn default() -> Self {
        StreamSection {
            kind: "gaussian".into(),
            mean: 1.0,
            variance: 1.0,
            rho: 0.5,
            known_dim: 1,
            hidden_dim: 1,
            context_radius: Some(5.0),
            vertices: None,
            path: None,
            rows: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DelaySection {
    /// `fixed`, `uniform` or `explicit`.
    pub kind: String,
    pub tau: Option<usize>,
    pub d_max: Option<usize>,
    pub path: Option<PathBuf>,
    pub delays: Option<Vec<usize>>,
}

impl Default for DelaySection {
    fn default() -> Self {
        DelaySection {
            kind: "fixed".into(),
            tau: Some(0),
            d_max: None,
            path: None,
            delays: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    /// `quadratic`, `norm`, `power` or `exp`.
    pub family: String,
    pub a: Option<Coefficient>,
    pub b: Option<Coefficient>,
    pub m: Option<u32>,
    pub sigma1: Option<f64>,
}

impl Default for LossSection {
    fn default() -> Self {
        LossSection {
            family: "quadratic".into(),
            a: None,
            b: None,
            m: None,
            sigma1: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BodySection {
    /// `ball`, `box`, `pentagon`, `polygon` or `simplex`.
    pub kind: String,
    pub radius: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    pub vertices: Option<Vec<[f64; 2]>>,
}

impl Default for BodySection {
    fn default() -> Self {
        BodySection {
            kind: "ball".into(),
            radius: Some(5.0),
            center: None,
            lo: None,
            hi: None,
            vertices: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringSection {
    pub c1: f64,
    pub w1: Vec<f64>,
    pub c2: f64,
    pub w2: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub tau: Vec<usize>,
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub horizon: Vec<usize>,
}

/// Step size fixed per trial from that trial's realised delay sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaFromDelays {
    pub lipschitz: f64,
    pub radius: f64,
    pub lambda: f64,
}

/// One sweep point with everything but the trial seeds resolved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanPoint {
    pub label: String,
    /// The swept value, if any.
    pub value: Option<f64>,
    pub game: GameConfig,
    pub checkpoints: Vec<usize>,
    pub eta_rule: Option<EtaFromDelays>,
    /// Human-readable resolved parameters (tuned σ, step rule, ...).
    pub resolved: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plan {
    pub points: Vec<PlanPoint>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses a file; relative data paths are resolved against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.stream.path, &mut cfg.delays.path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        self.plan().map(|_| ())
    }

    /// Resolves the sweep into concrete games.
    pub fn plan(&self) -> Result<Plan> {
        let mut issues = Issues::default();
        self.check_top_level(&mut issues);
        let sweep = self.sweep_values(&mut issues);
        let loss = self.loss_model(&mut issues);
        let stream = self.stream_spec(&mut issues);
        let body = self.body(&mut issues);
        self.check_learner(&mut issues);
        self.check_delays(&mut issues);
        issues.finish()?;
        let (loss, stream, body) = (loss.unwrap(), stream.unwrap(), body.unwrap());

        let mut points = Vec::new();
        for (label, value, overrides) in sweep {
            let point = self
                .point(label, value, overrides, loss, &stream, &body)
                .map_err(|e| Error::Config(strip_config(e)))?;
            point.game.validate().map_err(|e| Error::Config(strip_config(e)))?;
            points.push(point);
        }
        Ok(Plan { points })
    }

    fn check_top_level(&self, issues: &mut Issues) {
        if self.name.trim().is_empty() {
            issues.push("name", "must not be empty");
        }
        if self.trials == 0 {
            issues.push("trials", "must be >= 1");
        }
        match (self.kind, self.horizon) {
            (ExperimentKind::ScalingCheck, Some(_)) => {
                issues.push("horizon", "scaling checks take their horizons from sweep.horizon")
            }
            (ExperimentKind::ScalingCheck, None) => {}
            (_, None) => issues.push("horizon", "is required"),
            (_, Some(0)) => issues.push("horizon", "must be >= 1"),
            _ => {}
        }
        if self.regret.checkpoint_every == Some(0) {
            issues.push("regret.checkpoint_every", "must be >= 1");
        }
        if let Some(c) = &self.regret.checkpoints {
            if c.is_empty() || c.contains(&0) || c.windows(2).any(|w| w[0] >= w[1]) {
                issues.push("regret.checkpoints", "must be strictly increasing positive rounds");
            }
        }
    }

    fn sweep_values(&self, issues: &mut Issues) -> Vec<(String, Option<f64>, Overrides)> {
        let s = &self.sweep;
        let expect = |issues: &mut Issues, field: &str, present: bool, needed: bool| {
            if needed && !present {
                issues.push(&format!("sweep.{field}"), &format!("is required for {:?}", self.kind));
            } else if !needed && present {
                issues.push(&format!("sweep.{field}"), &format!("is not used by {:?}", self.kind));
            }
        };
        use ExperimentKind::*;
        expect(issues, "tau", !s.tau.is_empty(), self.kind == DelaySweep);
        expect(issues, "rho", !s.rho.is_empty(), self.kind == CorrelationSweep);
        expect(issues, "horizon", !s.horizon.is_empty(), self.kind == ScalingCheck);
        if s.rho.iter().any(|r| !(-1.0..=1.0).contains(r)) {
            issues.push("sweep.rho", "values must lie in [-1, 1]");
        }
        if s.horizon.contains(&0) {
            issues.push("sweep.horizon", "values must be >= 1");
        }
        let none = Overrides::default();
        match self.kind {
            SingleRun => vec![("run".into(), None, none)],
            DelaySweep => s
                .tau
                .iter()
                .map(|&tau| (format!("tau_{tau}"), Some(tau as f64), Overrides { tau: Some(tau), ..none.clone() }))
                .collect(),
            CorrelationSweep => s
                .rho
                .iter()
                .map(|&rho| (format!("rho_{rho}"), Some(rho), Overrides { rho: Some(rho), ..none.clone() }))
                .collect(),
            ScalingCheck => s
                .horizon
                .iter()
                .map(|&h| (format!("T_{h}"), Some(h as f64), Overrides { horizon: Some(h), ..none.clone() }))
                .collect(),
            BaselineCompare => {
                if self.learner.algorithm == "naive" {
                    issues.push("learner.algorithm", "baseline comparison needs a non-naive learner");
                }
                vec![
                    (self.learner.algorithm.clone(), None, none.clone()),
                    ("naive".into(), None, Overrides { naive: true, ..none }),
                ]
            }
        }
    }

    fn loss_model(&self, issues: &mut Issues) -> Option<LossModel> {
        let l = &self.loss;
        let unit = Coefficient::Uniform([0.0, 1.0]);
        let model = match l.family.as_str() {
            "quadratic" => LossModel::Quadratic { a: l.a.unwrap_or(unit), b: l.b.unwrap_or(unit) },
            "norm" => LossModel::Norm,
            "power" => match l.m {
                Some(m) => LossModel::Power { m },
                None => return issues.none("loss.m", "is required for the power family"),
            },
            "exp" => match (l.m, l.sigma1) {
                (Some(m), Some(sigma1)) => LossModel::Exp { a: l.a.unwrap_or(unit), sigma1, m },
                _ => return issues.none("loss.m, loss.sigma1", "are required for the exp family"),
            },
            other => return issues.none("loss.family", &format!("unknown family '{other}'")),
        };
        let unused = match l.family.as_str() {
            "quadratic" => l.m.is_some() || l.sigma1.is_some(),
            "norm" => l.a.is_some() || l.b.is_some() || l.m.is_some() || l.sigma1.is_some(),
            "power" => l.a.is_some() || l.b.is_some() || l.sigma1.is_some(),
            _ => l.b.is_some(),
        };
        if unused {
            issues.push("loss", &format!("has fields the {} family does not use", l.family));
        }
        match model.validate() {
            Ok(()) => Some(model),
            Err(e) => issues.none("loss", &strip_config(e)),
        }
    }

    fn stream_spec(&self, issues: &mut Issues) -> Option<StreamSpec> {
        let s = &self.stream;
        if s.known_dim == 0 || s.hidden_dim == 0 || s.known_dim < s.hidden_dim {
            return issues.none("stream.known_dim", "dimensions must satisfy known_dim >= hidden_dim >= 1");
        }
        let spec = match s.kind.as_str() {
            "gaussian" => StreamSpec::CorrelatedGaussian {
                mean: s.mean,
                variance: s.variance,
                rho: s.rho,
                known_dim: s.known_dim,
                hidden_dim: s.hidden_dim,
            },
            "pentagon" | "polygon" => {
                let polygon = if s.kind == "pentagon" {
                    ConvexBody::pentagon()
                } else {
                    match s.vertices.clone().map(ConvexBody::polygon) {
                        Some(Ok(p)) => p,
                        Some(Err(e)) => return issues.none("stream.vertices", &e.to_string()),
                        None => return issues.none("stream.vertices", "is required for a polygon stream"),
                    }
                };
                if s.hidden_dim != 2 {
                    return issues.none("stream.hidden_dim", "must be 2 for polygon streams");
                }
                StreamSpec::PolygonUniform {
                    polygon,
                    known_mean: s.mean,
                    known_variance: s.variance,
                    known_dim: s.known_dim,
                }
            }
            "explicit" => {
                let parsed = match (&s.path, &s.rows) {
                    (Some(p), None) => StreamSpec::load_csv(p, s.known_dim, s.hidden_dim),
                    (None, Some(rows)) => explicit_rows(rows, s.known_dim, s.hidden_dim),
                    _ => return issues.none("stream.path", "explicit streams need exactly one of path or rows"),
                };
                match parsed {
                    Ok(spec) => spec,
                    Err(e) => return issues.none("stream.path", &e.to_string()),
                }
            }
            other => return issues.none("stream.kind", &format!("unknown stream '{other}'")),
        };
        if !(-1.0..=1.0).contains(&s.rho) {
            issues.push("stream.rho", "must lie in [-1, 1]");
        }
        if s.context_radius.is_some_and(|r| !(r > 0.0)) {
            issues.push("stream.context_radius", "must be > 0");
        }
        match spec.validate() {
            Ok(()) => Some(spec),
            Err(e) => issues.none("stream", &e.to_string()),
        }
    }

    fn context_bodies(&self) -> Result<Option<ContextBodies>> {
        match (self.stream.kind.as_str(), self.stream.context_radius) {
            ("gaussian", Some(r)) => Ok(Some(ContextBodies {
                known: ConvexBody::centered_ball(self.stream.known_dim, r)?,
                hidden: ConvexBody::centered_ball(self.stream.hidden_dim, r)?,
            })),
            _ => Ok(None),
        }
    }

    fn body(&self, issues: &mut Issues) -> Option<ConvexBody> {
        let b = &self.body;
        let dim = self.stream.hidden_dim.max(1);
        let made = match b.kind.as_str() {
            "ball" => {
                let radius = b.radius.unwrap_or(5.0);
                match &b.center {
                    Some(c) => Vector::new(c.clone()).and_then(|c| ConvexBody::ball(c, radius)),
                    None => ConvexBody::centered_ball(dim, radius),
                }
            }
            "box" => match (&b.lo, &b.hi) {
                (Some(lo), Some(hi)) => Vector::new(lo.clone())
                    .and_then(|lo| Vector::new(hi.clone()).and_then(|hi| ConvexBody::cube(lo, hi))),
                _ => return issues.none("body.lo, body.hi", "are required for a box"),
            },
            "pentagon" => Ok(ConvexBody::pentagon()),
            "polygon" => match &b.vertices {
                Some(v) => ConvexBody::polygon(v.clone()),
                None => return issues.none("body.vertices", "is required for a polygon"),
            },
            "simplex" => ConvexBody::simplex(dim),
            other => return issues.none("body.kind", &format!("unknown body '{other}'")),
        };
        match made {
            Ok(body) if body.dim() == dim => Some(body),
            Ok(body) => issues.none(
                "body",
                &format!("has dimension {}, hidden contexts have {dim}", body.dim()),
            ),
            Err(e) => issues.none("body", &e.to_string()),
        }
    }

    fn check_learner(&self, issues: &mut Issues) {
        let l = &self.learner;
        let stepped = matches!(l.algorithm.as_str(), "ogd" | "omd");
        match l.algorithm.as_str() {
            "ogd" | "omd" | "adversarial" | "naive" => {}
            other => issues.push("learner.algorithm", &format!("unknown algorithm '{other}'")),
        }
        if stepped {
            match l.schedule.as_deref() {
                Some("convex-sqrt") => {
                    if l.sigma.is_none() {
                        issues.push("learner.sigma", "is required by the convex-sqrt schedule");
                    }
                    if l.gamma.is_some() {
                        issues.push("learner.gamma", "is only used by the strongly-convex schedule");
                    }
                }
                Some("strongly-convex") => {
                    match l.gamma {
                        None => issues.push("learner.gamma", "is required by the strongly-convex schedule"),
                        Some(g) if !(g > 0.0) => issues.push("learner.gamma", "must be > 0"),
                        _ => {}
                    }
                    if l.sigma.is_some() {
                        issues.push("learner.sigma", "is only used by the convex-sqrt schedule");
                    }
                }
                Some("constant") => {
                    if !matches!(l.eta, Some(Tuned::Value(v)) if v > 0.0) {
                        issues.push("learner.eta", "the constant schedule needs a positive number");
                    }
                }
                Some(other) => issues.push("learner.schedule", &format!("unknown schedule '{other}'")),
                None => issues.push("learner.schedule", "is required for ogd and omd"),
            }
            if l.schedule.as_deref() != Some("constant") && l.eta.is_some() {
                issues.push("learner.eta", "is only used by the constant schedule and the adversarial learner");
            }
        }
        if let Some(Tuned::Rule(r)) = &l.sigma {
            let ok = (r == "convex" && l.algorithm == "ogd") || (r == "mirror" && l.algorithm == "omd");
            if !ok {
                issues.push("learner.sigma", &format!("rule '{r}' does not apply to {}", l.algorithm));
            }
        }
        if let Some(Tuned::Value(v)) = l.sigma {
            if !(v > 0.0) {
                issues.push("learner.sigma", "must be > 0");
            }
        }
        if l.algorithm == "adversarial" {
            match &l.eta {
                None => issues.push("learner.eta", "is required by the adversarial learner"),
                Some(Tuned::Rule(r)) if r != "delay-sum" => {
                    issues.push("learner.eta", &format!("unknown rule '{r}'"))
                }
                Some(Tuned::Value(v)) if !(*v > 0.0) => issues.push("learner.eta", "must be > 0"),
                _ => {}
            }
            if l.schedule.is_some() || l.sigma.is_some() || l.gamma.is_some() {
                issues.push("learner", "the adversarial learner takes eta, not a schedule");
            }
        }
        if l.algorithm == "naive" {
            let extra = l.schedule.is_some()
                || l.sigma.is_some()
                || l.gamma.is_some()
                || l.eta.is_some()
                || l.beta.is_some()
                || l.influence.is_some();
            if extra {
                issues.push("learner", "the naive learner takes no step or influence parameters");
            }
        }
        if l.map.is_some() && l.algorithm != "omd" {
            issues.push("learner.map", "is only used by omd");
        }
        if let Some(m) = &l.map {
            if !matches!(m.as_str(), "euclidean" | "negative-entropy") {
                issues.push("learner.map", &format!("unknown mirror map '{m}'"));
            }
        }
        match l.influence.as_deref() {
            None | Some("none") => {
                if l.lambda.is_some() || l.influence_scale.is_some() {
                    issues.push("learner.influence", "lambda or influence_scale given without an influence rule");
                }
            }
            Some("match-step") => {
                if l.lambda.is_some() {
                    issues.push("learner.lambda", "is only used by constant influence");
                }
                if l.algorithm == "adversarial" {
                    issues.push("learner.influence", "the adversarial learner uses constant influence");
                }
            }
            Some("constant") => {
                if l.lambda.is_none() {
                    issues.push("learner.lambda", "is required by constant influence");
                }
                if l.influence_scale.is_some() {
                    issues.push("learner.influence_scale", "is only used by match-step influence");
                }
            }
            Some(other) => issues.push("learner.influence", &format!("unknown influence '{other}'")),
        }
        if l.beta.is_some_and(|b| !b.is_finite()) {
            issues.push("learner.beta", "must be finite");
        }
    }

    fn check_delays(&self, issues: &mut Issues) {
        let d = &self.delays;
        match d.kind.as_str() {
            "fixed" => {
                if d.tau.is_none() && self.kind != ExperimentKind::DelaySweep {
                    issues.push("delays.tau", "is required for fixed delays");
                }
                if self.kind == ExperimentKind::DelaySweep && d.tau.is_some() && d.tau != Some(0) {
                    issues.push("delays.tau", "is set by sweep.tau in a delay sweep");
                }
            }
            "uniform" => {
                if !d.d_max.is_some_and(|m| m >= 1) {
                    issues.push("delays.d_max", "must be >= 1 for uniform delays");
                }
                if matches!(self.learner.algorithm.as_str(), "ogd" | "omd") {
                    issues.push("delays.kind", "ogd and omd need a fixed delay");
                }
            }
            "explicit" => {
                if d.path.is_some() == d.delays.is_some() {
                    issues.push("delays.path", "explicit delays need exactly one of path or delays");
                }
            }
            other => issues.push("delays.kind", &format!("unknown delay schedule '{other}'")),
        }
        if self.kind == ExperimentKind::DelaySweep && d.kind != "fixed" {
            issues.push("delays.kind", "a delay sweep needs fixed delays");
        }
    }

    fn delay_schedule(&self, tau: Option<usize>) -> Result<DelaySchedule> {
        let d = &self.delays;
        Ok(match d.kind.as_str() {
            "fixed" => DelaySchedule::Fixed { tau: tau.or(d.tau).unwrap_or(0) },
            "uniform" => DelaySchedule::Adversarial { d_max: d.d_max.unwrap_or(1), seed: 0 },
            _ => match (&d.path, &d.delays) {
                (Some(p), _) => DelaySchedule::load_explicit(p)?,
                (_, Some(v)) => DelaySchedule::Explicit { delays: v.clone() },
                _ => unreachable!("checked in validation"),
            },
        })
    }

    fn point(
        &self,
        label: String,
        value: Option<f64>,
        o: Overrides,
        loss: LossModel,
        stream: &StreamSpec,
        body: &ConvexBody,
    ) -> Result<PlanPoint> {
        let horizon = o.horizon.or(self.horizon).unwrap_or(1);
        let delays = self.delay_schedule(o.tau)?;
        let tau = delays.fixed_tau();
        let mut stream = stream.clone();
        if let (Some(rho), StreamSpec::CorrelatedGaussian { rho: r, .. }) = (o.rho, &mut stream) {
            *r = rho;
        }
        let hidden = self.stream.hidden_dim;
        let radius = body.radius_bound();
        // losses are anchored at contexts inside the learner's range
        let lipschitz = loss.lipschitz_bound(2.0 * radius);
        let mut resolved = vec![
            ("lipschitz_bound".to_string(), lipschitz.to_string()),
            ("radius_bound".to_string(), radius.to_string()),
        ];
        let influence = self.influence(hidden)?;
        let beta = self.learner.beta.map_or(BetaRule::MatchStep, BetaRule::Fixed);
        let mut eta_rule = None;
        let learner = match (o.naive, self.learner.algorithm.as_str()) {
            (true, _) | (_, "naive") => LearnerSpec::Naive,
            (_, "adversarial") => {
                let lambda = match influence.weight {
                    InfluenceWeight::Constant { lambda } => lambda,
                    InfluenceWeight::MatchStep { .. } => 0.0,
                };
                let eta = match &self.learner.eta {
                    Some(Tuned::Value(v)) => *v,
                    _ => {
                        eta_rule = Some(EtaFromDelays { lipschitz, radius, lambda });
                        resolved.push(("eta".into(), "delay-sum rule from each trial's delay sum".into()));
                        // placeholder until the trial's delays are known
                        1.0
                    }
                };
                LearnerSpec::Adversarial { eta, beta, influence }
            }
            (_, algorithm) => {
                let tau = tau.unwrap_or(0);
                let map = match self.learner.map.as_deref() {
                    Some("negative-entropy") => MirrorMap::NegativeEntropy,
                    _ => MirrorMap::Euclidean,
                };
                let schedule = match self.learner.schedule.as_deref() {
                    Some("strongly-convex") => StepSchedule::StronglyConvex {
                        gamma: self.learner.gamma.unwrap_or(1.0),
                        tau,
                    },
                    Some("constant") => StepSchedule::Constant {
                        eta: match self.learner.eta {
                            Some(Tuned::Value(v)) => v,
                            _ => 0.0,
                        },
                    },
                    _ => {
                        let sigma = match &self.learner.sigma {
                            Some(Tuned::Value(v)) => *v,
                            Some(Tuned::Rule(r)) if r == "mirror" => {
                                tune_mirror_sigma(lipschitz, radius, tau.max(1), map.smoothness())?
                            }
                            _ => tune_convex_sigma(lipschitz, radius, tau.max(1))?,
                        };
                        resolved.push(("sigma".into(), sigma.to_string()));
                        StepSchedule::ConvexSqrt { sigma, tau }
                    }
                };
                if algorithm == "omd" {
                    LearnerSpec::Omd { map, schedule, beta, influence }
                } else {
                    LearnerSpec::Ogd { schedule, beta, influence }
                }
            }
        };
        let scoring = match &self.scoring {
            Some(s) => ScoringFn::new(s.c1, Vector::new(s.w1.clone())?, s.c2, Vector::new(s.w2.clone())?)?,
            None => ScoringFn::balanced(self.stream.known_dim, hidden),
        };
        let warmup_rounds = self.learner.warmup_multiplier * tau.unwrap_or(0);
        let game = GameConfig {
            horizon,
            learner,
            body: body.clone(),
            stream,
            context_bodies: self.context_bodies()?,
            delays,
            loss,
            scoring,
            warmup_rounds,
        };
        let checkpoints = self.checkpoints(horizon, warmup_rounds);
        Ok(PlanPoint { label, value, game, checkpoints, eta_rule, resolved })
    }

    fn influence(&self, hidden: usize) -> Result<InfluenceFn> {
        let l = &self.learner;
        let weight = match l.influence.as_deref() {
            Some("match-step") => InfluenceWeight::MatchStep { scale: l.influence_scale.unwrap_or(1.0) },
            Some("constant") => InfluenceWeight::Constant { lambda: l.lambda.unwrap_or(0.0) },
            _ => InfluenceWeight::Constant { lambda: 0.0 },
        };
        let reduction = match &l.reduction {
            Some(rows) => Reduction::Linear(rows.clone()),
            None => Reduction::Truncate,
        };
        InfluenceFn::new(weight, reduction, hidden)
    }

    fn checkpoints(&self, horizon: usize, warmup: usize) -> Vec<usize> {
        let mut out: Vec<usize> = match (&self.regret.checkpoints, self.regret.checkpoint_every) {
            (Some(list), _) => list.clone(),
            (None, every) => {
                let every = every.unwrap_or((horizon / 100).max(1));
                (1..=horizon / every).map(|i| i * every).collect()
            }
        };
        out.retain(|&t| t > warmup && t <= horizon);
        if out.last() != Some(&horizon) {
            out.push(horizon);
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
struct Overrides {
    tau: Option<usize>,
    rho: Option<f64>,
    horizon: Option<usize>,
    naive: bool,
}

fn explicit_rows(rows: &[Vec<f64>], known_dim: usize, hidden_dim: usize) -> Result<StreamSpec> {
    let pairs = rows
        .iter()
        .map(|r| {
            if r.len() != known_dim + hidden_dim {
                return Err(Error::Dimension { expected: known_dim + hidden_dim, actual: r.len() });
            }
            ContextPair::new(Vector::new(r[..known_dim].to_vec())?, Vector::new(r[known_dim..].to_vec())?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StreamSpec::Explicit { rows: pairs })
}

fn strip_config(e: Error) -> String {
    match e {
        Error::Config(m) => m,
        other => other.to_string(),
    }
}

#[derive(Default)]
struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, field: &str, message: &str) {
        self.0.push(format!("{field}: {message}"));
    }

    fn none<T>(&mut self, field: &str, message: &str) -> Option<T> {
        self.push(field, message);
        None
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.0.join("; ")))
        }
    }
}
