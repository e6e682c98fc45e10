use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ComparatorMode, ExperimentConfig, ExperimentKind, PlanPoint};
use super::seeds::{trial_seeds, TrialSeeds};
use crate::environment::{run_game, GameSeeds, LearnerSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate, fit_scaling, mean_stderr, regret, regret_curve, write_aggregate_csv, AggregatePoint, CurvePoint,
    ScalingFit, Trajectory, TrialCurve,
};
use crate::feedback::DelaySchedule;
use crate::learners::tune_adversarial_eta;

/// Per-trial numbers kept in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub seeds: TrialSeeds,
    /// Step size when it was tuned from this trial's delays.
    pub eta: Option<f64>,
    pub cumulative_loss: f64,
    pub regret: f64,
    pub delay_sum: u64,
    pub comparator_converged: bool,
    pub score_chain_holds: bool,
    pub kink_gradients: usize,
    pub mirror_saturations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    pub label: String,
    pub value: Option<f64>,
    pub fingerprint: String,
    pub horizon: usize,
    pub curve: Vec<AggregatePoint>,
    pub final_point: AggregatePoint,
    pub delay_sum_mean: f64,
    /// Mean and standard error of `R(T)/√D` across trials.
    pub regret_over_sqrt_delay: (f64, f64),
    /// Exponent of mean regret against `t` over the checkpoints.
    pub fit: Option<ScalingFit>,
    pub trials: Vec<TrialSummary>,
    #[serde(skip)]
    pub trajectories: Vec<Trajectory>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    /// Scaling checks: exponent of final mean regret against the horizon.
    pub horizon_fit: Option<ScalingFit>,
    /// Baseline comparisons: naive over learner cumulative loss at the horizon.
    pub naive_over_learner: Option<f64>,
    pub score_chain_violations: usize,
    pub unconverged_comparators: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: ExperimentKind,
    pub base_seed: u64,
    pub trials: usize,
    pub points: Vec<PointResult>,
    pub summary: Summary,
}

impl ExperimentResult {
    pub fn point(&self, label: &str) -> Option<&PointResult> {
        self.points.iter().find(|p| p.label == label)
    }
}

/// Runs every sweep point. Trials run on `threads` workers (all cores when
/// `None`); results do not depend on the thread count.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentResult> {
    let plan = config.plan()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Logic(e.to_string()))?;
    let keep = config.kind == ExperimentKind::SingleRun || config.regret.write_trajectories;

    let points = plan
        .points
        .iter()
        .map(|point| pool.install(|| run_point(config, point, keep)))
        .collect::<Result<Vec<_>>>()?;

    let horizon_fit = if config.kind == ExperimentKind::ScalingCheck {
        fit_scaling(
            &points
                .iter()
                .map(|p| (p.horizon as f64, p.final_point.regret_mean))
                .collect::<Vec<_>>(),
        )
        .ok()
    } else {
        None
    };
    let naive_over_learner = match (config.kind, points.as_slice()) {
        (ExperimentKind::BaselineCompare, [learner, naive]) => {
            Some(naive.final_point.cum_loss_mean / learner.final_point.cum_loss_mean)
        }
        _ => None,
    };
    let all = || points.iter().flat_map(|p| &p.trials);
    let summary = Summary {
        horizon_fit,
        naive_over_learner,
        score_chain_violations: all().filter(|t| !t.score_chain_holds).count(),
        unconverged_comparators: all().filter(|t| !t.comparator_converged).count(),
    };
    Ok(ExperimentResult {
        name: config.name.clone(),
        kind: config.kind,
        base_seed: config.seed,
        trials: config.trials,
        points,
        summary,
    })
}

struct TrialOutcome {
    summary: TrialSummary,
    curve: Vec<CurvePoint>,
    trajectory: Option<Trajectory>,
}

fn run_point(config: &ExperimentConfig, point: &PlanPoint, keep: bool) -> Result<PointResult> {
    let fingerprint = point.game.fingerprint();
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(point, trial_seeds(config.seed, i), config.regret.comparator, keep))
        .collect::<Result<Vec<_>>>()?;

    let curves: Vec<TrialCurve> = outcomes
        .iter()
        .map(|o| TrialCurve { fingerprint: fingerprint.clone(), points: o.curve.clone() })
        .collect();
    let curve = aggregate(&curves)?;
    let final_point = *curve.last().expect("checkpoints end at the horizon");
    let fit_from = config.regret.fit_from.unwrap_or(0);
    let fit = fit_scaling(
        &curve
            .iter()
            .filter(|p| p.t >= fit_from)
            .map(|p| (p.t as f64, p.regret_mean))
            .collect::<Vec<_>>(),
    )
    .ok();
    let delay_sum_mean = outcomes.iter().map(|o| o.summary.delay_sum as f64).sum::<f64>() / outcomes.len() as f64;
    let ratios: Vec<f64> = outcomes
        .iter()
        .map(|o| o.summary.regret / (o.summary.delay_sum as f64).sqrt())
        .collect();
    let mut trajectories = Vec::new();
    let mut trials = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        trials.push(o.summary);
        trajectories.extend(o.trajectory);
    }
    Ok(PointResult {
        label: point.label.clone(),
        value: point.value,
        fingerprint,
        horizon: point.game.horizon,
        curve,
        final_point,
        delay_sum_mean,
        regret_over_sqrt_delay: mean_stderr(&ratios),
        fit,
        trials,
        trajectories,
    })
}

fn run_trial(point: &PlanPoint, seeds: TrialSeeds, mode: ComparatorMode, keep: bool) -> Result<TrialOutcome> {
    let mut game = point.game.clone();
    if let DelaySchedule::Adversarial { seed, .. } = &mut game.delays {
        *seed = seeds.delays;
    }
    let mut tuned = None;
    if let Some(rule) = point.eta_rule {
        let delay_sum: u64 = game.delays.delays(game.horizon)?.iter().map(|&d| d as u64).sum();
        let value = tune_adversarial_eta(rule.lipschitz, rule.radius, rule.lambda, game.horizon, delay_sum)?;
        if let LearnerSpec::Adversarial { eta, .. } = &mut game.learner {
            *eta = value;
        }
        tuned = Some(value);
    }
    let traj = run_game(&game, GameSeeds { stream: seeds.stream, adversary: seeds.adversary })?;
    traj.replay_check()?;
    let report = regret(&traj, &game.body)?;
    let curve = match mode {
        ComparatorMode::Final => report.curve(&point.checkpoints)?,
        ComparatorMode::Prefix => regret_curve(&traj, &game.body, &point.checkpoints)?,
    };
    let summary = TrialSummary {
        seeds,
        eta: tuned,
        cumulative_loss: report.cumulative_loss,
        regret: report.regret,
        delay_sum: report.delay_sum,
        comparator_converged: report.comparator.converged,
        score_chain_holds: report.score_chain_holds(1e-6),
        kink_gradients: report.warnings.kink_gradients,
        mirror_saturations: report.warnings.mirror_saturations,
    };
    Ok(TrialOutcome { summary, curve, trajectory: keep.then_some(traj) })
}

#[derive(Serialize)]
struct Manifest<'a> {
    name: &'a str,
    kind: ExperimentKind,
    base_seed: u64,
    trials: usize,
    seed_derivation: &'static str,
    config: &'a ExperimentConfig,
    points: Vec<ManifestPoint<'a>>,
    summary: &'a Summary,
}

#[derive(Serialize)]
struct ManifestPoint<'a> {
    label: &'a str,
    file: String,
    value: Option<f64>,
    fingerprint: &'a str,
    resolved: &'a [(String, String)],
    checkpoints: &'a [usize],
    game: &'a crate::environment::GameConfig,
    final_point: &'a AggregatePoint,
    delay_sum_mean: f64,
    regret_over_sqrt_delay: (f64, f64),
    fit: &'a Option<ScalingFit>,
    trials: &'a [TrialSummary],
}

/// Writes one CSV per sweep point, trajectory CSVs when kept, and
/// `manifest.json`. Returns the written paths.
pub fn write_outputs(config: &ExperimentConfig, result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let plan = config.plan()?;
    let mut written = Vec::new();
    let mut manifest_points = Vec::new();
    for (point, planned) in result.points.iter().zip(&plan.points) {
        let file = format!("{}.csv", point.label);
        let path = dir.join(&file);
        let out = fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_aggregate_csv(out, &point.curve)?;
        written.push(path);
        for (i, traj) in point.trajectories.iter().enumerate() {
            let path = dir.join(format!("{}_trial{i}.csv", point.label));
            traj.write_csv(&path)?;
            written.push(path);
        }
        manifest_points.push(ManifestPoint {
            label: &point.label,
            file,
            value: point.value,
            fingerprint: &point.fingerprint,
            resolved: &planned.resolved,
            checkpoints: &planned.checkpoints,
            game: &planned.game,
            final_point: &point.final_point,
            delay_sum_mean: point.delay_sum_mean,
            regret_over_sqrt_delay: point.regret_over_sqrt_delay,
            fit: &point.fit,
            trials: &point.trials,
        });
    }
    let manifest = Manifest {
        name: &result.name,
        kind: result.kind,
        base_seed: result.base_seed,
        trials: result.trials,
        seed_derivation: "splitmix64(base ^ splitmix64(trial)) -> stream, adversary, delays",
        config,
        points: manifest_points,
        summary: &result.summary,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}
