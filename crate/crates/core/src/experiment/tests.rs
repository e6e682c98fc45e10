use super::*;
use crate::environment::LearnerSpec;
use crate::learners::{tune_convex_sigma, tune_adversarial_eta, StepSchedule};
use crate::Error;

fn config_error(cfg: &ExperimentConfig) -> String {
    match cfg.validate() {
        Err(Error::Config(m)) => m,
        other => panic!("expected a config error, got {other:?}"),
    }
}

fn small(name: &str, trials: usize, horizon: usize) -> ExperimentConfig {
    let mut cfg = load_preset(name).unwrap();
    cfg.trials = trials;
    if cfg.kind == ExperimentKind::ScalingCheck {
        cfg.sweep.horizon = vec![horizon / 4, horizon / 2, horizon];
        cfg.regret.checkpoints = Some(cfg.sweep.horizon.clone());
    } else {
        cfg.horizon = Some(horizon);
    }
    cfg
}

#[test]
fn every_preset_validates() {
    for (name, _) in PRESETS {
        let cfg = load_preset(name).unwrap();
        assert_eq!(&cfg.name, name);
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(preset_description(name).is_some());
    }
    assert!(load_preset("no-such-preset").is_err());
}

#[test]
fn zero_trials_names_the_field() {
    let mut cfg = load_preset("loss-vs-delay").unwrap();
    cfg.trials = 0;
    assert!(config_error(&cfg).contains("trials"));
}

#[test]
fn strongly_convex_needs_gamma() {
    let mut cfg = load_preset("strong-delay").unwrap();
    cfg.learner.gamma = None;
    assert!(config_error(&cfg).contains("learner.gamma"));
}

#[test]
fn all_problems_reported_together() {
    let mut cfg = load_preset("strong-delay").unwrap();
    cfg.trials = 0;
    cfg.learner.gamma = None;
    cfg.loss.family = "cubic".into();
    cfg.sweep.rho = vec![0.5];
    let msg = config_error(&cfg);
    for field in ["trials", "learner.gamma", "loss.family", "sweep.rho"] {
        assert!(msg.contains(field), "{field} missing from: {msg}");
    }
}

#[test]
fn sweep_kind_must_match_sweep_lists() {
    let mut cfg = load_preset("loss-vs-delay").unwrap();
    cfg.sweep.tau.clear();
    assert!(config_error(&cfg).contains("sweep.tau"));
    let mut cfg = load_preset("convex-scaling").unwrap();
    cfg.horizon = Some(10);
    assert!(config_error(&cfg).contains("horizon"));
}

#[test]
fn unknown_keys_are_rejected() {
    let text = load_preset("single-run").unwrap().to_toml() + "\nbogus = 1\n";
    assert!(ExperimentConfig::from_toml(&text).is_err());
}

#[test]
fn toml_round_trip() {
    for (name, _) in PRESETS {
        let cfg = load_preset(name).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}

#[test]
fn convex_sigma_is_resolved_per_point() {
    let plan = load_preset("convex-scaling").unwrap().plan().unwrap();
    assert_eq!(plan.points.len(), 3);
    let expected = tune_convex_sigma(1.0, 5.0, 5).unwrap();
    for p in &plan.points {
        let LearnerSpec::Ogd { schedule: StepSchedule::ConvexSqrt { sigma, tau }, .. } = p.game.learner else {
            panic!("unexpected learner");
        };
        assert_eq!(tau, 5);
        assert_eq!(sigma, expected);
        assert_eq!(p.checkpoints.last(), Some(&p.game.horizon));
    }
}

#[test]
fn delay_sweep_sets_schedule_and_delays() {
    let plan = load_preset("loss-vs-delay").unwrap().plan().unwrap();
    let taus: Vec<Option<usize>> = plan.points.iter().map(|p| p.game.delays.fixed_tau()).collect();
    assert_eq!(taus, vec![Some(10), Some(15), Some(30)]);
    assert_eq!(plan.points[0].label, "tau_10");
    assert_eq!(plan.points[0].checkpoints.first(), Some(&50));
}

#[test]
fn single_run_matches_hand_oracle() {
    let cfg = load_preset("single-run").unwrap();
    let result = run_experiment(&cfg, Some(1)).unwrap();
    let point = &result.points[0];
    let traj = &point.trajectories[0];
    let est: Vec<f64> = traj.rounds.iter().map(|r| r.estimate[0]).collect();
    assert_eq!(est, vec![0.0, 2.0, -1.0]);
    assert_eq!(point.final_point.cum_loss_mean, 38.0);
    // x* is the mean of the anchors, 5/3
    let d_star = (1.0 + 64.0 + 49.0) / 9.0;
    assert!((point.final_point.regret_mean - (38.0 - d_star)).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &result, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("run_trial0.csv")).unwrap();
    assert_eq!(
        csv,
        "t,estimate_0,hidden_0,loss,score_error,delivered\n1,0,2,4,2,1\n2,2,-1,9,3,2\n3,-1,4,25,5,3\n"
    );
}

#[test]
fn outputs_independent_of_thread_count() {
    for name in ["loss-vs-delay", "adversarial-scaling", "naive-pentagon"] {
        let cfg = small(name, 6, 200);
        let one = run_experiment(&cfg, Some(1)).unwrap();
        let many = run_experiment(&cfg, Some(4)).unwrap();
        assert_eq!(one, many);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let fa = write_outputs(&cfg, &one, a.path()).unwrap();
        write_outputs(&cfg, &many, b.path()).unwrap();
        for path in fa {
            let name = path.file_name().unwrap();
            assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(b.path().join(name)).unwrap());
        }
    }
}

#[test]
fn aggregate_csv_layout() {
    let cfg = small("loss-vs-correlation", 3, 100);
    let result = run_experiment(&cfg, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &result, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("rho_0.4.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,cum_loss_mean,cum_loss_stderr,regret_mean,regret_stderr"));
    let ts: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts, vec![50, 100]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["points"].as_array().unwrap().len(), 3);
    assert_eq!(manifest["points"][0]["trials"].as_array().unwrap().len(), 3);
    assert!(!manifest.to_string().contains("thread"));
}

#[test]
fn delay_sum_step_recorded_per_trial() {
    let cfg = small("adversarial-scaling", 3, 200);
    let result = run_experiment(&cfg, None).unwrap();
    for p in &result.points {
        for t in &p.trials {
            let eta = t.eta.unwrap();
            let expected = tune_adversarial_eta(1.0, 5.0, 0.1, p.horizon, t.delay_sum).unwrap();
            assert_eq!(eta, expected);
        }
        let sums: Vec<u64> = p.trials.iter().map(|t| t.delay_sum).collect();
        assert!(sums.windows(2).any(|w| w[0] != w[1]));
    }
    assert!(result.summary.horizon_fit.is_some());
}

#[test]
fn baseline_compare_reports_ratio() {
    let cfg = small("naive-gaussian", 4, 200);
    let result = run_experiment(&cfg, None).unwrap();
    let labels: Vec<&str> = result.points.iter().map(|p| p.label.as_str()).collect();
    assert_eq!(labels, vec!["ogd", "naive"]);
    let ratio = result.summary.naive_over_learner.unwrap();
    let (l, n) = (&result.points[0].final_point, &result.points[1].final_point);
    assert_eq!(ratio, n.cum_loss_mean / l.cum_loss_mean);
    assert_eq!(result.summary.score_chain_violations, 0);
}

#[test]
fn explicit_stream_from_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ctx.csv"), "known,hidden\n1,2\n0,-1\n3,4\n").unwrap();
    let mut cfg = load_preset("single-run").unwrap();
    cfg.stream.rows = None;
    cfg.stream.path = Some("ctx.csv".into());
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let loaded = ExperimentConfig::from_file(&path).unwrap();
    let result = run_experiment(&loaded, Some(1)).unwrap();
    assert_eq!(result.points[0].final_point.cum_loss_mean, 38.0);
}
