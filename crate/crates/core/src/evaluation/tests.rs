use super::*;
use crate::losses::LossFamily;
use crate::vector;

fn quadratic_trajectory(anchors: &[f64], estimates: &[f64], a: f64) -> Trajectory {
    let losses: Vec<LossSpec> = anchors
        .iter()
        .map(|&u| LossSpec::new(vector![u], LossFamily::Quadratic { a, b: 0.0 }).unwrap())
        .collect();
    let rounds = estimates
        .iter()
        .zip(&losses)
        .enumerate()
        .map(|(i, (&x, l))| {
            let estimate = vector![x];
            RoundRecord {
                t: i + 1,
                loss: l.eval(&estimate).unwrap(),
                estimate,
                known: vector![0],
                score_error: 0.0,
                score_loss: 0.0,
                delivered: vec![i + 1],
            }
        })
        .collect();
    Trajectory {
        learner: "test".into(),
        rounds,
        losses,
        delays: vec![1; anchors.len()],
        delay_sum: anchors.len() as u64,
        post_horizon: vec![],
        warmup_rounds: 0,
        fingerprint: "f".into(),
        seeds: GameSeeds { stream: 0, adversary: 0 },
        warnings: Warnings::default(),
    }
}

fn wide() -> ConvexBody {
    ConvexBody::centered_ball(1, 10.0).unwrap()
}

#[test]
fn two_round_regret_by_hand() {
    // f1 = x², f2 = (x − 2)²; both played at 0 → 0 + 4; x* = 1, D* = 2
    let traj = quadratic_trajectory(&[0.0, 2.0], &[0.0, 0.0], 1.0);
    traj.replay_check().unwrap();
    let r = regret(&traj, &wide()).unwrap();
    assert_eq!(r.cumulative_loss, 4.0);
    assert_eq!(r.comparator.loss, 2.0);
    assert_eq!(r.regret, 2.0);
    assert_eq!(r.cumulative_series, vec![0.0, 4.0]);
    // fixed comparator x* = 1 costs 1 in each round
    assert_eq!(r.regret_series, vec![-1.0, 2.0]);
    assert!(r.score_chain_holds(1e-6));
}

#[test]
fn playing_the_comparator_has_zero_regret() {
    let traj = quadratic_trajectory(&[0.0, 2.0, 1.0], &[1.0, 1.0, 1.0], 1.0);
    let r = regret(&traj, &wide()).unwrap();
    assert_eq!(r.regret, 0.0);
    assert!(r.regret_series.iter().all(|&v| v == 0.0));
}

#[test]
fn fixed_and_prefix_curves_agree_at_horizon() {
    let traj = quadratic_trajectory(&[0.0, 2.0, 1.0, -1.0], &[0.0, 0.0, 1.0, 0.5], 1.0);
    let r = regret(&traj, &wide()).unwrap();
    let fixed = r.curve(&[2, 4]).unwrap();
    let prefix = regret_curve(&traj, &wide(), &[2, 4]).unwrap();
    assert_eq!(fixed[1], prefix[1]);
    assert_eq!(fixed[0].cumulative_loss, prefix[0].cumulative_loss);
    // x*_4 = 0.5: 0.25 + 2.25 against x*_2 = 1 costing 2
    assert_eq!(fixed[0].regret, 4.0 - 2.5);
    assert!(r.curve(&[0]).is_err());
}

#[test]
fn regret_is_linear_in_curvature() {
    let anchors = [0.3, -1.2, 2.5, 0.7, 1.1];
    let est = [0.0, 0.1, -0.4, 1.0, 0.9];
    let r1 = regret(&quadratic_trajectory(&anchors, &est, 1.0), &wide()).unwrap();
    let r2 = regret(&quadratic_trajectory(&anchors, &est, 2.0), &wide()).unwrap();
    assert!((r2.regret - 2.0 * r1.regret).abs() <= 1e-12);
}

#[test]
fn warmup_rounds_are_excluded() {
    let mut traj = quadratic_trajectory(&[5.0, 0.0, 2.0], &[0.0, 0.0, 0.0], 1.0);
    traj.warmup_rounds = 1;
    let r = regret(&traj, &wide()).unwrap();
    assert_eq!(r.rounds, 2);
    assert_eq!(r.regret, 2.0);
}

#[test]
fn replay_detects_tampering() {
    let mut traj = quadratic_trajectory(&[0.0, 2.0], &[0.0, 0.0], 1.0);
    traj.rounds[1].loss = 3.0;
    assert!(matches!(traj.replay_check(), Err(Error::Logic(_))));
}

#[test]
fn curve_ends_at_full_regret() {
    let traj = quadratic_trajectory(&[0.0, 2.0, 1.0, -1.0], &[0.0, 0.0, 1.0, 0.5], 1.0);
    let curve = regret_curve(&traj, &wide(), &[1, 2, 4]).unwrap();
    assert_eq!(curve[0].regret, 0.0);
    assert_eq!(curve[1].regret, 2.0);
    assert_eq!(curve[2].regret, regret(&traj, &wide()).unwrap().regret);
    assert!(regret_curve(&traj, &wide(), &[5]).is_err());
}

#[test]
fn checkpoints_are_sorted_and_end_at_horizon() {
    let c = log_checkpoints(10, 1000, 5);
    assert_eq!(c, vec![10, 32, 100, 316, 1000]);
    assert_eq!(log_checkpoints(3, 3, 4), vec![3]);
}

#[test]
fn exact_power_law_fit() {
    let pts: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
    let fit = fit_scaling(&pts).unwrap();
    assert!((fit.exponent - 0.5).abs() <= 1e-12);
    assert!((fit.constant - 3.0).abs() <= 1e-9);
    assert!(fit.half_width <= 1e-9);
    assert!((fit.predict(1600.0) - 120.0).abs() <= 1e-8);
}

#[test]
fn noisy_fit_has_positive_width() {
    // slope of ln y on ln x for (1,1), (e,e²), (e², e³) is 1.5
    let e = std::f64::consts::E;
    let fit = fit_scaling(&[(1.0, 1.0), (e, e * e), (e * e, e.powi(3))]).unwrap();
    assert!((fit.exponent - 1.5).abs() <= 1e-12);
    // residuals −1/6, 1/3, −1/6; sse = 1/6, sxx = 2, one dof; t quantile 12.7062
    assert!((fit.half_width - 12.706_204_736 * (1.0f64 / 12.0).sqrt()).abs() <= 1e-6);
}

#[test]
fn fit_drops_nonpositive_points() {
    assert!(matches!(
        fit_scaling(&[(1.0, 1.0), (2.0, 0.0), (3.0, -1.0), (4.0, 2.0)]),
        Err(Error::InsufficientData(_))
    ));
    let fit = fit_scaling(&[(1.0, 1.0), (2.0, -3.0), (2.0, 2.0), (4.0, 4.0)]).unwrap();
    assert_eq!(fit.points_used, 3);
}

fn curve(fp: &str, values: &[(usize, f64, f64)]) -> TrialCurve {
    TrialCurve {
        fingerprint: fp.into(),
        points: values
            .iter()
            .map(|&(t, l, r)| CurvePoint { t, cumulative_loss: l, regret: r })
            .collect(),
    }
}

#[test]
fn aggregate_mean_and_stderr() {
    let trials = [curve("a", &[(10, 4.0, 1.0)]), curve("a", &[(10, 6.0, 1.0)])];
    let agg = aggregate(&trials).unwrap();
    assert_eq!(agg[0].cum_loss_mean, 5.0);
    assert_eq!(agg[0].cum_loss_stderr, 1.0);
    assert_eq!(agg[0].regret_stderr, 0.0);

    let mut buf = Vec::new();
    write_aggregate_csv(&mut buf, &agg).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,cum_loss_mean,cum_loss_stderr,regret_mean,regret_stderr");
}

#[test]
fn aggregate_rejects_mixed_configurations() {
    let mixed = [curve("a", &[(10, 4.0, 1.0)]), curve("b", &[(10, 6.0, 1.0)])];
    assert!(aggregate(&mixed).is_err());
    let shifted = [curve("a", &[(10, 4.0, 1.0)]), curve("a", &[(11, 6.0, 1.0)])];
    assert!(aggregate(&shifted).is_err());
    assert!(aggregate(&[]).is_err());
}

#[test]
fn trajectory_csv_has_one_row_per_round() {
    let traj = quadratic_trajectory(&[0.0, 2.0], &[0.0, 0.0], 1.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    traj.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,estimate_0,hidden_0,loss,score_error,delivered");
    assert_eq!(lines[2], "2,0,2,4,0,2");
}
