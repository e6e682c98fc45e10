use std::path::Path;
use std::process::{Command, Output};

fn doco(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_doco"));
    cmd.args(args);
    match env_out {
        Some(dir) => cmd.env("DOCO_OUT_DIR", dir),
        None => cmd.env_remove("DOCO_OUT_DIR"),
    };
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_presets_names_every_preset() {
    let out = doco(&["list-presets"], None);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["loss-vs-delay", "loss-vs-correlation", "naive-gaussian", "naive-pentagon", "convex-scaling", "strong-delay", "mirror-scaling", "adversarial-scaling", "single-run"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn validate_preset_prints_resolved_sigma() {
    let out = doco(&["validate", "convex-scaling"], None);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("OK convex-scaling"));
    assert!(text.contains("sigma = "));
}

#[test]
fn validate_reports_bad_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "name = \"bad\"\nkind = \"single-run\"\nhorizon = 10\ntrials = 0\n\n\
         [learner]\nalgorithm = \"ogd\"\nschedule = \"strongly-convex\"\n",
    )
    .unwrap();
    let out = doco(&["validate", path.to_str().unwrap()], None);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("trials"), "{err}");
    assert!(err.contains("gamma"), "{err}");
}

#[test]
fn parse_errors_carry_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "name = \"x\"\nkind = \"single-run\"\nhorizon = \n").unwrap();
    let out = doco(&["validate", path.to_str().unwrap()], None);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unknown_config_fails() {
    let out = doco(&["run", "no-such-preset"], None);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("neither a file nor a preset"));
}

#[test]
fn single_run_writes_hand_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = doco(&["run", "single-run", "--out-dir", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("run_trial0.csv")).unwrap();
    assert_eq!(
        csv,
        "t,estimate_0,hidden_0,loss,score_error,delivered\n1,0,2,4,2,1\n2,2,-1,9,3,2\n3,-1,4,25,5,3\n"
    );
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("run.csv").exists());
}

#[test]
fn env_var_sets_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = doco(&["run", "single-run"], Some(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("single-run").join("manifest.json").exists());
}

#[test]
fn overrides_and_thread_count_do_not_change_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = doco(
            &["run", "loss-vs-correlation", "--trials", "4", "--seed", "9", "--threads", threads, "--out-dir", dir.path().to_str().unwrap()],
            None,
        );
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for file in ["rho_0.csv", "rho_0.4.csv", "rho_0.8.csv", "manifest.json"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
    let manifest = std::fs::read_to_string(a.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"base_seed\": 9"));
    assert!(manifest.contains("\"trials\": 4"));
}

#[test]
fn zero_threads_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = doco(&["run", "single-run", "--threads", "0", "--out-dir", dir.path().to_str().unwrap()], None);
    assert!(!out.status.success());
}

#[test]
fn gnuplot_script_references_each_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = doco(&["gnuplot", "loss-vs-delay", "--out-dir", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", stderr(&out));
    let script = std::fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    for label in ["tau_10.csv", "tau_15.csv", "tau_30.csv"] {
        assert!(script.contains(label));
    }
}
