use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn chemostat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chemostat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn thresholds_on_persistence_set() {
    let o = chemostat(&["thresholds", "--model", &model("persistence.json"), "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["beta2", "beta3", "R0s", "19.5121951220", "R1s", "4.5028142589", "Persistent"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
}

#[test]
fn thresholds_json() {
    let o = chemostat(&["thresholds", "--model", &model("extinction.json"), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["regime"], "BothExtinct");
    assert!((v["R0s"].as_f64().unwrap() - 0.792_079_207_920_792).abs() < 1e-12);
}

#[test]
fn validate_rejects_gamma_at_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(models().join("persistence_jumps.json")).unwrap()).unwrap();
    m["jumps"][0]["gamma3"] = serde_json::json!(-1.0);
    fs::write(&path, m.to_string()).unwrap();

    let o = chemostat(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gamma_gt_neg1"), "{}", stderr(&o));
    // Every command refuses the invalid model.
    let o = chemostat(&["thresholds", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_accepts_good_model() {
    let o = chemostat(&["validate", "--model", &model("persistence_jumps.json"), "--theta", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("H3"));
}

#[test]
fn malformed_model_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(&path, "{\n  \"S0\": 1.0,\n  \"D\": 0.5,\n  \"mu1\": 0.4\n}\n").unwrap();
    let o = chemostat(&["thresholds", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("mu1") && err.contains("line 4"), "{err}");
}

#[test]
fn unknown_flags_are_errors() {
    let o = chemostat(&["thresholds", "--model", &model("extinction.json"), "--colour"]);
    assert_eq!(o.status.code(), Some(2));
    let o = chemostat(&["simulate", "--model", &model("extinction.json"), "--dt", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_the_flags() {
    let o = chemostat(&["verify", "--help"]);
    let text = stdout(&o);
    for flag in [
        "--model", "--p", "--t-end", "--dt", "--seed", "--paths", "--out", "--tol-rate", "--tol-mean", "--workers",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let o = chemostat(&["sweep", "--help"]);
    assert!(stdout(&o).contains("--p-grid"));
    let o = chemostat(&["validate", "--help"]);
    assert!(stdout(&o).contains("--theta"));
}

#[test]
fn simulate_writes_trajectory_and_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = chemostat(&[
        "simulate", "--model", &model("persistence_jumps.json"), "--t-end", "20", "--dt", "0.01", "--stride", "100",
        "--seed", "3", "--out", out, "--jumps-csv",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = traj.lines().collect();
    assert_eq!(lines[0], "t,S,x,y,meanS,meanx,meany,lnx_over_t,lny_over_t,phi");
    assert_eq!(lines.len(), 1 + 21);
    let jumps = fs::read_to_string(dir.path().join("jumps.csv")).unwrap();
    assert!(jumps.starts_with("t,mark\n"));
    assert!(jumps.lines().count() > 1);
}

#[test]
fn ode_accepts_zero_predator() {
    let dir = tempfile::tempdir().unwrap();
    let o = chemostat(&[
        "ode", "--model", &model("extinction.json"), "--t-end", "5", "--init", "1,0.5,0", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // The stochastic integrator needs a strictly positive start.
    let o = chemostat(&[
        "simulate", "--model", &model("extinction.json"), "--t-end", "5", "--init", "1,0.5,0", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ensemble_outputs_are_reproducible_across_workers() {
    let run = |workers: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = chemostat(&[
            "ensemble", "--model", &model("persistence_jumps.json"), "--t-end", "30", "--paths", "16", "--stride",
            "100", "--seed", "9", "--workers", workers, "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
        (read("ensemble_summary.csv"), read("paths.csv"))
    };
    let a = run("1");
    let b = run("1");
    let c = run("4");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let header = String::from_utf8(a.0).unwrap();
    assert!(header.starts_with("t,S_mean,S_p5,S_p50,S_p95,x_mean"));
}

#[test]
fn sweep_rows_follow_p() {
    let dir = tempfile::tempdir().unwrap();
    let o = chemostat(&[
        "sweep", "--model", &model("imprecise.json"), "--p-grid", "1,0,0.5", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let ps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ps, ["0", "0.5", "1"]);
    let o = chemostat(&["sweep", "--model", &model("imprecise.json"), "--p-grid", "0,1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_refuses_short_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let o = chemostat(&[
        "verify", "--model", &model("extinction.json"), "--t-end", "100", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("shorter than the minimum"));
}

#[test]
fn verify_extinction_set_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = chemostat(&["verify", "--model", &model("extinction.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("x_rate") && text.contains("overall: PASS"), "{text}");
    let verdict = fs::read_to_string(dir.path().join("verdict.csv")).unwrap();
    assert_eq!(verdict.lines().count(), 1 + 3);
}

#[test]
fn verify_fails_with_status_one_when_a_claim_fails() {
    // Zero tolerance on the persistence bound: the 5th percentile of the
    // predator average sits below the asymptotic bound at this horizon.
    let dir = tempfile::tempdir().unwrap();
    let o = chemostat(&[
        "verify", "--model", &model("persistence.json"), "--t-end", "500", "--paths", "40", "--tol-mean", "0",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}
