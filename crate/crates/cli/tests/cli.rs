use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_delaybandit"))
}

fn run_ok(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn small_run(dir: &Path, extra: &[&str]) {
    let mut cmd = bin();
    cmd.args(["run", "--T", "2000", "--K", "4", "--D", "80", "--seeds", "3", "--base-seed", "5"])
        .arg("--out")
        .arg(dir)
        .args(extra);
    run_ok(&mut cmd);
}

#[test]
fn run_writes_series_summary_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    small_run(&dir, &["--algos", "bdse,sepk,fullinfo_se"]);

    let series = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    assert!(series.starts_with("algo,instance_id,seed,t,cum_regret\n"));
    assert_eq!(series.lines().count(), 1 + 3 * 3 * 2000);

    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("algo,t,mean_regret,std_regret\n"));
    assert_eq!(summary.lines().count(), 1 + 3 * 2000);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["T"], 2000);
    assert_eq!(meta["config"]["algos"].as_array().unwrap().len(), 3);
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    small_run(&a, &["--sense", "reward", "--algos", "bhse,fullinfo_se", "--dist", "bernoulli"]);
    small_run(&b, &["--sense", "reward", "--algos", "bhse,fullinfo_se", "--dist", "bernoulli"]);
    for f in ["series.csv", "summary.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"T": 500, "K": 3, "D": 40, "seeds": 2, "algos": ["fullinfo_se"], "series_every": 100}"#)
        .unwrap();
    let dir = tmp.path().join("out");
    run_ok(bin().args(["run", "--config"]).arg(&cfg).args(["--T", "800", "--fixed-instance", "--out"]).arg(&dir));
    let series = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    let ts: Vec<&str> = series.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(ts, ["100", "200", "300", "400", "500", "600", "700", "800"].repeat(2));
    assert!(series.lines().skip(1).all(|l| l.split(',').nth(1) == Some("inst-0")));
}

#[test]
fn sense_conflicts_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--T", "100", "--dist", "lb:reward_constellation", "--sense", "cost", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("reward"));

    let out = bin().args(["run", "--T", "100", "--algos", "bhse", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_lemmas_reports_every_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let json = tmp.path().join("report.json");
    let stdout = run_ok(bin().args(["verify-lemmas", "--T", "1500", "--R", "3", "--trials", "4", "--out"]).arg(&json));
    assert_eq!(stdout.lines().count(), 10);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["missing"]["upper"]["checks"], 4 * 1500 * 3);
    assert_eq!(report["estimator_order"]["violations"], 0);
}

#[test]
fn gen_instance_writes_lower_bound_construction() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("inst.json");
    run_ok(bin().args(["gen-instance", "--dist", "lb:cost_two_arm:50", "--D", "2000", "--out"]).arg(&path));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["instance"]["K"], 2);
    assert_eq!(doc["instance"]["sense"], "cost");
    let gap = doc["profile"]["max_gap"].as_f64().unwrap();
    assert!((gap - 0.975).abs() < 1e-12);
}
