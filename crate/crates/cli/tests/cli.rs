use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regenstab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report_value(dir: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in report"))
        .to_string()
}

#[test]
fn fixture_sweep_writes_table_and_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &["run", "--fixture", "paper", "--task", "sweep", "--range", "0.1:2.0:39"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,rho,verdict");
    assert_eq!(lines.len(), 1 + 39 + 1);
    let last: Vec<&str> = lines[40].split(',').collect();
    assert_eq!(last[0], "T_star");
    let t: f64 = last[1].parse().unwrap();
    assert!((t - 1.55).abs() < 0.05);
    assert_eq!(report_value(dir.path(), "T_star").parse::<f64>().unwrap(), t);
}

#[test]
fn fixture_analyze_is_stable_at_1_25() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--fixture", "paper", "--task", "analyze", "--T", "1.25"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_value(dir.path(), "verdict"), "stable");
    assert_eq!(report_value(dir.path(), "method"), "analytic");
    assert_eq!(report_value(dir.path(), "seed"), "none");
    assert!(report_value(dir.path(), "assumption.A1").starts_with("pass"));
    let csv = std::fs::read_to_string(dir.path().join("expectation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "i,j,alpha_i,alpha_j,value,stderr");
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(stdout(&o).contains("verdict: stable"));
}

#[test]
fn nonsquare_matrix_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"time_kind": "continuous",
                       "modes": [[[-1, 0], [0, -1]], [[-1, 0, 1], [0, -1, 1]]]},
            "model": {"kind": "maintenance", "T": 1.0, "delta": 0.1, "lambda": 1.0}}"#,
    );
    let o = bin(&["run", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("system.modes[1][0]"), "{}", stderr(&o));
    assert!(!dir.path().join("report.txt").exists());
}

#[test]
fn malformed_json_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"time_kind": "sideways", "modes": []},
            "model": {"kind": "periodic", "segments": []}}"#,
    );
    let o = bin(&["validate", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("system.time_kind"), "{}", stderr(&o));
}

#[test]
fn validate_reports_assumptions() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["validate", "--fixture", "paper"], dir.path());
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("A1: pass"), "{s}");
    assert!(s.contains("config: ok"));

    let o = bin(&["validate", "--fixture", "paper", "--m", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("A1: fail"));
    assert!(stdout(&o).contains("--assert-positive"));

    let o = bin(
        &["validate", "--fixture", "paper", "--m", "3", "--assert-positive"],
        dir.path(),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("A1: asserted"));
}

#[test]
fn jitter_beyond_one_is_model_violation() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["validate", "--fixture", "paper", "--delta", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("model.delta"));
    let o = bin(&["run", "--fixture", "paper", "--delta", "1.5"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn randomized_task_without_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--fixture", "paper", "--task", "simulate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn strict_inconclusive_exits_4_after_writing() {
    let dir = tempfile::tempdir().unwrap();
    // A rotation has spectral radius exactly 1.
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"time_kind": "discrete", "modes": [[[0, -1], [1, 0]]]},
            "model": {"kind": "periodic", "segments": [[1, 3]]},
            "task": "analyze"}"#,
    );
    let o = bin(&["run", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_value(dir.path(), "verdict"), "inconclusive");

    let o = bin(&["run", "--config", &cfg, "--strict"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn floquet_check_task() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"time_kind": "continuous",
                       "modes": [[[-0.4, 0.2], [-0.2, -1.1]], [[-0.4, 0.2], [-0.1, 0.5]]]},
            "model": {"kind": "periodic", "segments": [[1, 1.0], [2, 0.5]]},
            "task": "floquet-check", "m": 4}"#,
    );
    let o = bin(&["run", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_value(dir.path(), "identity_holds"), "true");
    assert_eq!(report_value(dir.path(), "agrees"), "true");
}

#[test]
fn simulate_outputs_and_worker_independence() {
    let root = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for w in ["1", "4"] {
        let dir = root.path().join(w);
        let o = bin(
            &[
                "run", "--fixture", "paper", "--task", "simulate", "--T", "1.25", "--paths",
                "150", "--horizon", "5", "--dt", "0.25", "--seed", "11", "--workers", w,
                "--dump-cycles", "5", "--x0", "1,-0.5",
            ],
            &dir,
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let paths = std::fs::read_to_string(dir.join("paths.csv")).unwrap();
        let header: Vec<&str> = paths.lines().next().unwrap().split(',').collect();
        assert_eq!(header.len(), 1 + 64);
        assert_eq!(header[64], "path_63");
        assert_eq!(paths.lines().count(), 1 + 21);
        let ens = std::fs::read_to_string(dir.join("ensemble.csv")).unwrap();
        assert_eq!(ens.lines().next().unwrap(), "t,mean,stderr");
        let cycles = std::fs::read_to_string(dir.join("cycles.csv")).unwrap();
        assert!(cycles.starts_with("cycle_index,R,mode_1,duration_1"));
        assert_eq!(cycles.lines().count(), 6);
        files.push((paths, ens, cycles));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn finite_support_config_runs_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"time_kind": "discrete", "modes": [[[0.5, 0.1], [0, 0.9]], [[1.1, 0], [0.3, 0.2]]]},
            "model": {"kind": "finite-support", "cycles": [
                {"probability": 0.25, "segments": [[1, 2]]},
                {"probability": 0.75, "segments": [[1, 1], [2, 1]]}]},
            "m": 2}"#,
    );
    let o = bin(&["validate", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("A4: pass"));
    let o = bin(&["run", "--config", &cfg], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(report_value(dir.path(), "method"), "analytic (enumeration)");
    assert_eq!(report_value(dir.path(), "verdict"), "stable");
}

#[test]
fn requires_a_source() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["run", "--fixture", "paper", "--config", "x.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
