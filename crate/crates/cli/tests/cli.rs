use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ddsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddsim"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const MINIMAL: &str =
    r#"{"problem": "quadmax", "n": 4, "schedule": "every", "d": 3, "max_iters": 50}"#;

#[test]
fn minimal_run_writes_trace_and_manifest() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", MINIMAL);
    let o = ddsim(tmp.path(), &["run", "--config", "c.json", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(tmp.path().join("o/trace.csv")).unwrap();
    assert!(
        trace.starts_with("t,virtual_time,avg_F,max_F,max_net_err,comm_rounds,max_subgrad_norm")
    );
    assert_eq!(trace.lines().count(), 51);
    let m = manifest(&tmp.path().join("o/manifest.json"));
    assert_eq!(m["config"]["n"], 4);
    assert_eq!(m["config"]["step_a"], "auto");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn override_is_recorded_and_wins_over_file() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"problem": "quadmax", "n": 4, "d": 3, "max_iters": 10, "r": 0.5}"#,
    );
    let o = ddsim(
        tmp.path(),
        &[
            "run",
            "--config",
            "c.json",
            "--out",
            "o",
            "--r",
            "0.0293",
            "--param",
            "schedule=h2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&tmp.path().join("o/manifest.json"));
    assert_eq!(m["config"]["r"], 0.0293);
    assert_eq!(m["overrides"]["r"], 0.0293);
    assert_eq!(m["config"]["schedule"], "h2");
}

#[test]
fn manifest_reproduces_its_csv() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", MINIMAL);
    let first = ddsim(
        tmp.path(),
        &["run", "--config", "c.json", "--out", "a", "--seed", "5"],
    );
    assert!(first.status.success());
    let again = ddsim(
        tmp.path(),
        &["run", "--config", "a/manifest.json", "--out", "b"],
    );
    assert!(again.status.success(), "{}", stderr(&again));
    assert_eq!(
        fs::read(tmp.path().join("a/trace.csv")).unwrap(),
        fs::read(tmp.path().join("b/trace.csv")).unwrap()
    );
}

#[test]
fn config_errors_exit_2_and_name_every_key() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "bad.json",
        r#"{"problem": "quadmax", "n": 4, "schedule": "sometimes", "colour": "red"}"#,
    );
    let o = ddsim(tmp.path(), &["run", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("schedule"), "{err}");
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let o = ddsim(tmp.path(), &["run", "--config", "nope.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn divergence_is_a_runtime_error() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", MINIMAL);
    let o = ddsim(
        tmp.path(),
        &["run", "--config", "c.json", "--param", "step_a=1e308"],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn sweep_n_reports_argmin_and_writes_per_point_traces() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"problem": "quadmax", "d": 3, "m": 24, "n": 1, "epsilon": 0.05,
            "step_a": 0.3, "max_iters": 3000, "record_every": 100, "r": 0.1}"#,
    );
    let o = ddsim(
        tmp.path(),
        &["sweep-n", "--config", "c.json", "--n", "1..3", "--out", "s"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("fastest to target: n = "));
    let table = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    for n in 1..=3 {
        assert!(tmp.path().join(format!("s/runs/{n}/trace.csv")).exists());
        assert!(tmp
            .path()
            .join(format!("s/runs/{n}/manifest.json"))
            .exists());
    }
    let m = manifest(&tmp.path().join("s/manifest.json"));
    assert_eq!(m["sweep"]["values"], serde_json::json!(["1", "2", "3"]));

    let replay = ddsim(
        tmp.path(),
        &["sweep-n", "--config", "s/manifest.json", "--out", "t"],
    );
    assert!(replay.status.success(), "{}", stderr(&replay));
    assert_eq!(
        fs::read(tmp.path().join("s/sweep.csv")).unwrap(),
        fs::read(tmp.path().join("t/sweep.csv")).unwrap()
    );
}

#[test]
fn empty_sweep_set_is_rejected() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "c.json", r#"{"n": 2, "epsilon": 0.1}"#);
    let o = ddsim(tmp.path(), &["sweep-n", "--config", "c.json", "--n", ""]);
    assert_eq!(o.status.code(), Some(2));
    let o = ddsim(
        tmp.path(),
        &["sweep-schedule", "--config", "c.json", "--set", ""],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_partial_failure_exits_4() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "c.json",
        r#"{"problem": "quadmax", "d": 3, "n": 2, "epsilon": 0.05, "max_iters": 20, "step_a": 1e308}"#,
    );
    let o = ddsim(
        tmp.path(),
        &[
            "sweep-schedule",
            "--config",
            "c.json",
            "--set",
            "h1,h2",
            "--out",
            "s",
        ],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let table = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn schedule_sweep_prints_an_ordering() {
    let tmp = TempDir::new().unwrap();
    let o = ddsim(
        tmp.path(),
        &["sweep-schedule", "--set", "h1,h2,p0.3,p1", "--out", "s"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("ordering by time to target: "), "{out}");
    for label in ["h1", "h2", "p0.3", "p1"] {
        assert!(tmp
            .path()
            .join(format!("s/runs/{label}/trace.csv"))
            .exists());
    }
}

#[test]
fn plan_reports_optimal_processor_counts() {
    let tmp = TempDir::new().unwrap();
    let o = ddsim(tmp.path(), &["plan", "--r", "0.0293"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("n_opt = 1/sqrt(r) = 5.84"), "{out}");
    assert!(out.contains("h_opt"));
    assert!(out.contains("C_p"));
    let o = ddsim(tmp.path(), &["plan", "--r", "0.005"]);
    assert!(stdout(&o).contains("n_opt = 1/sqrt(r) = 14.14"));
}

#[test]
fn plan_with_free_communication_is_unbounded() {
    let tmp = TempDir::new().unwrap();
    let o = ddsim(tmp.path(), &["plan", "--r", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("unbounded"));
    let o = ddsim(tmp.path(), &["plan", "--r", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_is_deterministic_and_checks_divisibility() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &'static str| {
        vec![
            "gen", "--kind", "quadmax", "--d", "10", "--m", "40", "--n", "4", "--seed", "1",
            "--out", out,
        ]
    };
    assert!(ddsim(tmp.path(), &args("a.json")).status.success());
    assert!(ddsim(tmp.path(), &args("b.json")).status.success());
    assert_eq!(
        fs::read(tmp.path().join("a.json")).unwrap(),
        fs::read(tmp.path().join("b.json")).unwrap()
    );

    let o = ddsim(
        tmp.path(),
        &[
            "gen", "--kind", "metric", "--d", "5", "--m", "200", "--n", "4", "--out", "m.json",
        ],
    );
    assert!(o.status.success());
    let inst = manifest(&tmp.path().join("m.json"));
    assert_eq!(inst["data"]["s"].as_array().unwrap().len(), 200);

    let o = ddsim(
        tmp.path(),
        &[
            "gen", "--kind", "quadmax", "--m", "41", "--n", "4", "--out", "x.json",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_instance_drives_a_run() {
    let tmp = TempDir::new().unwrap();
    let o = ddsim(
        tmp.path(),
        &[
            "gen", "--kind", "quadmax", "--d", "3", "--m", "12", "--n", "3", "--seed", "2",
            "--out", "i.json",
        ],
    );
    assert!(o.status.success());
    write_config(
        tmp.path(),
        "c.json",
        r#"{"instance": "i.json", "n": 3, "max_iters": 5}"#,
    );
    let o = ddsim(tmp.path(), &["run", "--config", "c.json", "--out", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    write_config(
        tmp.path(),
        "w.json",
        r#"{"instance": "i.json", "n": 4, "max_iters": 5}"#,
    );
    let o = ddsim(tmp.path(), &["run", "--config", "w.json", "--out", "o"]);
    assert_eq!(o.status.code(), Some(2));
}
