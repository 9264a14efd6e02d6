//! End-to-end runs of the `psp` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn psp(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_psp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn selftest_passes() {
    let o = psp(&["selftest"], None);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn reduce_reads_stdin() {
    let input = r#"{
        "z": [{"kind": "singleton", "point": 1}, {"kind": "singleton", "point": 2}, {"kind": "singleton", "point": 3}],
        "w": [{"kind": "interval", "lo": 0.8, "hi": 1.2}, {"kind": "interval", "lo": 0.8, "hi": 1.2}, {"kind": "interval", "lo": 0.8, "hi": 1.2}]
    }"#;
    let o = psp(&["reduce", "-", "--method", "both"], Some(input));
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("exact:  interval [1.8571, 2.1429]"), "{out}");
    assert!(out.contains("approx: interval"), "{out}");
}

#[test]
fn reduce_rejects_malformed_input() {
    let o = psp(&["reduce", "-"], Some("{\"z\": 3}"));
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed"));
}

#[test]
fn dynamics_reports_the_weight() {
    let o = psp(&["dynamics", "--q", "0.01,0.02,0.0", "--qdot", "0.1,-0.1,0"], None);
    assert!(o.status.success());
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("sum G")).unwrap();
    assert!(line.contains("259.9"), "{line}");
}

#[test]
fn fuzzy_simulation_without_estimators_fails_cleanly() {
    let dir = std::env::temp_dir().join(format!("psp-cli-missing-{}", std::process::id()));
    let o = psp(&["simulate", "--controllers", "t2", "--out", dir.to_str().unwrap(), "--duration", "0.1"], None);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("psp train"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bad_controller_name_is_a_usage_error() {
    let o = psp(&["simulate", "--controllers", "lqr"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_writes_summary_and_table() {
    let dir = std::env::temp_dir().join(format!("psp-cli-sim-{}", std::process::id()));
    let d = dir.to_str().unwrap();
    let o = psp(&["simulate", "--controllers", "pd,ctc", "--snr", "inf,20", "--seeds", "3", "--duration", "0.2", "--out", d], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some("controller,snr_db,seed,sse,unstable,mean_loop_us,p99_loop_us"));
    assert_eq!(lines.count(), 4);
    let table = std::fs::read_to_string(dir.join("sse_table.csv")).unwrap();
    assert!(table.starts_with("snr_db,pd,ctc,t1,t2,ratio_t1_t2\n"));
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("sim/ctc_snr-20_seed-3.json")).unwrap()).unwrap();
    assert_eq!(run["schema_version"], 1);
    assert_eq!(run["steps"], 201);
    std::fs::remove_dir_all(&dir).unwrap();
}
