//! Exit-code contract and file outputs of the `psdo` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use psdo::container;
use psdo_core::linalg;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn psdo(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psdo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("PSDO_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn with_config(cmd: &str, json: &str) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, json).unwrap();
    let out = psdo(&[cmd, "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    (out, dir)
}

fn stock(cmd: &str, name: &str) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join(name);
    let out = psdo(&[cmd, "--config", cfg.to_str().unwrap()], dir.path());
    (out, dir)
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(stock("check", "elliptic-cone.json").0.status.code(), Some(0));
    assert_eq!(stock("check", "circle-symbol.json").0.status.code(), Some(0));
    let (o, d) = stock("check", "degenerate-cone.json");
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(report(d.path())["sections"]["ellipticity"]["conormal_pass"], false);
    let (o, _) = with_config(
        "check",
        r#"{"geometry":{"kind":"cone"},"symbols":{"family":"(p-(0,1))/(p+(0,1))","sigma0":"2"}}"#,
    );
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = with_config("check", r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"sin(x)"}}"#);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_65_with_position() {
    let (o, _) = with_config("check", r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"1 + * xi"}}"#);
    assert_eq!(o.status.code(), Some(65));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column 5"), "{err}");
}

#[test]
fn config_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(psdo(&["check", "--config", missing.to_str().unwrap()], dir.path()).status.code(), Some(64));
    assert_eq!(psdo(&["check"], dir.path()).status.code(), Some(64));
    for bad in [
        r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"1"},"tolerances":{"rank":0}}"#,
        r#"{"geometry":{"kind":"torus"}}"#,
        r#"{"geometry":{"kind":"circle"},"symbols":{"interior":"1"},"extra":true}"#,
        r#"{"geometry":{"kind":"circle","n_x":10},"symbols":{"interior":"1"}"#,
    ] {
        assert_eq!(with_config("check", bad).0.status.code(), Some(64), "{bad}");
    }
    assert_eq!(psdo(&["verify", "--only", "nope"], dir.path()).status.code(), Some(64));
    assert_eq!(psdo(&["frobnicate"], dir.path()).status.code(), Some(64));
}

#[test]
fn quantize_writes_identity_container() {
    let (o, d) = stock("quantize", "identity-cone.json");
    assert_eq!(o.status.code(), Some(0));
    let op = container::read(&d.path().join("operator.psdo")).unwrap();
    assert_eq!(op.matrix.shape(), (64, 64));
    assert!(linalg::max_abs(&(&op.matrix - linalg::eye(64))) <= 1e-13);
    let bytes = std::fs::read(d.path().join("operator.psdo")).unwrap();
    assert_eq!(container::encode(&op), bytes);
}

#[test]
fn quantize_round_trip_within_tolerance() {
    for name in ["circle-symbol.json", "elliptic-cone.json", "edge-symbol.json"] {
        let (o, d) = stock("quantize", name);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let r = report(d.path());
        assert_eq!(r["sections"]["container"]["bit_exact"], true);
        if r["sections"]["roundtrip"]["applicable"] == true {
            assert_eq!(r["sections"]["roundtrip"]["pass"], true, "{name}");
        }
    }
    let (_, d) = stock("quantize", "circle-symbol.json");
    let r = report(d.path());
    assert!(r["sections"]["roundtrip"]["max_error"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn quantize_io_failure_exits_74() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let cfg = configs().join("identity-cone.json");
    let o = psdo(&["quantize", "--config", cfg.to_str().unwrap()], &blocker.join("sub"));
    assert_eq!(o.status.code(), Some(74));
}

#[test]
fn index_exit_codes_and_csv() {
    let (o, d) = stock("index", "toeplitz.json");
    assert_eq!(o.status.code(), Some(0));
    let r = report(d.path());
    assert_eq!(r["sections"]["fredholm"]["index"], -1);
    assert_eq!(r["sections"]["winding"]["winding"], -1);
    let csv = std::fs::read_to_string(d.path().join("index.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("N [nodes],kernel"));
    assert!(rows[1..].iter().all(|r| r.split(',').nth(3) == Some("-1")));

    let (o, d) = stock("index", "identity-cone.json");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(d.path())["sections"]["fredholm"]["index"], 0);
    assert_eq!(stock("index", "degenerate-cone.json").0.status.code(), Some(4));
    assert_eq!(stock("index", "circle-symbol.json").0.status.code(), Some(64));
}

#[test]
fn csv_format_goes_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("toeplitz.json");
    let o = psdo(&["index", "--config", cfg.to_str().unwrap(), "--format", "csv"], dir.path());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.starts_with("N [nodes]"));
}

#[test]
fn verify_only_runs_one_suite_and_seed_changes_draws_only() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = psdo(&["verify", "--only", "partition-bound"], a.path());
    let ob = psdo(&["verify", "--only", "partition-bound", "--seed", "5"], b.path());
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(ob.status.code(), Some(0));
    let (ra, rb) = (report(a.path()), report(b.path()));
    let suites = ra["sections"]["verify"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 1);
    assert_eq!(suites[0]["name"], "partition-bound");
    assert_eq!(rb["seed"], 5);
    let pass = |r: &serde_json::Value| r["sections"]["verify"]["suites"][0]["pass"].clone();
    assert_eq!(pass(&ra), pass(&rb));
    assert_ne!(ra["sections"]["verify"]["suites"][0]["checks"][1]["value"], rb["sections"]["verify"]["suites"][0]["checks"][1]["value"]);
    assert!(a.path().join("timings.json").exists());
}
