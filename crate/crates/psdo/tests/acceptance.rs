//! The twelve acceptance criteria, one pass/fail line each.
//!
//! Criteria run sequentially so that the runtime limits are measured without
//! competing test threads.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use psdo::report::Report;
use psdo::verify::{run_suite, SuiteResult};

struct Line {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn suite(name: &str, seed: u64) -> (SuiteResult, Duration) {
    let t0 = Instant::now();
    let r = run_suite(name, seed).expect("known suite");
    (r, t0.elapsed())
}

fn failures(r: &SuiteResult) -> String {
    let mut bad: Vec<String> = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{} = {:e}", c.name, c.value)).collect();
    if let Some(e) = &r.error {
        bad.push(e.clone());
    }
    bad.join("; ")
}

fn from_suite(id: usize, title: &'static str, name: &str, limit: Option<f64>) -> Line {
    let (r, dt) = suite(name, 0);
    let in_time = limit.map_or(true, |l| dt.as_secs_f64() < l);
    let mut detail = format!("{} checks, {:.2} s", r.checks.len(), dt.as_secs_f64());
    if !r.pass {
        detail.push_str(&format!("; failing: {}", failures(&r)));
    }
    if !in_time {
        detail.push_str(&format!("; over the {} s limit", limit.unwrap_or(0.0)));
    }
    Line { id, title, pass: r.pass && in_time, detail }
}

fn verify_run(out: &Path) -> (Option<i32>, Report) {
    let o = Command::new(env!("CARGO_BIN_EXE_psdo"))
        .args(["verify", "--seed", "0", "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    let text = std::fs::read_to_string(out.join("report.json")).expect("report written");
    (o.status.code(), serde_json::from_str(&text).expect("report parses"))
}

fn negligible_line() -> Line {
    let (a, dt) = suite("negligible", 0);
    let (b, _) = suite("negligible", 1);
    let verdicts = |r: &SuiteResult| r.checks.iter().map(|c| c.pass).collect::<Vec<_>>();
    let stable = verdicts(&a) == verdicts(&b);
    Line {
        id: 11,
        title: "negligible classification",
        pass: a.pass && b.pass && stable,
        detail: format!("seeds 0 and 1, verdicts stable: {stable}, {:.2} s; {}", dt.as_secs_f64(), failures(&a)),
    }
}

fn determinism_line() -> Line {
    let dir = tempfile::tempdir().unwrap();
    let t0 = Instant::now();
    let (c1, r1) = verify_run(&dir.path().join("a"));
    let total = t0.elapsed().as_secs_f64();
    let (c2, r2) = verify_run(&dir.path().join("b"));
    let identical = r1.canonical() == r2.canonical();
    Line {
        id: 12,
        title: "determinism",
        pass: identical && c1 == Some(0) && c2 == Some(0) && total < 600.0,
        detail: format!("byte-identical modulo timestamp: {identical}, exit codes {c1:?}/{c2:?}, suite runtime {total:.1} s"),
    }
}

#[test]
fn acceptance_criteria() {
    let lines = vec![
        from_suite(1, "twisted homogeneity", "twisted-homogeneity", Some(5.0)),
        from_suite(2, "composition remainder decay", "composition", Some(30.0)),
        from_suite(3, "quantize/extract round trip", "roundtrip", None),
        from_suite(4, "finiteness", "finiteness", None),
        from_suite(5, "Toeplitz index", "toeplitz", Some(30.0)),
        from_suite(6, "cone index vs winding", "cone-index", None),
        from_suite(7, "partition bound", "partition-bound", Some(5.0)),
        from_suite(8, "gluing", "gluing", None),
        from_suite(9, "large-parameter invertibility", "large-parameter", None),
        from_suite(10, "infinitesimal operators", "infinitesimal", None),
        negligible_line(),
        determinism_line(),
    ];
    for l in &lines {
        println!("criterion {:>2} [{}] {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
