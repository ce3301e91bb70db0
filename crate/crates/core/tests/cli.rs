use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ttstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttstar")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).expect("write input");
    p
}

fn gen_to(dir: &Path, fixture: &[&str]) -> PathBuf {
    let mut args = vec!["gen"];
    args.extend_from_slice(fixture);
    let o = ttstar(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    write(dir, &format!("{}.json", fixture.join("-")), &stdout(&o))
}

#[test]
fn gen_then_check_passes() {
    let dir = TempDir::new().unwrap();
    for f in [&["takahashi-rank2"][..], &["trivial-r", "3"], &["rank3-halves"], &["vhs-weight0-r3"]] {
        let path = gen_to(dir.path(), f);
        let o = ttstar(&["check", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{f:?}: {}", stdout(&o));
        assert!(stdout(&o).contains("verdict: pass"));
    }
}

#[test]
fn perturbed_fixture_exits_one_and_names_identity() {
    let dir = TempDir::new().unwrap();
    let path = gen_to(dir.path(), &["perturbed-QCU"]);
    let o = ttstar(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("FAIL") && l.contains("QCU")), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 1, "{text}");
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    let o = ttstar(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let o = ttstar(&["check", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = ttstar(&["gen", "no-such-fixture"]);
    assert_eq!(o.status.code(), Some(2));

    let o = ttstar(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = ttstar(&["gen", "random-ttstar", "5", "--seed", "11"]);
    let b = ttstar(&["gen", "random-ttstar", "5", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let c = ttstar(&["gen", "random-ttstar", "5", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);

    let path = write(dir.path(), "r.json", &stdout(&a));
    let p = path.to_str().unwrap();
    for cmd in ["check", "spectrum", "monodromy"] {
        let x = ttstar(&[cmd, p, "--output", "json"]);
        let y = ttstar(&[cmd, p, "--output", "json"]);
        assert_eq!(x.stdout, y.stdout, "{cmd}");
    }
}

#[test]
fn solve_phi_examples() {
    let dir = TempDir::new().unwrap();
    // Q = diag(2, 0): X_ab = Y_ab / (q_b − q_a + 1)
    let ok = write(dir.path(), "ok.json", r#"{"Q":[[2,0],[0,0]],"dU":[[[1,1],[1,1]]]}"#);
    let o = ttstar(&["solve-phi", ok.to_str().unwrap(), "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");
    assert!(v["residuals"]["UCQ"].as_f64().unwrap() <= 1e-12, "{v}");

    let wall = write(dir.path(), "wall.json", r#"{"Q":[[0.5,0],[0,-0.5]],"dU":[[[1,0],[0,1]]]}"#);
    let o = ttstar(&["solve-phi", wall.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn json_output_is_an_array_for_many_inputs_in_order() {
    let dir = TempDir::new().unwrap();
    let paths: Vec<PathBuf> = ["takahashi-rank2", "perturbed-U", "rank3-integers", "perturbed-curvature"]
        .iter()
        .map(|f| gen_to(dir.path(), &[f]))
        .collect();
    let names: Vec<&str> = paths.iter().map(|p| p.to_str().unwrap()).collect();
    let mut args = vec!["check", "--output", "json", "--jobs", "3"];
    args.extend(&names);
    let o = ttstar(&args);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().expect("array");
    let inputs: Vec<&str> = arr.iter().map(|r| r["input"].as_str().unwrap()).collect();
    assert_eq!(inputs, names);
    let verdicts: Vec<&str> = arr.iter().map(|r| r["verdict"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["pass", "fail", "pass", "fail"]);
}

#[test]
fn vhs_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let vhs = write(
        dir.path(),
        "vhs.json",
        r#"{"weight":0,"grading":[[-1,1],[0,1],[1,1]],"k":[[-1,0,0],[0,1,0],[0,0,-1]]}"#,
    );
    let o = ttstar(&["vhs-to-ttstar", vhs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bundle = write(dir.path(), "b.json", &stdout(&o));
    let o = ttstar(&["hodge-to-vhs", bundle.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("h^{0,0} = 1"));
}

#[test]
fn monodromy_steps_below_minimum_is_an_error() {
    let dir = TempDir::new().unwrap();
    let path = gen_to(dir.path(), &["rank3-integers"]);
    let o = ttstar(&["monodromy", path.to_str().unwrap(), "--steps", "10"]);
    assert_eq!(o.status.code(), Some(2));
}
