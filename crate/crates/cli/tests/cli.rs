use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.json"))
}

fn cinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cinf")).args(args).output().expect("spawn cinf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certified_structure_exits_zero() {
    let o = cinf(&["check", scenario("example31").to_str().unwrap(), "cinf-structure"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("C-infinity structure: certified"));
}

#[test]
fn non_involutive_exits_one_with_witness() {
    let o = cinf(&["check", scenario("noninvolutive").to_str().unwrap(), "involutive"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("REFUTED"));
}

#[test]
fn missing_file_exits_two() {
    let o = cinf(&["reduce", "/nonexistent/scenario.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(code(&cinf(&["frobnicate"])), 2);
    assert_eq!(code(&cinf(&["check", scenario("example31").to_str().unwrap(), "cinf-structure", "--tol", "-1"])), 2);
}

#[test]
fn reduction_certifies_integral_manifolds() {
    let o = cinf(&["reduce", scenario("example31").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("integral manifolds:"));
}

#[test]
fn truncated_script_exits_one_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut sc: Value = serde_json::from_str(&std::fs::read_to_string(scenario("example31")).unwrap()).unwrap();
    sc["reduction"].as_array_mut().unwrap().truncate(1);
    let path = dir.path().join("short.json");
    std::fs::write(&path, serde_json::to_string(&sc).unwrap()).unwrap();
    let report = dir.path().join("report.json");
    let o = cinf(&["reduce", path.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("level 2: I2"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["status"], "refuted");
    assert!(json["reduction"].is_object());
    assert!(report.with_extension("txt").exists());
}

#[test]
fn json_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = cinf(&["factors", scenario("example31").to_str().unwrap(), "--emit-solvable", "--seed", "7", "--report", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn convert_round_trips() {
    let sc = scenario("example31");
    for dir in ["f2mu", "mu2f"] {
        for level in ["1", "2"] {
            let o = cinf(&["convert", "factor", sc.to_str().unwrap(), "--direction", dir, "--level", level]);
            assert_eq!(code(&o), 0, "{}", stdout(&o));
            assert!(stdout(&o).contains("identical (canonical equality)"), "{}", stdout(&o));
        }
    }
}

#[test]
fn verify_rejects_wrong_factor() {
    let o = cinf(&[
        "verify", "factor", scenario("example31").to_str().unwrap(),
        "--level", "2", "--kind", "symmetrizing", "--expr", "x4",
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn airy_emits_solvable_structure() {
    let o = cinf(&["factors", scenario("airy").to_str().unwrap(), "--emit-solvable"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("solvable structure:"));
}
