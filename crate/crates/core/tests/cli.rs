use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bmeans::cli::SpecFile;
use bmeans::equality::{canonical_transform, EqualityReport, MoebiusParams, Verdict};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn bmeans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmeans")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn check(left: &str, right: &str, extra: &[&str], out: &Path) -> (Output, EqualityReport) {
    let (l, r) = (fixture(left), fixture(right));
    let mut args = vec!["check", "--left", l.to_str().unwrap(), "--right", r.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = bmeans(&args);
    let report = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    (o, report)
}

#[test]
fn eval_identity_and_log() {
    let o = bmeans(&["eval", "--spec", fixture("identity_unit.json").to_str().unwrap(), "--point", "1,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).parse::<f64>().unwrap(), 2.0);

    let o = bmeans(&["eval", "--spec", fixture("log_unit.json").to_str().unwrap(), "--point", "1,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout(&o).parse::<f64>().unwrap() - 2.0).abs() <= 1e-14);
}

#[test]
fn eval_outside_domain_names_the_coordinate() {
    let o = bmeans(&["eval", "--spec", fixture("identity_unit.json").to_str().unwrap(), "--point", "1,11"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error:") && err.contains("11"), "{err}");
}

#[test]
fn invert_plateau_and_log() {
    let o = bmeans(&["invert", "--spec", fixture("jump.json").to_str().unwrap(), "--value", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).parse::<f64>().unwrap(), 0.0);

    let o = bmeans(&["invert", "--spec", fixture("log_unit.json").to_str().unwrap(), "--value", "0"]);
    assert_eq!(stdout(&o).parse::<f64>().unwrap(), 1.0);
}

#[test]
fn check_canonical_pair_is_equal() {
    let dir = tempfile::tempdir().unwrap();
    let (o, report) = check("canonical_left.json", "canonical_right.json", &[], &dir.path().join("r.json"));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report.verdict, Verdict::Equal);
    let theta = MoebiusParams::new(1.0, 2.0, -0.5, 2.0).unwrap();
    assert!(report.params.unwrap().relative_distance(&theta) <= 1e-6);
    assert!(stdout(&o).contains("Equal"));
}

#[test]
fn check_arithmetic_geometric_is_not_equal() {
    let dir = tempfile::tempdir().unwrap();
    let (o, report) = check("arithmetic.json", "geometric.json", &[], &dir.path().join("r.json"));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(report.verdict, Verdict::NotEqual);
    assert_eq!(report.witness.unwrap().len(), 2);
}

#[test]
fn check_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    check("main_plus_left.json", "main_plus_right.json", &["--seed", "7"], &a);
    check("main_plus_left.json", "main_plus_right.json", &["--seed", "7"], &b);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn check_without_regularity_is_a_usage_error() {
    let (l, r) = (fixture("geometric.json"), fixture("quadratic.json"));
    let o = bmeans(&["check", "--left", l.to_str().unwrap(), "--right", r.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regularity"));
}

#[test]
fn diagnose_flags_square_h() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let (l, r) = (fixture("square_h_left.json"), fixture("square_h_right.json"));
    let o = bmeans(&[
        "diagnose",
        "--left",
        l.to_str().unwrap(),
        "--right",
        r.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let hprime = rows
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["name"] == "hprime_r2_constancy")
        .unwrap();
    assert_eq!(hprime["pass"], false);
}

#[test]
fn bad_spec_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"interval": [0, 1], "generator": {"kind": "identity"}, "weights": [], "extra": 1}"#).unwrap();
    let o = bmeans(&["eval", "--spec", path.to_str().unwrap(), "--point", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_canonical_fixtures_agree() {
    let left = SpecFile::load(&fixture("canonical_left.json")).unwrap().to_mean().unwrap();
    let right = SpecFile::load(&fixture("canonical_right.json")).unwrap().to_mean().unwrap();
    let expected = canonical_transform(&left, &MoebiusParams::new(1.0, 2.0, -0.5, 2.0).unwrap()).unwrap();
    for x in left.domain().sample_points(50) {
        let (g, e) = (right.generator().eval(x).unwrap(), expected.generator().eval(x).unwrap());
        assert!((g - e).abs() <= 1e-12 * e.abs().max(1.0));
        for i in 0..2 {
            let (q, e) = (right.weights().value(i, x).unwrap(), expected.weights().value(i, x).unwrap());
            assert!((q - e).abs() <= 1e-12 * e);
        }
    }
}
