use std::fs;
use std::process::Command;

use qgroup_lab::cli::report_body;
use qgroup_lab::fmodel::parse_matrix;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qgroup-lab")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn excluded_case_and_bad_flags_exit_2() {
    let (code, _, err) = run(&["check", "--F", "identity:2"]);
    assert_eq!(code, 2);
    assert!(err.contains("excluded"), "{err}");
    assert_eq!(run(&["check", "--F", "identity:3", "--tol", "nope=1"]).0, 2);
    assert_eq!(run(&["check", "--F", "identity:3", "--max-level", "40"]).0, 2);
    assert_eq!(run(&["check", "--F", "identity:3", "--suite", "everything"]).0, 2);
    assert_eq!(run(&["check", "--F", "file:/no/such/file"]).0, 2);
    assert_eq!(run(&["check", "--bogus"]).0, 2);
}

#[test]
fn walk_csv_has_martin_ratio_tail() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("green.csv");
    let (code, out, _) =
        run(&["check", "--F", "suq:0.5:+", "--suite", "walk", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("x,g_x0,g_0x,martin_ratio"));
    let last: f64 = text.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((last - 0.25).abs() < 1e-9);
}

#[test]
fn reports_are_reproducible_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"F": "identity:3", "suites": ["algebra"], "seed": 3, "tol": {"jw": 1e-10}}"#)
        .unwrap();
    let mut bodies = Vec::new();
    for (i, jobs) in ["1", "2"].into_iter().enumerate() {
        let report = dir.path().join(format!("r{i}.json"));
        let (code, _, _) = run(&[
            "check", "--config", config.to_str().unwrap(), "--seed", "5", "--jobs", jobs,
            "--report", report.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&report).unwrap();
        assert!(text.trim_start().starts_with("{\n  \"header\""));
        bodies.push(report_body(&text).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let body: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(body["config"]["seed"], 5);
    assert_eq!(body["config"]["tolerances"]["jw"], 1e-10);
    assert_eq!(body["config"]["fspec"], "identity:3");
}

#[test]
fn failing_tolerance_exits_1() {
    let (code, out, _) = run(&["check", "--F", "identity:3", "--suite", "algebra", "--tol", "jw=0"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn dump_writes_parseable_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let (code, _, _) = run(&[
        "dump", "jones-wenzl", "--F", "identity:3", "--level", "2", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let p = parse_matrix(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(p.dim(), (9, 9));
    let trace: f64 = (0..9).map(|i| p[[i, i]].re).sum();
    assert!((trace - 8.0).abs() < 1e-12);

    let (code, out, _) = run(&["dump", "t-vector", "--F", "suq:0.5:+", "--level", "1"]);
    assert_eq!(code, 0);
    assert_eq!(parse_matrix(&out).unwrap().dim(), (4, 1));
    assert_eq!(run(&["dump", "intertwiner", "--F", "identity:3", "--a", "1", "--b", "1", "--z", "1"]).0, 2);
}

#[test]
fn ratio_table_converges() {
    let (code, out, _) = run(&["table", "ratio", "--F", "identity:3", "--rows", "30"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    assert!((cols[0] - cols[1]).abs() < 1e-9);
    assert!((cols[2] - cols[3]).abs() < 1e-9);
}
