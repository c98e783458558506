use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde_json::Value;

use tanglebound::bound::{BoundProblem, OptimizerSettings, SearchSpace};
use tanglebound::charcurve::{q0, restricted_bound_analytic};
use tanglebound::qstate::{apply_local_unitary, Measure, NamedState, Observable, PureState};

fn tanglebound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanglebound"))
        .args(args)
        .env_remove("TANGLEBOUND_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

fn tangle_row(text: &str, name: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(&format!("{name},"))).unwrap();
    line.split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn tangle_of_state_files() {
    let dir = tempfile::tempdir().unwrap();
    let u = |t: f64, a: f64| {
        let e = Complex64::from_polar(1.0, a);
        Matrix2::new(Complex64::new(t.cos(), 0.0), -e.conj() * t.sin(), e * t.sin(), Complex64::new(t.cos(), 0.0))
    };
    let rotated = apply_local_unitary(&NamedState::Ghz.state(), &u(0.4, 1.0), &u(1.3, -0.3), &u(-0.8, 2.2)).unwrap();
    for (name, state, expected) in [
        ("ghz.json", NamedState::Ghz.state(), 1.0),
        ("w.json", NamedState::W.state(), 0.0),
        ("rotated.json", rotated, 1.0),
    ] {
        let path = write_json(dir.path(), name, &state);
        let out = tanglebound(&["tangle", &path]);
        assert!(out.status.success(), "{name}");
        let text = stdout(&out);
        assert!(text.starts_with("quantity,re,im\n"));
        assert!((tangle_row(&text, "tau3") - expected).abs() < 1e-10, "{name}: {text}");
    }

    let path = write_json(dir.path(), "ghz.json", &NamedState::Ghz.state());
    let json: Value = serde_json::from_slice(&tanglebound(&["tangle", &path, "--format", "json"]).stdout).unwrap();
    assert!((json["tau3"].as_f64().unwrap() - 1.0).abs() < 1e-12, "{json}");
    assert!((json["d1"][0].as_f64().unwrap() - 0.25).abs() < 1e-12, "{json}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let unnormalized = dir.path().join("unnormalized.json");
    fs::write(&unnormalized, r#"{"amplitudes": [[1,0],[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]}"#).unwrap();
    for args in [
        vec!["tangle", bad.to_str().unwrap()],
        vec!["tangle", unnormalized.to_str().unwrap()],
        vec!["curve", "ghzw-tau3", "--grid", "1"],
        vec!["curve", "nonsense"],
        vec!["bound", bad.to_str().unwrap()],
    ] {
        let out = tanglebound(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = Command::new(env!("CARGO_BIN_EXE_tanglebound"))
        .args(["curve", "ghzw-tau3"])
        .env("TANGLEBOUND_THREADS", "none")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(tanglebound(&["tangle", missing.to_str().unwrap()]).status.code(), Some(3));

    // a regular file cannot be a parent directory
    let file = dir.path().join("file");
    fs::write(&file, "").unwrap();
    let target = file.join("curve.csv");
    let out = tanglebound(&["curve", "ghzw-tau3", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn ghzw_curve_rows() {
    let out = tanglebound(&["curve", "ghzw-tau3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("q,value,envelope\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 202);
    let last = rows.last().unwrap();
    assert_eq!((last[0], last[1], last[2]), (1.0, 1.0, 1.0));
    // values are printed with 12 significant digits
    let at_q0 = rows.iter().find(|r| (r[0] - q0()).abs() < 1e-11).unwrap();
    assert!(at_q0[1] <= 1e-10 && at_q0[2].abs() <= 1e-10);
    for r in &rows {
        assert!((r[2] - restricted_bound_analytic(r[0]).unwrap()).abs() < 1e-3, "{r:?}");
    }
}

#[test]
fn csv_is_bit_identical_across_runs() {
    let args = ["curve", "skew", "--omega", "-0.5", "--grid", "21"];
    let (a, b) = (tanglebound(&args), tanglebound(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let problem =
        BoundProblem::projector(&NamedState::Ghz.state(), 0.5, 0.85, Measure::Tau3, SearchSpace::ghz_w_span()).unwrap();
    let path = write_json(dir.path(), "restricted.json", &problem);
    let args = ["bound", path.as_str(), "--grid", "6", "--seed", "4"];
    let (a, b) = (tanglebound(&args), tanglebound(&args));
    assert!(a.status.success());
    assert!(stdout(&a).starts_with("w,epsilon\n"));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(csv_rows(&stdout(&a)).len(), 6);
}

#[test]
fn bound_results() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = NamedState::Ghz.state();
    let restricted = BoundProblem::projector(&ghz, 0.5, 0.5, Measure::Tau3, SearchSpace::ghz_w_span()).unwrap();
    let path = write_json(dir.path(), "restricted.json", &restricted);
    let out = tanglebound(&["bound", &path]);
    assert!(out.status.success());
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json["epsilon"].as_f64().unwrap().abs() < 1e-6);
    assert!(json.get("trace").is_none());
    let traced: Value = serde_json::from_slice(&tanglebound(&["bound", &path, "--trace"]).stdout).unwrap();
    assert!(!traced["trace"].as_array().unwrap().is_empty());

    let fidelity = BoundProblem::fidelity(0.86, Measure::Tau3, SearchSpace::Full).unwrap();
    let path = write_json(dir.path(), "fidelity.json", &fidelity);
    let json: Value = serde_json::from_slice(&tanglebound(&["bound", &path]).stdout).unwrap();
    assert!((json["epsilon"].as_f64().unwrap() - 0.42).abs() <= 0.02, "{json}");

    // <GHZ> = 0 and <W> = 1, searched over the symmetric states
    let pair = BoundProblem::new(
        vec![Observable::projector(&ghz), Observable::projector(&NamedState::W.state())],
        vec![0.0, 1.0],
        Measure::Tau3,
        SearchSpace::Symmetric,
        OptimizerSettings::default(),
    )
    .unwrap();
    let path = write_json(dir.path(), "pair.json", &pair);
    let json: Value = serde_json::from_slice(&tanglebound(&["bound", &path]).stdout).unwrap();
    assert!(json["epsilon"].as_f64().unwrap() < 1e-6);
    assert_eq!(json["status"], "TRIVIAL_ZERO");
}

#[test]
fn space_flag_overrides_the_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let problem = BoundProblem::projector(&NamedState::Ghz.state(), 0.5, 0.85, Measure::Tau3, SearchSpace::Full).unwrap();
    let path = write_json(dir.path(), "p.json", &problem);
    let out = tanglebound(&["bound", &path, "--space", "span", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert!((rows[0][1] - restricted_bound_analytic(0.85).unwrap()).abs() < 1e-3);
}

#[test]
fn reproduce_writes_artifacts_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_tanglebound"))
        .args(["reproduce", "fig1", "--out", out_dir.to_str().unwrap()])
        .env("TANGLEBOUND_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["fig1_curve.csv", "fig1_inset.csv", "fig1_constants.json", "summary.txt", "summary.json"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.lines().all(|l| l.starts_with("PASS ")), "{summary}");
    assert_eq!(stdout(&out), summary);
}

#[test]
fn pure_state_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_json(dir.path(), "s.json", &NamedState::WBar.state());
    let back: PureState = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, NamedState::WBar.state());
}
