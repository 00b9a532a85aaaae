use std::path::Path;

use landau_cli::acceptance::{ECHO_EXPERIMENT, FREE_TRANSPORT_CHECK, KERNEL_BOUNDS, LINEAR_LANDAU, NORM_BATTERY, STABILITY_SCAN};
use landau_cli::config::{parse_str, Scenario};
use landau_cli::scenarios::{run_named, run_scenario, ScenarioError};

fn run_text(text: &str, dir: &Path) -> Result<landau_cli::artifacts::RunReport, ScenarioError> {
    let cfg = parse_str(text).unwrap();
    run_scenario(&cfg, text, dir)
}

fn shortened_linear() -> String {
    LINEAR_LANDAU.replace("t_end = 40.0\nmode", "t_end = 10.0\nmode").replace("window = [5.0, 40.0]", "window = [2.0, 10.0]")
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let text = shortened_linear();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_text(&text, a.path()).unwrap();
    let rb = run_text(&text, b.path()).unwrap();
    assert_eq!(ra.files, rb.files);
    assert_eq!(ra.input_hash, rb.input_hash);
    assert!(ra.files.iter().any(|f| f.path == "field_history.csv"));
    for f in &ra.files {
        let x = std::fs::read(a.path().join(&f.path)).unwrap();
        let y = std::fs::read(b.path().join(&f.path)).unwrap();
        assert_eq!(x, y, "{}", f.path);
        assert_eq!(x.len() as u64, f.bytes);
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["scenario"], "linear_landau");
    assert_eq!(json["config"]["kinetic"]["t_end"].as_f64(), Some(10.0));
    assert!(json["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seed_changes_the_hash() {
    let mut cfg = parse_str(NORM_BATTERY).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = run_scenario(&cfg, NORM_BATTERY, a.path()).unwrap();
    cfg.seed += 1;
    let rb = run_scenario(&cfg, NORM_BATTERY, b.path()).unwrap();
    assert_ne!(ra.input_hash, rb.input_hash);
    assert!(ra.passed && rb.passed);
}

#[test]
fn field_history_format() {
    let dir = tempfile::tempdir().unwrap();
    run_text(&shortened_linear(), dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("field_history.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,k,re_rho,im_rho,abs_rho,re_E,im_E,abs_E"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 8);
    assert_eq!(first[0], "0.0000000000000000e0");
    assert_eq!(first[1], "0");
}

#[test]
fn echo_with_same_sign_modes_is_an_error() {
    let text = ECHO_EXPERIMENT.replace("k_minus_l = -2", "k_minus_l = 2").replace("t_end = 14.0", "t_end = 6.0");
    let dir = tempfile::tempdir().unwrap();
    let err = run_text(&text, dir.path()).unwrap_err();
    assert!(
        matches!(err, ScenarioError::Module { source: landau::Error::NoFutureEcho { .. }, .. }),
        "{err}"
    );
}

#[test]
fn free_transport_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_text(FREE_TRANSPORT_CHECK, dir.path()).unwrap();
    assert!(r.passed, "{:#?}", r.criteria);
    assert!(dir.path().join("free_transport.csv").exists());
}

#[test]
fn stability_margin_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_str(STABILITY_SCAN).unwrap();
    let r = run_named(Scenario::StabilityScan, &cfg, STABILITY_SCAN, dir.path()).unwrap();
    assert!(r.passed, "{:#?}", r.criteria);
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("stability.json")).unwrap()).unwrap();
    assert!(json["kappa"].as_f64().unwrap() > 0.0, "{json}");
}

#[test]
fn attractive_interaction_fails_the_stability_scan() {
    let text = STABILITY_SCAN.replace("amplitude = 1.0", "amplitude = 1.0\nsign = \"attractive\"");
    let dir = tempfile::tempdir().unwrap();
    let r = run_text(&text, dir.path()).unwrap();
    assert!(!r.passed);
}

#[test]
fn kernel_bounds_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_text(KERNEL_BOUNDS, dir.path()).unwrap();
    assert!(r.passed, "{:#?}", r.criteria);
    for f in ["kernel_table.csv", "piecewise.csv", "forward_moments.csv", "backward_moments.csv"] {
        assert!(r.files.iter().any(|e| e.path == f), "{f}");
    }
}
