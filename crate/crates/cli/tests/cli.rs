use proptest::prelude::*;
use rmz_cli::output::{self, parse_series, series_csv};
use rmz_cli::parse_config;
use rmz_core::driver::{RunResult, RunStatus};
use rmz_core::{Equation, RunConfig};
use std::path::Path;
use std::process::Command;

fn rmz() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmz"))
}

fn golden(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn golden_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = rmz()
        .args(["run", golden("burgers_tiny.cfg").to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let got = std::fs::read_to_string(&out).unwrap();
    let want = std::fs::read_to_string(golden("burgers_tiny.csv")).unwrap();
    let (gh, grows) = parse_series(&got).unwrap();
    let (wh, wrows) = parse_series(&want).unwrap();
    assert_eq!(gh, wh);
    assert_eq!(gh.join(","), "t,energy,E2");
    assert_eq!(grows.len(), wrows.len());
    for (g, w) in grows.iter().zip(&wrows) {
        for (a, b) in g.iter().zip(w) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
    }
    assert_eq!(grows[0][1], 0.25);

    let sidecar = std::fs::read_to_string(dir.path().join("run.coeffs")).unwrap();
    for key in ["switch_time = ", "coefficients = ", "singular_values = ", "cond = ", "status = completed"] {
        assert!(sidecar.contains(key), "{key} missing");
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "N=15\n").unwrap();
    let out = rmz().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N must be even"));

    let out = rmz().args(["run", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = rmz().args(["experiment", "fig9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.cfg");
    std::fs::write(&cfg, "equation=burgers\nN=4\nvariant=full\nt_end=0.1\n").unwrap();
    let out = rmz()
        .args(["run", cfg.to_str().unwrap(), "--out", "/nonexistent/dir/x.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/x.csv"));
}

#[test]
fn oracle_command() {
    let out = rmz().args(["oracle", "burgers", "--t", "0", "--n", "16"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = parse_series(&text).unwrap();
    assert_eq!(header, vec!["t", "energy"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[0][1] - 0.25).abs() < 1e-15);
    let out = rmz().args(["oracle", "burgers", "--t", "1", "--n", "7"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_trajectory_is_header_only() {
    let result = RunResult {
        config: RunConfig::new(Equation::Burgers),
        samples: Vec::new(),
        switch_time: None,
        coefficients: None,
        system: None,
        status: RunStatus::Completed,
        notes: Vec::new(),
        accepted_steps: 0,
        final_state: None,
    };
    assert_eq!(series_csv(&result), "t,energy,E2\n");
}

#[test]
fn series_round_trips() {
    let mut cfg = RunConfig::new(Equation::Burgers);
    cfg.resolved = 8;
    cfg.order = 3;
    cfg.t_end = 0.5;
    let result = rmz_core::run(&cfg).unwrap();
    let (header, rows) = parse_series(&series_csv(&result)).unwrap();
    assert_eq!(header.join(","), "t,energy,E2,E3,E4");
    assert_eq!(rows.len(), result.samples.len());
    for (row, s) in rows.iter().zip(&result.samples) {
        assert_eq!(row[0], s.t);
        assert_eq!(row[1], s.energy);
        assert_eq!(&row[2..], &s.moments[1..]);
    }
    assert_eq!(output::sidecar_path(Path::new("a/b.csv")), Path::new("a/b.coeffs"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parsing_is_total(text in "[a-zA-Z_=#0-9.,\\- \n]{0,80}") {
        // every input is either a config or a keyed diagnostic
        match parse_config(&text) {
            Ok(cfg) => prop_assert!(cfg.validate().is_ok()),
            Err(e) => prop_assert!(!e.to_string().is_empty()),
        }
    }

    #[test]
    fn known_keys_with_noise(n in 0usize..40, order in 0usize..5, tol in -1e-3f64..1e-3) {
        let text = format!("N = {n}\norder={order}\nTOL={tol:e}\n");
        match parse_config(&text) {
            Ok(cfg) => {
                prop_assert_eq!(cfg.resolved, n);
                prop_assert_eq!(cfg.switch_tol, tol);
            }
            Err(e) => prop_assert!(e.line() >= 1 && e.line() <= 3, "{}", e),
        }
    }
}
