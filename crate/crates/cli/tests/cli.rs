//! End-to-end tests of the binary: exit codes, run-directory completeness
//! and byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_epsgeo")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn config_body(nx: usize, ny: usize, nt: usize, builtin: &str, out: &str) -> String {
    format!(
        "[grid]\nnx = {nx}\nny = {ny}\nnt = {nt}\n\n[data]\nbuiltin = {builtin}\n\n[schedule]\neps_start = 1e-1\neps_end = 1e-3\nratio = 0.31622776601683794\n\n[output]\ndir = {out}\n"
    )
}

#[test]
fn geodesic_trivial_exits_zero_with_complete_run_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "trivial", out.to_str().unwrap()),
    );
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    // Five schedule values from 1e-1 to 1e-3.
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);

    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    for name in [
        "config.ini",
        "VERSION",
        "diagnostics.csv",
        "verdicts.json",
        "psi_000.mafld",
        "psi_004.mafld",
        "manifest.txt",
    ] {
        assert!(manifest.lines().any(|l| l == name), "missing {name}");
        assert!(out.join(name).exists(), "file {name} not written");
    }
    // Every manifest entry exists on disk.
    for line in manifest.lines() {
        assert!(out.join(line).exists(), "manifest lists missing {line}");
    }

    // The config copy is verbatim.
    assert_eq!(
        std::fs::read(out.join("config.ini")).unwrap(),
        std::fs::read(&cfg).unwrap()
    );
}

#[test]
fn geodesic_with_default_schedule_writes_seven_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let body = format!(
        "[grid]\nnx = 16\nny = 8\nnt = 17\n\n[data]\nbuiltin = trivial\n\n[output]\ndir = {}\n",
        out.to_str().unwrap()
    );
    let cfg = write_config(tmp.path(), "run.ini", &body);
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn geodesic_missing_grid_section_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.ini", "[data]\nbuiltin = trivial\n");
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("[grid]"), "{stderr}");
}

#[test]
fn geodesic_config_error_reports_line_and_section() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.ini", "[grid]\nnx = 16\nny 8\n");
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(
        stderr.contains("line 3") && stderr.contains("grid"),
        "{stderr}"
    );
}

#[test]
fn geodesic_runs_are_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let body = config_body(16, 8, 17, "xonly-cos", out.to_str().unwrap());
        // Identical config contents apart from the output directory.
        let cfg = write_config(tmp.path(), &format!("run{k}.ini"), &body);
        let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
        assert_eq!(output.status.code(), Some(0), "{output:?}");
        dirs.push(out);
    }
    let manifest = std::fs::read_to_string(dirs[0].join("manifest.txt")).unwrap();
    for name in manifest.lines() {
        if name == "config.ini" {
            continue; // differs in the output path line by construction
        }
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(a, b, "file {name} differs between identical runs");
    }
}

#[test]
fn xonly_run_emits_oracle_section() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "xonly-cos", out.to_str().unwrap()),
    );
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    assert!(out.join("oracle_convergence.csv").exists());
    assert!(out.join("oracle_per_t.csv").exists());
}

#[test]
fn generic_2d_run_has_no_oracle_section() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 16, 17, "generic-2d", out.to_str().unwrap()),
    );
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(!out.join("oracle_convergence.csv").exists());
}

#[test]
fn oracle_compare_rejects_2d_data_with_exit_five() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 16, 17, "generic-2d", out.to_str().unwrap()),
    );
    let output = run(&["oracle-compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(5));
}

#[test]
fn oracle_compare_on_xonly_data_reports_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "xonly-cos", out.to_str().unwrap()),
    );
    let output = run(&["oracle-compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.starts_with("eps,c0_error,c1_error"));
    assert_eq!(stdout.lines().count(), 1 + 5);
    assert!(out.join("oracle_per_t.csv").exists());
    // The oracle field itself is exported in the portable format.
    let oracle = epsgeo::io::read_field::<f64>(out.join("oracle.mafld")).unwrap();
    assert_eq!(
        (oracle.grid().nx, oracle.grid().ny, oracle.grid().nt),
        (16, 8, 17)
    );
}

#[test]
fn oracle_compare_equal_potentials_error_within_transform_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // constant-shift data: the geodesic is the exact linear ramp.
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "constant-shift", out.to_str().unwrap()),
    );
    let output = run(&["oracle-compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("oracle_convergence.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let c0: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(c0 <= 5e-3, "final C0 error {c0}");
}

#[test]
fn solve_ma_writes_solution_and_history() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "trivial", out.to_str().unwrap()),
    );
    let output = run(&["solve-ma", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    assert!(out.join("solution.mafld").exists());
    let history = std::fs::read_to_string(out.join("residual_history.csv")).unwrap();
    assert!(history.lines().count() > 2);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    let err: f64 = summary
        .lines()
        .next()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(err <= 1e-2, "manufactured error {err}");
}

#[cfg(not(feature = "fault-injection"))]
#[test]
fn selftest_passes_and_is_deterministic() {
    let a = run(&["selftest"]);
    let b = run(&["selftest"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("second_derivative_fd_match"));
    assert!(text.contains("14 checks passed"));
}

// With the fault-injection feature the corrupted second-derivative formula
// must be caught by name and turn the exit code into 4.
#[cfg(feature = "fault-injection")]
#[test]
fn selftest_catches_injected_fault() {
    let output = run(&["selftest"]);
    assert_eq!(output.status.code(), Some(4));
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("check second_derivative_fd_match") && text.contains("FAIL"));
}

#[test]
fn threads_flag_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let cfg = write_config(
        tmp.path(),
        "run.ini",
        &config_body(16, 8, 17, "trivial", out.to_str().unwrap()),
    );
    let output = run(&[
        "geodesic",
        "--config",
        cfg.to_str().unwrap(),
        "--threads",
        "4",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let output = run(&[
        "geodesic",
        "--config",
        cfg.to_str().unwrap(),
        "--threads",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn file_based_potentials_roundtrip_through_mafld() {
    let tmp = tempfile::tempdir().unwrap();
    // Potentials are the xi = 0 layer of field files.
    let g = epsgeo::grid::make_grid::<f64>(1, 16, 8, 9).unwrap();
    let tau = std::f64::consts::TAU;
    let phi1_field = epsgeo::ScalarField64::from_fn(g, |n| {
        let (x, _, _) = g.coords(n);
        0.05 * (tau * x).cos()
    });
    let phi0_field = epsgeo::ScalarField64::zeros(g);
    let p0 = tmp.path().join("phi0.mafld");
    let p1 = tmp.path().join("phi1.mafld");
    epsgeo::io::write_field(&phi0_field, &p0).unwrap();
    epsgeo::io::write_field(&phi1_field, &p1).unwrap();

    let out = tmp.path().join("run");
    let body = format!(
        "[grid]\nnx = 16\nny = 8\nnt = 17\n\n[data]\nphi0 = {}\nphi1 = {}\n\n[schedule]\neps_start = 1e-1\neps_end = 1e-2\nratio = 0.31622776601683794\n\n[output]\ndir = {}\n",
        p0.to_str().unwrap(),
        p1.to_str().unwrap(),
        out.to_str().unwrap()
    );
    let cfg = write_config(tmp.path(), "run.ini", &body);
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    // x-only file data also gets the oracle section.
    assert!(out.join("oracle_convergence.csv").exists());

    // Missing file: config error.
    let body = body.replace("phi0.mafld", "missing.mafld");
    let cfg = write_config(tmp.path(), "run2.ini", &body);
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn starved_solver_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let body = format!(
        "[grid]\nnx = 16\nny = 8\nnt = 17\n\n[data]\nbuiltin = trivial\n\n[solver]\nmax_outer = 1\n\n[output]\ndir = {}\n",
        out.to_str().unwrap()
    );
    let cfg = write_config(tmp.path(), "run.ini", &body);
    let output = run(&["geodesic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
}
