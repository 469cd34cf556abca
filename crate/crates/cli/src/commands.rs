//! Subcommand implementations with the fixed exit-code taxonomy:
//! 0 success, 1 config errors, 2 solver failure, 3 verdict failure,
//! 4 selftest failure, 5 oracle comparison on non-x-only data.

use crate::config::{DataSource, RunConfig};
use crate::report::{diagnostics_csv, verdicts_json, version_stamp, RunDir};
use epsgeo::data::{builtin_pair, xonly_cos_potential, BuiltinData};
use epsgeo::diagnostics::{diagnose_sweep, sweep_verdicts, MonitorConfig};
use epsgeo::field::TorusField;
use epsgeo::geodesic::{solve_geodesic, EpsProblem, PotentialPair};
use epsgeo::grid::make_grid;
use epsgeo::oracle::{compare_fields, manufactured_density, manufactured_truth, ToricOracle};
use epsgeo::solver::{newton_solve, Density, EpsSolve};
use epsgeo::stencil::gradient;
use epsgeo::{GridSpec64, ScalarField64};
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;
pub const EXIT_SELFTEST: i32 = 4;
pub const EXIT_NOT_XONLY: i32 = 5;

fn load_config(path: &Path, out_override: Option<&Path>) -> Result<RunConfig, i32> {
    match RunConfig::load(path) {
        Ok(mut cfg) => {
            if let Some(dir) = out_override {
                cfg.out_dir = dir.to_path_buf();
            }
            Ok(cfg)
        }
        Err(err) => {
            eprintln!("config error: {err}");
            Err(EXIT_CONFIG)
        }
    }
}

fn make_grid_checked(cfg: &RunConfig) -> Result<GridSpec64, i32> {
    make_grid::<f64>(1, cfg.nx, cfg.ny, cfg.nt).map_err(|err| {
        eprintln!("config error: {err}");
        EXIT_CONFIG
    })
}

fn torus_y_variation(f: &TorusField<f64>) -> f64 {
    let mut worst = 0.0f64;
    for ix in 0..f.nx {
        let base = f.get(ix, 0);
        for iy in 1..f.ny {
            worst = worst.max((f.get(ix, iy) - base).abs());
        }
    }
    worst
}

/// Loads the boundary pair; file-based potentials are the xi = 0 layer of a
/// field file with matching torus dimensions.
fn load_pair(cfg: &RunConfig) -> Result<PotentialPair<f64>, i32> {
    let build = |phi0: TorusField<f64>, phi1: TorusField<f64>| {
        PotentialPair::new(phi0, phi1).map_err(|err| {
            eprintln!("data error: {err}");
            EXIT_SOLVER
        })
    };
    match &cfg.data {
        DataSource::Builtin(kind) => builtin_pair::<f64>(*kind, cfg.nx, cfg.ny).map_err(|err| {
            eprintln!("data error: {err}");
            EXIT_SOLVER
        }),
        DataSource::Files { phi0, phi1 } => {
            let mut slices = Vec::new();
            for path in [phi0, phi1] {
                let field = epsgeo::io::read_field::<f64>(path).map_err(|err| {
                    eprintln!("data error: {path:?}: {err}");
                    EXIT_CONFIG
                })?;
                if field.grid().nx != cfg.nx || field.grid().ny != cfg.ny {
                    eprintln!(
                        "data error: {path:?} has torus dimensions {}x{}, config wants {}x{}",
                        field.grid().nx,
                        field.grid().ny,
                        cfg.nx,
                        cfg.ny
                    );
                    return Err(EXIT_CONFIG);
                }
                slices.push(field.layer(0));
            }
            let phi1 = slices.pop().expect("two slices");
            let phi0 = slices.pop().expect("two slices");
            build(phi0, phi1)
        }
    }
}

fn pair_is_x_only(pair: &PotentialPair<f64>) -> bool {
    torus_y_variation(&pair.phi0).max(torus_y_variation(&pair.phi1)) <= 1e-12
}

/// Oracle for sampled x-only potentials: the iy = 0 rows at their own
/// resolution, with an oversampled dual grid.
fn oracle_for_pair(pair: &PotentialPair<f64>, grid: GridSpec64) -> Result<ScalarField64, String> {
    let row = |slice: &TorusField<f64>| -> Vec<f64> {
        (0..slice.nx).map(|ix| slice.get(ix, 0)).collect()
    };
    let oracle =
        ToricOracle::from_samples(&row(&pair.phi0), &row(&pair.phi1)).map_err(|e| e.to_string())?;
    Ok(oracle.field(grid))
}

fn oracle_for_source(
    cfg: &RunConfig,
    pair: &PotentialPair<f64>,
    grid: GridSpec64,
) -> Result<ScalarField64, String> {
    match &cfg.data {
        // Builtins use analytic closures; file data uses its own samples.
        DataSource::Builtin(BuiltinData::XonlyCos) => {
            let oracle = ToricOracle::new(|_| 0.0f64, xonly_cos_potential::<f64>, 8192)
                .map_err(|e| e.to_string())?;
            Ok(oracle.field(grid))
        }
        DataSource::Builtin(BuiltinData::Trivial) => {
            let oracle =
                ToricOracle::new(|_| 0.0f64, |_| 0.0f64, 8192).map_err(|e| e.to_string())?;
            Ok(oracle.field(grid))
        }
        DataSource::Builtin(BuiltinData::ConstantShift) => {
            let oracle =
                ToricOracle::new(|_| 0.0f64, |_| 0.5f64, 8192).map_err(|e| e.to_string())?;
            Ok(oracle.field(grid))
        }
        _ => oracle_for_pair(pair, grid),
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

fn oracle_compare_csvs(
    solves: &[EpsSolve<f64>],
    oracle: &ScalarField64,
) -> Result<(String, String), String> {
    // Convergence of the C0/C1 distance across the schedule.
    let mut convergence = String::from("eps,c0_error,c1_error\n");
    for s in solves {
        let cmp = compare_fields(&s.field, oracle).map_err(|e| e.to_string())?;
        convergence.push_str(&format!(
            "{},{},{}\n",
            fmt(s.eps),
            fmt(cmp.sup),
            fmt(cmp.grad_sup)
        ));
    }

    // Per-slice table at the final regularization value.
    let last = &solves.last().expect("nonempty sweep").field;
    let grid = *last.grid();
    let cmp = compare_fields(last, oracle).map_err(|e| e.to_string())?;
    let mut per_t = String::from("t,c0_error,c1_error\n");
    for it in 0..grid.nt {
        let mut c1 = 0.0f64;
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let node = (ix, iy, it);
                let gf = gradient(last, node);
                let gg = gradient(oracle, node);
                let d = (0..3).map(|i| (gf[i] - gg[i]).powi(2)).sum::<f64>().sqrt();
                c1 = c1.max(d);
            }
        }
        per_t.push_str(&format!(
            "{},{},{}\n",
            fmt(grid.ht * it as f64),
            fmt(cmp.per_slice_sup[it]),
            fmt(c1)
        ));
    }
    Ok((convergence, per_t))
}

pub fn cmd_geodesic(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let cfg = match load_config(config_path, out_override) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let grid = match make_grid_checked(&cfg) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let pair = match load_pair(&cfg) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let x_only = pair_is_x_only(&pair);

    let problem = match EpsProblem::build(pair, grid, cfg.schedule.clone()) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("problem setup failed: {err}");
            return EXIT_SOLVER;
        }
    };
    let solves = match solve_geodesic(&problem, &cfg.solver) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("solve failed: {err}");
            return EXIT_SOLVER;
        }
    };

    let monitor = match MonitorConfig::new(cfg.monitor_coeff) {
        Ok(m) => m,
        Err(err) => {
            eprintln!("config error: {err}");
            return EXIT_CONFIG;
        }
    };
    let rows = match diagnose_sweep(&solves, &monitor, cfg.holder_alpha) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("diagnostics failed: {err}");
            return EXIT_CONFIG;
        }
    };
    let verdicts = match sweep_verdicts(&rows) {
        Ok(v) => v,
        Err(err) => {
            eprintln!("diagnostics failed: {err}");
            return EXIT_CONFIG;
        }
    };

    let mut dir = match RunDir::create(&cfg.out_dir) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("cannot create output directory: {err}");
            return EXIT_CONFIG;
        }
    };
    let emit = (|| -> Result<(), String> {
        dir.write_text("config.ini", &cfg.source_text)
            .map_err(|e| e.to_string())?;
        dir.write_text("VERSION", &version_stamp())
            .map_err(|e| e.to_string())?;
        for (k, s) in solves.iter().enumerate() {
            dir.write_field(&format!("psi_{k:03}.mafld"), &s.field)
                .map_err(|e| e.to_string())?;
        }
        dir.write_text("diagnostics.csv", &diagnostics_csv(&rows))
            .map_err(|e| e.to_string())?;
        dir.write_text("verdicts.json", &verdicts_json(&verdicts))
            .map_err(|e| e.to_string())?;
        if x_only {
            let oracle = oracle_for_source(&cfg, &problem.pair, grid)?;
            let (convergence, per_t) = oracle_compare_csvs(&solves, &oracle)?;
            dir.write_text("oracle_convergence.csv", &convergence)
                .map_err(|e| e.to_string())?;
            dir.write_text("oracle_per_t.csv", &per_t)
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    })();
    if let Err(err) = emit {
        eprintln!("cannot write outputs: {err}");
        return EXIT_CONFIG;
    }
    if let Err(err) = dir.finish() {
        eprintln!("cannot write manifest: {err}");
        return EXIT_CONFIG;
    }

    for v in &verdicts {
        println!(
            "verdict {}: {} (value {:.6e}, threshold {:.6e})",
            v.check,
            if v.pass { "PASS" } else { "FAIL" },
            v.value,
            v.threshold
        );
    }
    if verdicts.iter().all(|v| v.pass) {
        EXIT_OK
    } else {
        EXIT_VERDICT
    }
}

pub fn cmd_oracle_compare(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let cfg = match load_config(config_path, out_override) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let grid = match make_grid_checked(&cfg) {
        Ok(g) => g,
        Err(code) => return code,
    };
    let pair = match load_pair(&cfg) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if !pair_is_x_only(&pair) {
        eprintln!("oracle comparison requires x-only data (y-variation above 1e-12)");
        return EXIT_NOT_XONLY;
    }

    let problem = match EpsProblem::build(pair, grid, cfg.schedule.clone()) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("problem setup failed: {err}");
            return EXIT_SOLVER;
        }
    };
    let solves = match solve_geodesic(&problem, &cfg.solver) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("solve failed: {err}");
            return EXIT_SOLVER;
        }
    };
    let oracle = match oracle_for_source(&cfg, &problem.pair, grid) {
        Ok(o) => o,
        Err(err) => {
            eprintln!("oracle construction failed: {err}");
            return EXIT_SOLVER;
        }
    };
    let (convergence, per_t) = match oracle_compare_csvs(&solves, &oracle) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("comparison failed: {err}");
            return EXIT_SOLVER;
        }
    };

    let mut dir = match RunDir::create(&cfg.out_dir) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("cannot create output directory: {err}");
            return EXIT_CONFIG;
        }
    };
    let write = dir
        .write_text("config.ini", &cfg.source_text)
        .and_then(|_| dir.write_text("VERSION", &version_stamp()))
        .and_then(|_| dir.write_text("oracle_convergence.csv", &convergence))
        .and_then(|_| dir.write_text("oracle_per_t.csv", &per_t))
        .and_then(|_| {
            dir.write_field("oracle.mafld", &oracle)
                .map_err(|e| std::io::Error::other(e.to_string()))
        })
        .and_then(|_| dir.finish());
    if let Err(err) = write {
        eprintln!("cannot write outputs: {err}");
        return EXIT_CONFIG;
    }

    print!("{convergence}");
    EXIT_OK
}

pub fn cmd_solve_ma(config_path: &Path, out_override: Option<&Path>) -> i32 {
    let cfg = match load_config(config_path, out_override) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let grid = match make_grid_checked(&cfg) {
        Ok(g) => g,
        Err(code) => return code,
    };

    let amplitude = 0.1;
    let truth = manufactured_truth(grid, amplitude);
    let rhs = Density::Samples(manufactured_density(grid, amplitude));
    let mut start = truth.clone();
    let bump = ScalarField64::from_fn(grid, |n| {
        let xi = grid.coords(n).2;
        0.2 * xi * (xi - 1.0)
    });
    start.add_scaled(&bump, 1.0);

    let (psi, report) = match newton_solve(&start, &rhs, &cfg.solver) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("solve failed: {err}");
            return EXIT_SOLVER;
        }
    };
    let err_sup = psi.sup_distance(&truth).expect("same grid");

    let mut dir = match RunDir::create(&cfg.out_dir) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("cannot create output directory: {err}");
            return EXIT_CONFIG;
        }
    };
    let mut history = String::from("iteration,sup_residual\n");
    for (k, r) in report.residual_history.iter().enumerate() {
        history.push_str(&format!("{k},{}\n", fmt(*r)));
    }
    let summary = format!(
        "sup_error,{}\nouter_iters,{}\n",
        fmt(err_sup),
        report.outer_iters
    );
    let write = dir
        .write_text("config.ini", &cfg.source_text)
        .and_then(|_| dir.write_text("VERSION", &version_stamp()))
        .and_then(|_| {
            dir.write_field("solution.mafld", &psi)
                .map_err(|e| std::io::Error::other(e.to_string()))
        })
        .and_then(|_| dir.write_text("residual_history.csv", &history))
        .and_then(|_| dir.write_text("summary.csv", &summary))
        .and_then(|_| dir.finish());
    if let Err(err) = write {
        eprintln!("cannot write outputs: {err}");
        return EXIT_CONFIG;
    }
    println!(
        "manufactured solve: sup error {} after {} Newton steps",
        fmt(err_sup),
        report.outer_iters
    );
    EXIT_OK
}
