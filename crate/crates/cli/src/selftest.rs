//! Fixed-seed self-test over the eigenvalue calculus and field stencils.
//! Output is byte-deterministic; the exit code is 4 on the first failure.

use epsgeo::eigen::{
    complement_projector, decompose, perturbed_hessian, top_eigenvalue_gradient,
    top_eigenvalue_second_derivative, SymMatrix,
};
use epsgeo::field::ScalarField;
use epsgeo::grid::make_grid;
use epsgeo::stencil::{complex_hessian, real_hessian, second_diff};
use epsgeo::weight::GradientWeight;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CheckResult = Result<(), String>;

fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix<f64> {
    SymMatrix::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

fn random_gapped_sym(rng: &mut impl Rng, n: usize) -> SymMatrix<f64> {
    // Gapped diagonal rotated through random planes.
    let mut evs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    evs[0] = evs[1] + 0.2 + rng.gen_range(0.0..2.0);
    let mut full = [[0.0f64; 4]; 4];
    for (i, row) in full.iter_mut().enumerate().take(n) {
        row[i] = evs[i];
    }
    for p in 0..n {
        for q in (p + 1)..n {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let (s, c) = theta.sin_cos();
            let snap = full;
            for k in 0..n {
                full[k][p] = c * snap[k][p] + s * snap[k][q];
                full[k][q] = -s * snap[k][p] + c * snap[k][q];
            }
            let snap = full;
            for k in 0..n {
                full[p][k] = c * snap[p][k] + s * snap[q][k];
                full[q][k] = -s * snap[p][k] + c * snap[q][k];
            }
        }
    }
    SymMatrix::from_fn(n, |i, j| 0.5 * (full[i][j] + full[j][i]))
}

fn lambda1(s: &SymMatrix<f64>) -> f64 {
    decompose(s).unwrap().eigenvalue(0)
}

fn check_eigen_reconstruction(n: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(101 + n as u64);
    for case in 0..200 {
        let s = random_sym(&mut rng, n, 4.0);
        let es = decompose(&s).map_err(|e| e.to_string())?;
        let scale = 1.0 + s.frobenius_norm();
        let res = es.reconstruction_residual(&s);
        if res > 1e-10 * scale {
            return Err(format!("case {case}: reconstruction residual {res:.3e}"));
        }
        let orth = es.orthonormality_residual();
        if orth > 1e-10 {
            return Err(format!("case {case}: orthonormality residual {orth:.3e}"));
        }
    }
    Ok(())
}

fn check_tie_convention() -> CheckResult {
    let es = decompose(&SymMatrix::<f64>::identity(3)).map_err(|e| e.to_string())?;
    for k in 0..3 {
        for i in 0..3 {
            let expect = if i == k { 1.0 } else { 0.0 };
            if (es.eigenvector(k)[i] - expect).abs() > 1e-14 {
                return Err(format!("identity eigenvectors deviate at ({k},{i})"));
            }
        }
    }
    Ok(())
}

fn check_projector_kernel() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in 0..200 {
        let mut v = [0.0f64; 4];
        for x in v.iter_mut() {
            *x = rng.gen_range(-1.0..1.0);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        let b = complement_projector(&v).map_err(|e| e.to_string())?;
        let bv = b.apply(&v);
        if bv.iter().any(|x| x.abs() > 1e-12) {
            return Err(format!(
                "case {case}: projector does not annihilate its vector"
            ));
        }
    }
    Ok(())
}

fn check_top_eigenvalue_preserved() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..200 {
        let h = random_gapped_sym(&mut rng, 4);
        let es = decompose(&h).map_err(|e| e.to_string())?;
        let b = complement_projector(es.eigenvector(0)).map_err(|e| e.to_string())?;
        let phi = perturbed_hessian(&h, &b).map_err(|e| e.to_string())?;
        let diff = (lambda1(&phi) - es.eigenvalue(0)).abs();
        if diff > 1e-10 {
            return Err(format!("case {case}: top eigenvalue moved by {diff:.3e}"));
        }
    }
    Ok(())
}

fn check_top_eigenvalue_dominated() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let h = random_gapped_sym(&mut rng, 4);
    let b = complement_projector(decompose(&h).unwrap().eigenvector(0)).unwrap();
    for case in 0..500 {
        let perturbed = h.add_scaled(&random_sym(&mut rng, 4, 0.3), 1.0).unwrap();
        let phi = perturbed_hessian(&perturbed, &b).unwrap();
        if lambda1(&phi) > lambda1(&perturbed) + 1e-12 {
            return Err(format!(
                "case {case}: projector shift raised the top eigenvalue"
            ));
        }
    }
    Ok(())
}

fn check_gradient_fd() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for case in 0..100 {
        let n = if case % 2 == 0 { 3 } else { 4 };
        let s = random_gapped_sym(&mut rng, n);
        let es = decompose(&s).unwrap();
        let p = random_sym(&mut rng, n, 1.0);
        let grad = top_eigenvalue_gradient(&es).map_err(|e| e.to_string())?;
        let mut directional = 0.0;
        for i in 0..n {
            for j in 0..n {
                directional += grad.get(i, j) * p.get(i, j);
            }
        }
        let t = 1e-5;
        let fd = (lambda1(&s.add_scaled(&p, t).unwrap()) - lambda1(&s.add_scaled(&p, -t).unwrap()))
            / (2.0 * t);
        let rel = (fd - directional).abs() / directional.abs().max(0.01);
        if rel > 1e-6 {
            return Err(format!("case {case}: first-derivative mismatch {rel:.3e}"));
        }
    }
    Ok(())
}

fn check_second_derivative_fd() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..100 {
        let n = if case % 2 == 0 { 3 } else { 4 };
        let s = random_gapped_sym(&mut rng, n);
        let es = decompose(&s).unwrap();
        let p = random_sym(&mut rng, n, 1.0);
        let d2 = top_eigenvalue_second_derivative(&es, &p, &p).map_err(|e| e.to_string())?;
        let t = 1e-3;
        let l = |u: f64| lambda1(&s.add_scaled(&p, u).unwrap());
        let fd = (-l(2.0 * t) + 16.0 * l(t) - 30.0 * l(0.0) + 16.0 * l(-t) - l(-2.0 * t))
            / (12.0 * t * t);
        let rel = (fd - d2).abs() / d2.abs().max(0.05);
        if rel > 1e-5 {
            return Err(format!("case {case}: second-derivative mismatch {rel:.3e}"));
        }
    }
    Ok(())
}

fn check_second_derivative_psd() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for case in 0..200 {
        let s = random_gapped_sym(&mut rng, 4);
        let es = decompose(&s).unwrap();
        let p = random_sym(&mut rng, 4, 1.0);
        let d2 = top_eigenvalue_second_derivative(&es, &p, &p).unwrap();
        if d2 < -1e-12 {
            return Err(format!(
                "case {case}: second-derivative form negative: {d2:.3e}"
            ));
        }
    }
    Ok(())
}

fn check_weight_identities() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for case in 0..5000 {
        let s_max: f64 = rng.gen_range(0.0..10.0);
        let s: f64 = rng.gen_range(0.0..=1.0) * s_max;
        let w = GradientWeight::new(s, s_max).unwrap().evaluate();
        if (w.second - 2.0 * w.first * w.first).abs() > 1e-12 {
            return Err(format!("case {case}: identity violated"));
        }
        if w.first < 1.0 / (2.0 + 2.0 * s_max) - 1e-15 || w.first > 0.5 + 1e-15 {
            return Err(format!("case {case}: derivative bound violated"));
        }
    }
    Ok(())
}

fn check_stencil_quadratic_exactness() -> CheckResult {
    let g = make_grid::<f64>(1, 8, 8, 9).unwrap();
    let f = ScalarField::from_fn(g, |n| {
        let xi = g.coords(n).2;
        2.0 * xi * xi
    });
    for it in 1..8 {
        let d = second_diff(
            &f,
            (3, 3, it),
            (epsgeo::grid::Dir::Xi, epsgeo::grid::Dir::Xi),
        )
        .map_err(|e| e.to_string())?;
        if (d - 4.0).abs() > 1e-10 {
            return Err(format!("strip second difference {d} at layer {it}"));
        }
    }
    Ok(())
}

fn check_hessian_trace_identity() -> CheckResult {
    let g = make_grid::<f64>(1, 16, 16, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let f = ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0));
    for node in [(1usize, 2usize, 3usize), (5, 9, 4), (15, 0, 6)] {
        let s = complex_hessian(&f, node).map_err(|e| e.to_string())?;
        let h = real_hessian(&f, node).map_err(|e| e.to_string())?;
        let lhs = 4.0 * (s.a - 1.0);
        let rhs = h.get(0, 0) + h.get(1, 1);
        if (lhs - rhs).abs() > 1e-9 * (1.0 + rhs.abs()) {
            return Err(format!("trace identity off at {node:?}"));
        }
    }
    Ok(())
}

fn check_slot_determinant_bound() -> CheckResult {
    let g = make_grid::<f64>(1, 8, 8, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let f = ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0));
    for node in g.interior_nodes() {
        let s = complex_hessian(&f, node).map_err(|e| e.to_string())?;
        if s.det() > s.a * s.c + 1e-12 {
            return Err(format!("determinant exceeds diagonal product at {node:?}"));
        }
    }
    Ok(())
}

fn check_field_file_roundtrip() -> CheckResult {
    let g = make_grid::<f64>(1, 8, 8, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let f = ScalarField::from_fn(g, |_| rng.gen_range(-1e3..1e3));
    let path = std::env::temp_dir().join(format!("epsgeo-selftest-{}.mafld", std::process::id()));
    epsgeo::io::write_field(&f, &path).map_err(|e| e.to_string())?;
    let back = epsgeo::io::read_field::<f64>(&path).map_err(|e| e.to_string())?;
    std::fs::remove_file(&path).ok();
    if !f.values().iter().zip(back.values()).all(|(a, b)| a == b) {
        return Err("round trip not bit-exact".to_string());
    }
    Ok(())
}

/// Runs every check, printing one line per check; returns the exit code.
pub fn cmd_selftest() -> i32 {
    let checks: Vec<(&str, Box<dyn Fn() -> CheckResult>)> = vec![
        (
            "eigen_reconstruction_3x3",
            Box::new(|| check_eigen_reconstruction(3)),
        ),
        (
            "eigen_reconstruction_4x4",
            Box::new(|| check_eigen_reconstruction(4)),
        ),
        ("eigen_tie_convention", Box::new(check_tie_convention)),
        ("projector_kernel", Box::new(check_projector_kernel)),
        (
            "top_eigenvalue_preserved",
            Box::new(check_top_eigenvalue_preserved),
        ),
        (
            "top_eigenvalue_dominated",
            Box::new(check_top_eigenvalue_dominated),
        ),
        ("gradient_fd_match", Box::new(check_gradient_fd)),
        (
            "second_derivative_fd_match",
            Box::new(check_second_derivative_fd),
        ),
        (
            "second_derivative_psd",
            Box::new(check_second_derivative_psd),
        ),
        ("weight_identities", Box::new(check_weight_identities)),
        (
            "stencil_quadratic_exactness",
            Box::new(check_stencil_quadratic_exactness),
        ),
        (
            "hessian_trace_identity",
            Box::new(check_hessian_trace_identity),
        ),
        (
            "slot_determinant_bound",
            Box::new(check_slot_determinant_bound),
        ),
        ("field_file_roundtrip", Box::new(check_field_file_roundtrip)),
    ];

    let mut failures = 0usize;
    for (name, check) in &checks {
        match check() {
            Ok(()) => println!("check {name:<32} PASS"),
            Err(reason) => {
                println!("check {name:<32} FAIL: {reason}");
                failures += 1;
            }
        }
    }
    if failures == 0 {
        println!("selftest: {} checks passed", checks.len());
        super::commands::EXIT_OK
    } else {
        println!("selftest: {failures} of {} checks failed", checks.len());
        super::commands::EXIT_SELFTEST
    }
}
