//! Preconditioned BiCGStab for the Newton linear systems.
//!
//! The Jacobian of the pointwise log-determinant residual is a row-scaled
//! combination of symmetric stencils, hence not exactly symmetric once the
//! slot coefficients vary across nodes; BiCGStab tolerates that while still
//! exploiting the near-symmetry.

use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOutcome<F> {
    pub iterations: usize,
    pub converged: bool,
    /// Final relative 2-norm residual.
    pub relative_residual: F,
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + *x * *y)
}

fn norm2<F: Real>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Solves `A x = b` with diagonal (Jacobi) preconditioning, starting from
/// `x = 0`. `apply` computes `y = A v`; `inv_diag` holds the reciprocal
/// diagonal of `A`.
pub fn bicgstab<F: Real>(
    mut apply: impl FnMut(&[F], &mut [F]),
    inv_diag: &[F],
    b: &[F],
    tol_rel: F,
    max_iter: usize,
    x: &mut [F],
) -> KrylovOutcome<F> {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = F::zero());

    let b_norm = norm2(b);
    if b_norm == F::zero() {
        return KrylovOutcome {
            iterations: 0,
            converged: true,
            relative_residual: F::zero(),
        };
    }
    let target = tol_rel * b_norm;

    let mut r = b.to_vec();
    let mut r_hat = r.clone();
    let mut p = vec![F::zero(); n];
    let mut v = vec![F::zero(); n];
    let mut p_hat = vec![F::zero(); n];
    let mut s_hat = vec![F::zero(); n];
    let mut t = vec![F::zero(); n];

    let mut rho = F::one();
    let mut alpha = F::one();
    let mut omega = F::one();
    let tiny = lit::<F>(1e-30);

    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < tiny {
            // Breakdown of the shadow residual: restart on the current one.
            r_hat.copy_from_slice(&r);
            rho = dot(&r_hat, &r);
            p.copy_from_slice(&r);
        } else {
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }

        for i in 0..n {
            p_hat[i] = inv_diag[i] * p[i];
        }
        apply(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < tiny {
            break;
        }
        alpha = rho / denom;

        // s = r - alpha v, reusing r.
        for i in 0..n {
            r[i] -= alpha * v[i];
        }
        if norm2(&r) <= target {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return KrylovOutcome {
                iterations,
                converged: true,
                relative_residual: norm2(&r) / b_norm,
            };
        }

        for i in 0..n {
            s_hat[i] = inv_diag[i] * r[i];
        }
        apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < tiny {
            break;
        }
        omega = dot(&t, &r) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] -= omega * t[i];
        }
        let res = norm2(&r);
        if res <= target {
            return KrylovOutcome {
                iterations,
                converged: true,
                relative_residual: res / b_norm,
            };
        }
        if omega.abs() < tiny {
            break;
        }
    }

    KrylovOutcome {
        iterations,
        converged: false,
        relative_residual: norm2(&r) / b_norm,
    }
}
