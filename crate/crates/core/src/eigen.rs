//! Small symmetric eigenvalue calculus: ordered eigenpairs, the projector
//! perturbation that makes the top eigenvalue simple, and first/second
//! derivative formulas of the largest eigenvalue.
//!
//! Dimensions 2, 3 and 4 are supported; nothing here is a general-purpose
//! eigensolver.

use crate::scalar::{lit, Real};
use num_complex::Complex;
use thiserror::Error;

/// Eigenvalue gap below which the top eigenvalue is treated as degenerate
/// and the derivative formulas refuse to evaluate.
pub const SIMPLE_GAP: f64 = 1e-8;

/// Gap below which two eigenvalues are considered tied for the deterministic
/// ordering convention.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("unsupported matrix dimension {0} (2, 3 or 4 expected)")]
    UnsupportedSize(usize),
    #[error("matrix dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix entry ({0},{1}) is not finite")]
    NonFinite(usize, usize),
    #[error("vector norm {0} is not unit within 1e-12")]
    NonUnitVector(f64),
    #[error("top eigenvalue is degenerate: gap {gap} <= {tol}")]
    DegenerateTopEigenvalue { gap: f64, tol: f64 },
}

/// Real symmetric matrix of dimension 2..=4, upper triangle stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix<F> {
    n: usize,
    // Packed upper triangle, row by row; 10 slots cover n = 4.
    upper: [F; 10],
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + j
}

impl<F: Real> SymMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        assert!((2..=4).contains(&n), "supported dimensions are 2..=4");
        SymMatrix {
            n,
            upper: [F::zero(); 10],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_diag(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    /// Builds the matrix from `f(i, j)`, evaluated on the upper triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Symmetric rank-one matrix `v v^T`.
    pub fn outer(v: &[F]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.upper[packed(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.upper[packed(self.n, i, j)] = v;
    }

    pub fn sub(&self, other: &Self) -> Result<Self, EigenError> {
        if self.n != other.n {
            return Err(EigenError::DimensionMismatch(self.n, other.n));
        }
        let mut out = *self;
        for k in 0..10 {
            out.upper[k] -= other.upper[k];
        }
        Ok(out)
    }

    pub fn add_scaled(&self, other: &Self, t: F) -> Result<Self, EigenError> {
        if self.n != other.n {
            return Err(EigenError::DimensionMismatch(self.n, other.n));
        }
        let mut out = *self;
        for k in 0..10 {
            out.upper[k] += t * other.upper[k];
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[F]) -> [F; 4] {
        debug_assert_eq!(v.len(), self.n);
        let mut out = [F::zero(); 4];
        for i in 0..self.n {
            let mut acc = F::zero();
            for j in 0..self.n {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Bilinear form `u^T S v`.
    pub fn form(&self, u: &[F], v: &[F]) -> F {
        let sv = self.apply(v);
        let mut acc = F::zero();
        for i in 0..self.n {
            acc += u[i] * sv[i];
        }
        acc
    }

    pub fn trace(&self) -> F {
        let mut t = F::zero();
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    pub fn frobenius_norm(&self) -> F {
        let mut acc = F::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                acc += v * v;
            }
        }
        acc.sqrt()
    }

    fn check_finite(&self) -> Result<(), EigenError> {
        for i in 0..self.n {
            for j in i..self.n {
                if !self.get(i, j).is_finite() {
                    return Err(EigenError::NonFinite(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues sorted descending with orthonormal eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct EigenSystem<F> {
    n: usize,
    lambdas: [F; 4],
    // vectors[k] is the eigenvector of lambdas[k].
    vectors: [[F; 4]; 4],
}

impl<F: Real> EigenSystem<F> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn eigenvalue(&self, k: usize) -> F {
        debug_assert!(k < self.n);
        self.lambdas[k]
    }

    #[inline]
    pub fn eigenvector(&self, k: usize) -> &[F] {
        debug_assert!(k < self.n);
        &self.vectors[k][..self.n]
    }

    pub fn eigenvalues(&self) -> &[F] {
        &self.lambdas[..self.n]
    }

    /// Gap between the two largest eigenvalues.
    pub fn top_gap(&self) -> F {
        self.lambdas[0] - self.lambdas[1]
    }

    /// `||S - V diag(lambda) V^T||_F` against a reference matrix.
    pub fn reconstruction_residual(&self, s: &SymMatrix<F>) -> F {
        let mut acc = F::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let mut rec = F::zero();
                for k in 0..self.n {
                    rec += self.lambdas[k] * self.vectors[k][i] * self.vectors[k][j];
                }
                let d = rec - s.get(i, j);
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    /// `||V^T V - I||_F`.
    pub fn orthonormality_residual(&self) -> F {
        let mut acc = F::zero();
        for a in 0..self.n {
            for b in 0..self.n {
                let mut dot = F::zero();
                for i in 0..self.n {
                    dot += self.vectors[a][i] * self.vectors[b][i];
                }
                let target = if a == b { F::one() } else { F::zero() };
                let d = dot - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }

    fn enforce_conventions(&mut self) {
        // Descending eigenvalue sort, carrying vectors along.
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.lambdas[b]
                .partial_cmp(&self.lambdas[a])
                .expect("finite eigenvalues")
        });
        let lambdas = self.lambdas;
        let vectors = self.vectors;
        for (k, &src) in order.iter().enumerate() {
            self.lambdas[k] = lambdas[src];
            self.vectors[k] = vectors[src];
        }

        // Within tie groups, order by lexicographically largest absolute
        // component vector.
        let tie = lit::<F>(TIE_TOL);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (self.lambdas[end - 1] - self.lambdas[end]).abs() <= tie {
                end += 1;
            }
            if end - start > 1 {
                let mut group: Vec<[F; 4]> = self.vectors[start..end].to_vec();
                group.sort_by(|a, b| {
                    for i in 0..n {
                        match b[i].abs().partial_cmp(&a[i].abs()).unwrap() {
                            std::cmp::Ordering::Equal => continue,
                            ord => return ord,
                        }
                    }
                    std::cmp::Ordering::Equal
                });
                self.vectors[start..end].copy_from_slice(&group);
            }
            start = end;
        }

        // Sign convention: first nonzero component positive.
        let zero_tol = lit::<F>(1e-12);
        for k in 0..n {
            if let Some(i) = (0..n).find(|&i| self.vectors[k][i].abs() > zero_tol) {
                if self.vectors[k][i] < F::zero() {
                    for i in 0..n {
                        self.vectors[k][i] = -self.vectors[k][i];
                    }
                }
            }
        }
    }
}

/// Sorted orthonormal eigendecomposition; closed form for n = 2, cyclic
/// Jacobi rotations for n = 3, 4.
pub fn decompose<F: Real>(s: &SymMatrix<F>) -> Result<EigenSystem<F>, EigenError> {
    s.check_finite()?;
    let n = s.dim();
    let mut es = if n == 2 { decompose_2x2(s) } else { jacobi(s) };
    es.enforce_conventions();
    Ok(es)
}

fn decompose_2x2<F: Real>(s: &SymMatrix<F>) -> EigenSystem<F> {
    let (a, b, c) = (s.get(0, 0), s.get(0, 1), s.get(1, 1));
    let half = lit::<F>(0.5);
    let mean = half * (a + c);
    let delta = half * (a - c);
    let r = (delta * delta + b * b).sqrt();
    let (l0, l1) = (mean + r, mean - r);
    // Rotation angle diagonalizing [[a, b], [b, c]]: tan(2 theta) = 2b/(a-c).
    let theta = half * (b + b).atan2(a - c);
    let (sin, cos) = theta.sin_cos();
    let mut es = EigenSystem {
        n: 2,
        lambdas: [l0, l1, F::zero(), F::zero()],
        vectors: [[F::zero(); 4]; 4],
    };
    // (cos, sin) is the eigenvector of the larger eigenvalue.
    es.vectors[0][0] = cos;
    es.vectors[0][1] = sin;
    es.vectors[1][0] = -sin;
    es.vectors[1][1] = cos;
    es
}

fn jacobi<F: Real>(s: &SymMatrix<F>) -> EigenSystem<F> {
    let n = s.dim();
    let mut a = [[F::zero(); 4]; 4];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = s.get(i, j);
        }
    }
    let mut v = [[F::zero(); 4]; 4];
    for (i, row) in v.iter_mut().enumerate().take(n) {
        row[i] = F::one();
    }

    let scale = F::one() + s.frobenius_norm();
    let stop = lit::<F>(1e-12).max(F::epsilon() * lit::<F>(8.0)) * scale;
    let half = lit::<F>(0.5);

    for _sweep in 0..64 {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p][q].abs());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= stop * lit::<F>(1e-3) {
                    continue;
                }
                let theta = half * (a[p][q] + a[p][q]).atan2(a[p][p] - a[q][q]);
                let (sin, cos) = theta.sin_cos();
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = cos * akp + sin * akq;
                    a[k][q] = -sin * akp + cos * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = cos * apk + sin * aqk;
                    a[q][k] = -sin * apk + cos * aqk;
                }
                for row in v.iter_mut().take(n) {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = cos * vp + sin * vq;
                    row[q] = -sin * vp + cos * vq;
                }
            }
        }
    }

    let mut es = EigenSystem {
        n,
        lambdas: [F::zero(); 4],
        vectors: [[F::zero(); 4]; 4],
    };
    for k in 0..n {
        es.lambdas[k] = a[k][k];
        for i in 0..n {
            es.vectors[k][i] = v[i][k];
        }
    }
    es
}

/// Projector onto the orthogonal complement of a unit vector:
/// `B = I - v v^T`, symmetric, positive semidefinite, `B v = 0`.
pub fn complement_projector<F: Real>(v: &[F]) -> Result<SymMatrix<F>, EigenError> {
    let n = v.len();
    if !(2..=4).contains(&n) {
        return Err(EigenError::UnsupportedSize(n));
    }
    let norm = v.iter().fold(F::zero(), |acc, x| acc + *x * *x).sqrt();
    if (norm - F::one()).abs() > lit::<F>(1e-12) {
        return Err(EigenError::NonUnitVector(norm.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(SymMatrix::from_fn(n, |i, j| {
        let delta = if i == j { F::one() } else { F::zero() };
        delta - v[i] * v[j]
    }))
}

/// Shifts a Hessian by the complement projector of its top eigendirection.
/// The top eigenvalue is preserved at the construction point while every
/// other eigenvalue drops by one, so the top eigenvalue becomes simple.
pub fn perturbed_hessian<F: Real>(
    hessian: &SymMatrix<F>,
    projector: &SymMatrix<F>,
) -> Result<SymMatrix<F>, EigenError> {
    hessian.sub(projector)
}

fn require_simple_top<F: Real>(es: &EigenSystem<F>) -> Result<(), EigenError> {
    let gap = es.top_gap();
    if gap <= lit::<F>(SIMPLE_GAP) {
        return Err(EigenError::DegenerateTopEigenvalue {
            gap: gap.to_f64().unwrap_or(f64::NAN),
            tol: SIMPLE_GAP,
        });
    }
    Ok(())
}

/// First derivative of the largest eigenvalue with respect to the matrix
/// entries: the rank-one matrix `V1 V1^T`. Requires a simple top eigenvalue.
pub fn top_eigenvalue_gradient<F: Real>(es: &EigenSystem<F>) -> Result<SymMatrix<F>, EigenError> {
    require_simple_top(es)?;
    Ok(SymMatrix::outer(es.eigenvector(0)))
}

/// Second derivative of the largest eigenvalue contracted against two
/// symmetric directions:
/// `sum_{mu>1} [(V1' P Vmu)(Vmu' Q V1) + (Vmu' P V1)(V1' Q Vmu)] / (l1 - lmu)`.
///
/// Symmetric in `(P, Q)` and positive semidefinite for `P = Q`.
pub fn top_eigenvalue_second_derivative<F: Real>(
    es: &EigenSystem<F>,
    p: &SymMatrix<F>,
    q: &SymMatrix<F>,
) -> Result<F, EigenError> {
    require_simple_top(es)?;
    if p.dim() != es.dim() || q.dim() != es.dim() {
        return Err(EigenError::DimensionMismatch(p.dim(), q.dim()));
    }
    let v1 = es.eigenvector(0);
    let mut acc = F::zero();
    for mu in 1..es.dim() {
        let vmu = es.eigenvector(mu);
        let pv = p.form(v1, vmu);
        let qv = q.form(v1, vmu);
        acc += (pv * qv + pv * qv) / (es.eigenvalue(0) - es.eigenvalue(mu));
    }
    #[cfg(feature = "fault-injection")]
    {
        acc = -acc;
    }
    Ok(acc)
}

/// Holomorphic splitting of the top eigendirection of a 4x4 chart Hessian,
/// exposed for inspection only.
#[derive(Debug, Clone, PartialEq)]
pub struct HolomorphicFrame<F> {
    /// Coefficients of `(V1 - i J V1)/sqrt(2)` in the unitary coordinate
    /// frame; their squared moduli sum to one.
    pub nu: [Complex<F>; 2],
    /// Expansion of `J V1` over the remaining eigenvectors `V2, V3, V4`;
    /// the squares sum to one when the top eigenvalue is simple.
    pub mu: [F; 3],
}

/// Applies the chart complex structure on (x, y, xi, eta) components.
pub fn apply_complex_structure<F: Real>(v: &[F; 4]) -> [F; 4] {
    [-v[1], v[0], -v[3], v[2]]
}

/// Computes the holomorphic frame data of a 4x4 eigensystem.
pub fn holomorphic_frame<F: Real>(es: &EigenSystem<F>) -> Result<HolomorphicFrame<F>, EigenError> {
    if es.dim() != 4 {
        return Err(EigenError::UnsupportedSize(es.dim()));
    }
    let v1 = es.eigenvector(0);
    let nu = [Complex::new(v1[0], v1[1]), Complex::new(v1[2], v1[3])];
    let jv = apply_complex_structure(&[v1[0], v1[1], v1[2], v1[3]]);
    let mut mu = [F::zero(); 3];
    for (a, slot) in mu.iter_mut().enumerate() {
        let va = es.eigenvector(a + 1);
        let mut dot = F::zero();
        for i in 0..4 {
            dot += jv[i] * va[i];
        }
        *slot = dot;
    }
    Ok(HolomorphicFrame { nu, mu })
}
