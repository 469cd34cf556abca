//! Centered second-order difference stencils on the product grid, the
//! reduced complex Hessian slot, the chart real Hessian and gradient norms.
//!
//! x and y wrap periodically at every strip layer; xi stencils that would
//! step outside the Dirichlet layers are rejected.

use crate::eigen::SymMatrix;
use crate::field::ScalarField;
use crate::grid::{Dir, Node};
use crate::scalar::{lit, Real};
use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StencilError {
    #[error("stencil {pair:?} at node {node:?} steps outside the strip")]
    OutOfStrip { node: Node, pair: (Dir, Dir) },
}

#[inline]
fn shifted(node: Node, dir: Dir, off: isize, f: &ScalarField<impl Real>) -> Option<Node> {
    let g = f.grid();
    let (ix, iy, it) = node;
    match dir {
        Dir::X => Some((g.wrap_x(ix, off), iy, it)),
        Dir::Y => Some((ix, g.wrap_y(iy, off), it)),
        Dir::Xi => {
            let jt = it as isize + off;
            if jt < 0 || jt as usize >= g.nt {
                None
            } else {
                Some((ix, iy, jt as usize))
            }
        }
    }
}

fn spacing<F: Real>(f: &ScalarField<F>, dir: Dir) -> F {
    match dir {
        Dir::X => f.grid().hx,
        Dir::Y => f.grid().hy,
        Dir::Xi => f.grid().ht,
    }
}

/// Centered second difference along a direction pair: three-point stencil on
/// the diagonal, four-point cross stencil for mixed pairs.
pub fn second_diff<F: Real>(
    f: &ScalarField<F>,
    node: Node,
    pair: (Dir, Dir),
) -> Result<F, StencilError> {
    let (d1, d2) = pair;
    let err = || StencilError::OutOfStrip { node, pair };
    if d1 == d2 {
        let h = spacing(f, d1);
        let plus = shifted(node, d1, 1, f).ok_or_else(err)?;
        let minus = shifted(node, d1, -1, f).ok_or_else(err)?;
        Ok((f.get(plus) - lit::<F>(2.0) * f.get(node) + f.get(minus)) / (h * h))
    } else {
        let h1 = spacing(f, d1);
        let h2 = spacing(f, d2);
        let pp = shifted(node, d1, 1, f)
            .and_then(|n| shifted(n, d2, 1, f))
            .ok_or_else(err)?;
        let pm = shifted(node, d1, 1, f)
            .and_then(|n| shifted(n, d2, -1, f))
            .ok_or_else(err)?;
        let mp = shifted(node, d1, -1, f)
            .and_then(|n| shifted(n, d2, 1, f))
            .ok_or_else(err)?;
        let mm = shifted(node, d1, -1, f)
            .and_then(|n| shifted(n, d2, -1, f))
            .ok_or_else(err)?;
        Ok((f.get(pp) - f.get(pm) - f.get(mp) + f.get(mm)) / (lit::<F>(4.0) * h1 * h2))
    }
}

/// First difference: centered in the interior and in the periodic
/// directions, second-order one-sided at the strip boundary layers.
pub fn first_diff<F: Real>(f: &ScalarField<F>, node: Node, dir: Dir) -> F {
    let h = spacing(f, dir);
    let two_h = lit::<F>(2.0) * h;
    match dir {
        Dir::X | Dir::Y => {
            let plus = shifted(node, dir, 1, f).unwrap();
            let minus = shifted(node, dir, -1, f).unwrap();
            (f.get(plus) - f.get(minus)) / two_h
        }
        Dir::Xi => {
            let (ix, iy, it) = node;
            let nt = f.grid().nt;
            if it == 0 {
                let f0 = f.get((ix, iy, 0));
                let f1 = f.get((ix, iy, 1));
                let f2 = f.get((ix, iy, 2));
                (-lit::<F>(3.0) * f0 + lit::<F>(4.0) * f1 - f2) / two_h
            } else if it == nt - 1 {
                let f0 = f.get((ix, iy, nt - 1));
                let f1 = f.get((ix, iy, nt - 2));
                let f2 = f.get((ix, iy, nt - 3));
                (lit::<F>(3.0) * f0 - lit::<F>(4.0) * f1 + f2) / two_h
            } else {
                (f.get((ix, iy, it + 1)) - f.get((ix, iy, it - 1))) / two_h
            }
        }
    }
}

/// Chart gradient (f_x, f_y, f_xi).
pub fn gradient<F: Real>(f: &ScalarField<F>, node: Node) -> [F; 3] {
    [
        first_diff(f, node, Dir::X),
        first_diff(f, node, Dir::Y),
        first_diff(f, node, Dir::Xi),
    ]
}

/// Squared gradient norm `(f_x^2 + f_y^2 + f_xi^2)/2` in the flat product
/// reference normalization.
pub fn gradient_norm_sq<F: Real>(f: &ScalarField<F>, node: Node) -> F {
    let g = gradient(f, node);
    lit::<F>(0.5) * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
}

/// The 2x2 complex Hessian of the space-time potential relative to the flat
/// product reference, reduced by rotation invariance of the strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianSlot<F> {
    /// Torus-torus entry `1 + (f_xx + f_yy)/4`.
    pub a: F,
    /// Mixed entry `(f_{x xi} - i f_{y xi})/4`.
    pub b: Complex<F>,
    /// Strip-strip entry `f_{xi xi}/4`.
    pub c: F,
}

impl<F: Real> HermitianSlot<F> {
    /// Determinant `a c - |b|^2` of the Hermitian matrix.
    #[inline]
    pub fn det(&self) -> F {
        self.a * self.c - self.b.norm_sqr()
    }

    #[inline]
    pub fn trace(&self) -> F {
        self.a + self.c
    }

    /// Positive-definiteness of the slot matrix.
    #[inline]
    pub fn is_admissible(&self) -> bool {
        self.a > F::zero() && self.det() > F::zero()
    }
}

/// Discrete complex Hessian slot at an interior node.
pub fn complex_hessian<F: Real>(
    f: &ScalarField<F>,
    node: Node,
) -> Result<HermitianSlot<F>, StencilError> {
    let quarter = lit::<F>(0.25);
    let fxx = second_diff(f, node, (Dir::X, Dir::X))?;
    let fyy = second_diff(f, node, (Dir::Y, Dir::Y))?;
    let fxt = second_diff(f, node, (Dir::X, Dir::Xi))?;
    let fyt = second_diff(f, node, (Dir::Y, Dir::Xi))?;
    let ftt = second_diff(f, node, (Dir::Xi, Dir::Xi))?;
    Ok(HermitianSlot {
        a: F::one() + quarter * (fxx + fyy),
        b: Complex::new(quarter * fxt, -quarter * fyt),
        c: quarter * ftt,
    })
}

/// Symmetric 3x3 chart Hessian over (x, y, xi). The eta row of the full
/// four-dimensional chart Hessian vanishes by rotation invariance and is
/// omitted.
pub fn real_hessian<F: Real>(f: &ScalarField<F>, node: Node) -> Result<SymMatrix<F>, StencilError> {
    let dirs = [Dir::X, Dir::Y, Dir::Xi];
    let mut h = SymMatrix::zeros(3);
    for i in 0..3 {
        for j in i..3 {
            h.set(i, j, second_diff(f, node, (dirs[i], dirs[j]))?);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    fn grid(nx: usize, ny: usize, nt: usize) -> crate::grid::GridSpec<f64> {
        make_grid(1, nx, ny, nt).unwrap()
    }

    #[test]
    fn cosine_second_difference() {
        let g = grid(64, 8, 9);
        let f = ScalarField::from_fn(g, |n| (TAU * g.coords(n).0).cos());
        let got = second_diff(&f, (0, 0, 4), (Dir::X, Dir::X)).unwrap();
        let expect = -4.0 * PI * PI;
        assert!((got - expect).abs() / expect.abs() <= 2e-2);
    }

    #[test]
    fn constant_second_difference_is_zero() {
        let g = grid(8, 8, 9);
        let f = ScalarField::from_fn(g, |_| 1.75);
        for pair in [
            (Dir::X, Dir::X),
            (Dir::Y, Dir::Y),
            (Dir::Xi, Dir::Xi),
            (Dir::X, Dir::Y),
            (Dir::X, Dir::Xi),
            (Dir::Y, Dir::Xi),
        ] {
            assert_eq!(second_diff(&f, (3, 5, 4), pair).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadratic_exactness() {
        let g = grid(8, 8, 9);
        let f = ScalarField::from_fn(g, |n| {
            let (_, _, xi) = g.coords(n);
            2.0 * xi * xi
        });
        for it in 1..8 {
            let got = second_diff(&f, (2, 2, it), (Dir::Xi, Dir::Xi)).unwrap();
            assert!((got - 4.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn xi_stencil_rejected_at_boundary_layers() {
        let g = grid(8, 8, 9);
        let f = ScalarField::zeros(g);
        assert!(second_diff(&f, (0, 0, 0), (Dir::Xi, Dir::Xi)).is_err());
        assert!(second_diff(&f, (0, 0, 8), (Dir::X, Dir::Xi)).is_err());
        assert!(second_diff(&f, (0, 0, 0), (Dir::X, Dir::X)).is_ok());
    }

    #[test]
    fn slot_of_zero_field() {
        let g = grid(8, 8, 9);
        let f = ScalarField::zeros(g);
        let s = complex_hessian(&f, (1, 2, 3)).unwrap();
        assert_eq!(s.a, 1.0);
        assert_eq!(s.b, num_complex::Complex::new(0.0, 0.0));
        assert_eq!(s.c, 0.0);
        assert!(!s.is_admissible());
    }

    #[test]
    fn slot_of_exponential_strip_profile() {
        let g = grid(8, 8, 33);
        let f = ScalarField::from_fn(g, |n| (2.0 * g.coords(n).2).exp());
        for it in [1, 8, 16, 31] {
            let s = complex_hessian(&f, (0, 0, it)).unwrap();
            let xi = g.coords((0, 0, it)).2;
            assert_abs_diff_eq!(s.a, 1.0, epsilon = 1e-13);
            assert!(s.b.norm() <= 1e-13);
            let expect = (2.0 * xi).exp();
            assert!((s.c - expect).abs() <= 2.0 * g.ht * g.ht * expect);
        }
    }

    #[test]
    fn slot_of_torus_cosine() {
        let g = grid(64, 8, 9);
        let f = ScalarField::from_fn(g, |n| (TAU * g.coords(n).0).cos());
        for ix in [0, 5, 17, 32] {
            let s = complex_hessian(&f, (ix, 3, 4)).unwrap();
            let x = ix as f64 / 64.0;
            let expect = 1.0 - PI * PI * (TAU * x).cos();
            assert!((s.a - expect).abs() <= 2e-2 * PI * PI);
            assert!(s.b.norm() <= 1e-12);
            assert_eq!(s.c, 0.0);
        }
    }

    #[test]
    fn real_hessian_of_quadratic() {
        let g = grid(8, 8, 9);
        let f = ScalarField::from_fn(g, |n| {
            let (_, _, xi) = g.coords(n);
            2.0 * xi * xi
        });
        let h = real_hessian(&f, (2, 3, 4)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == 2 && j == 2 { 4.0 } else { 0.0 };
                assert!((h.get(i, j) - expect).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn real_hessian_matches_analytic_trig_field() {
        let g = grid(32, 32, 33);
        let f = ScalarField::from_fn(g, |n| {
            let (x, y, xi) = g.coords(n);
            0.3 * (TAU * x).sin() * (TAU * y).cos() + 0.2 * (TAU * x).cos() * xi * xi
        });
        let node = (5, 9, 16);
        let (x, y, xi) = g.coords(node);
        let h = real_hessian(&f, node).unwrap();
        let sx = (TAU * x).sin();
        let cx = (TAU * x).cos();
        let sy = (TAU * y).sin();
        let cy = (TAU * y).cos();
        let analytic = [
            [
                -0.3 * TAU * TAU * sx * cy - 0.2 * TAU * TAU * cx * xi * xi,
                -0.3 * TAU * TAU * cx * sy,
                -0.2 * TAU * sx * 2.0 * xi,
            ],
            [0.0, -0.3 * TAU * TAU * sx * cy, 0.0],
            [0.0, 0.0, 0.4 * cx],
        ];
        let tol = 8.0 * (1.0 / 32.0f64).powi(2) * TAU * TAU * TAU;
        for i in 0..3 {
            for j in i..3 {
                assert!(
                    (h.get(i, j) - analytic[i][j]).abs() <= tol,
                    "entry ({i},{j}): {} vs {}",
                    h.get(i, j),
                    analytic[i][j]
                );
            }
        }
    }

    #[test]
    fn hessian_trace_matches_slot_identity() {
        // 4 (a - 1) equals the xx + yy block trace of the real Hessian.
        let g = grid(16, 16, 9);
        let f = ScalarField::from_fn(g, |n| {
            let (x, y, xi) = g.coords(n);
            0.07 * (TAU * x).cos() * (TAU * y).sin() + 0.4 * xi * xi * (TAU * y).cos()
        });
        for node in [(0, 0, 1), (3, 7, 4), (15, 2, 7)] {
            let s = complex_hessian(&f, node).unwrap();
            let h = real_hessian(&f, node).unwrap();
            let lhs = 4.0 * (s.a - 1.0);
            let rhs = h.get(0, 0) + h.get(1, 1);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-11 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn gradient_norm_examples() {
        let g = grid(64, 8, 9);
        let zero = ScalarField::zeros(g);
        assert_eq!(gradient_norm_sq(&zero, (1, 1, 1)), 0.0);

        let f = ScalarField::from_fn(g, |n| (TAU * g.coords(n).0).sin());
        let got = gradient_norm_sq(&f, (0, 0, 4));
        let expect = TAU * TAU / 2.0;
        assert!((got - expect).abs() / expect <= 1e-2);

        // Locally linear in xi: one-sided boundary stencil is exact there.
        let f = ScalarField::from_fn(g, |n| 3.0 * g.coords(n).2);
        assert_abs_diff_eq!(gradient_norm_sq(&f, (0, 0, 0)), 4.5, epsilon = 1e-10);

        // f = x away from the periodic wrap: |grad|^2 = 1/2 exactly.
        let f = ScalarField::from_fn(g, |n| g.coords(n).0);
        assert_abs_diff_eq!(gradient_norm_sq(&f, (32, 4, 4)), 0.5, epsilon = 1e-12);
    }
}
