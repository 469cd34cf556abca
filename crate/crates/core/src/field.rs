//! Grid functions on the discretized product domain and on torus slices.

use crate::grid::{GridSpec, Node};
use crate::scalar::{lit, Real};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("value count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at linear index {0}")]
    NonFinite(usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Real-valued grid function, row-major with x fastest, then y, then xi.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<F> {
    grid: GridSpec<F>,
    values: Vec<F>,
}

impl<F: Real> ScalarField<F> {
    pub fn zeros(grid: GridSpec<F>) -> Self {
        ScalarField {
            grid,
            values: vec![F::zero(); grid.len()],
        }
    }

    /// Builds a field by evaluating `f` at every node.
    pub fn from_fn(grid: GridSpec<F>, mut f: impl FnMut(Node) -> F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let v = f(grid.node(i));
            debug_assert!(v.is_finite(), "field values must be finite");
            values.push(v);
        }
        ScalarField { grid, values }
    }

    /// Wraps raw values, validating length and finiteness.
    pub fn from_values(grid: GridSpec<F>, values: Vec<F>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(ScalarField { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<F> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[F] {
        &self.values
    }

    #[inline]
    pub fn get(&self, node: Node) -> F {
        self.values[self.grid.idx(node)]
    }

    #[inline]
    pub fn set(&mut self, node: Node, v: F) {
        let i = self.grid.idx(node);
        self.values[i] = v;
    }

    /// In-place `self += t * other` (same grid).
    pub fn add_scaled(&mut self, other: &ScalarField<F>, t: F) {
        debug_assert_eq!(self.grid.len(), other.grid.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += t * *b;
        }
    }

    pub fn sup_norm(&self) -> F {
        self.values
            .iter()
            .fold(F::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Sup-norm of the difference with another field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField<F>) -> Result<F, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(F::zero(), |acc, (a, b)| acc.max((*a - *b).abs())))
    }

    /// Extracts the torus slice at strip index `it`.
    pub fn layer(&self, it: usize) -> TorusField<F> {
        TorusField::from_fn(self.grid.nx, self.grid.ny, |ix, iy| self.get((ix, iy, it)))
    }

    /// Overwrites the torus slice at strip index `it`.
    pub fn set_layer(&mut self, it: usize, slice: &TorusField<F>) {
        assert_eq!(slice.nx, self.grid.nx);
        assert_eq!(slice.ny, self.grid.ny);
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                self.set((ix, iy, it), slice.get(ix, iy));
            }
        }
    }

    /// Largest absolute variation along the y direction; 0 for y-independent data.
    pub fn y_variation(&self) -> F {
        let mut worst = F::zero();
        for it in 0..self.grid.nt {
            for ix in 0..self.grid.nx {
                let base = self.get((ix, 0, it));
                for iy in 1..self.grid.ny {
                    worst = worst.max((self.get((ix, iy, it)) - base).abs());
                }
            }
        }
        worst
    }
}

/// Periodic function on the 2-torus grid, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField<F> {
    pub nx: usize,
    pub ny: usize,
    values: Vec<F>,
}

impl<F: Real> TorusField<F> {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        TorusField {
            nx,
            ny,
            values: vec![F::zero(); nx * ny],
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                values.push(f(ix, iy));
            }
        }
        TorusField { nx, ny, values }
    }

    /// Samples `f(x, y)` at the torus nodes of an `nx` by `ny` grid.
    pub fn sample(nx: usize, ny: usize, f: impl Fn(F, F) -> F) -> Self {
        let hx = F::one() / lit::<F>(nx as f64);
        let hy = F::one() / lit::<F>(ny as f64);
        Self::from_fn(nx, ny, |ix, iy| {
            f(hx * lit::<F>(ix as f64), hy * lit::<F>(iy as f64))
        })
    }

    #[inline]
    pub fn get(&self, ix: usize, iy: usize) -> F {
        self.values[ix + self.nx * iy]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, v: F) {
        self.values[ix + self.nx * iy] = v;
    }

    #[inline]
    pub fn values(&self) -> &[F] {
        &self.values
    }

    #[inline]
    fn wget(&self, ix: isize, iy: isize) -> F {
        let ix = ix.rem_euclid(self.nx as isize) as usize;
        let iy = iy.rem_euclid(self.ny as isize) as usize;
        self.get(ix, iy)
    }

    /// Centered flat Laplacian (f_xx + f_yy) at a node, periodic wrap.
    pub fn laplacian(&self, ix: usize, iy: usize) -> F {
        let hx = F::one() / lit::<F>(self.nx as f64);
        let hy = F::one() / lit::<F>(self.ny as f64);
        let (ix, iy) = (ix as isize, iy as isize);
        let two = lit::<F>(2.0);
        let fxx =
            (self.wget(ix + 1, iy) - two * self.wget(ix, iy) + self.wget(ix - 1, iy)) / (hx * hx);
        let fyy =
            (self.wget(ix, iy + 1) - two * self.wget(ix, iy) + self.wget(ix, iy - 1)) / (hy * hy);
        fxx + fyy
    }

    /// Minimum over nodes of `1 + laplacian/4`, the Kähler admissibility margin.
    pub fn kahler_margin(&self) -> F {
        let quarter = lit::<F>(0.25);
        let mut min = F::infinity();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                min = min.min(F::one() + quarter * self.laplacian(ix, iy));
            }
        }
        min
    }

    pub fn sup_distance(&self, other: &TorusField<F>) -> F {
        assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(F::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}
