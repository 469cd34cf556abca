//! Discretization of the reduced product domain T^2 x \[0,1\].
//!
//! The torus directions x, y are periodic with fundamental domain \[0,1)^2;
//! the strip direction xi carries Dirichlet layers at its two ends. Rotation
//! invariance of the strip (eta-independence) has already been imposed, so
//! the grid is three-dimensional.

use crate::scalar::{lit, Real};
use thiserror::Error;

/// Differencing directions on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    /// Periodic torus direction x.
    X,
    /// Periodic torus direction y.
    Y,
    /// Dirichlet strip direction xi.
    Xi,
}

/// A node index `(ix, iy, it)` with `ix` along x, `iy` along y, `it` along xi.
pub type Node = (usize, usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("unsupported complex dimension m = {0} (only m = 1 is implemented)")]
    UnsupportedDimension(usize),
    #[error("nx = {0} must be an even number >= 8")]
    BadNx(usize),
    #[error("ny = {0} must be an even number >= 8")]
    BadNy(usize),
    #[error("nt = {0} must be >= 9 (both Dirichlet layers included)")]
    BadNt(usize),
}

/// Validated grid dimensions and spacings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<F> {
    /// Complex dimension of the base manifold (fixed to 1).
    pub m: usize,
    /// Node count along x (periodic).
    pub nx: usize,
    /// Node count along y (periodic).
    pub ny: usize,
    /// Node count along xi, including both Dirichlet layers.
    pub nt: usize,
    /// Spacing 1/nx.
    pub hx: F,
    /// Spacing 1/ny.
    pub hy: F,
    /// Spacing 1/(nt-1).
    pub ht: F,
}

impl<F: Real> GridSpec<F> {
    /// Validates counts and computes spacings.
    pub fn new(m: usize, nx: usize, ny: usize, nt: usize) -> Result<Self, GridError> {
        if m != 1 {
            return Err(GridError::UnsupportedDimension(m));
        }
        if nx < 8 || nx % 2 != 0 {
            return Err(GridError::BadNx(nx));
        }
        if ny < 8 || ny % 2 != 0 {
            return Err(GridError::BadNy(ny));
        }
        if nt < 9 {
            return Err(GridError::BadNt(nt));
        }
        Ok(GridSpec {
            m,
            nx,
            ny,
            nt,
            hx: F::one() / lit::<F>(nx as f64),
            hy: F::one() / lit::<F>(ny as f64),
            ht: F::one() / lit::<F>((nt - 1) as f64),
        })
    }

    /// Total node count.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major linear index, x fastest, then y, then xi.
    #[inline]
    pub fn idx(&self, (ix, iy, it): Node) -> usize {
        debug_assert!(ix < self.nx && iy < self.ny && it < self.nt);
        ix + self.nx * (iy + self.ny * it)
    }

    /// Inverse of [`GridSpec::idx`].
    #[inline]
    pub fn node(&self, idx: usize) -> Node {
        let ix = idx % self.nx;
        let rest = idx / self.nx;
        (ix, rest % self.ny, rest / self.ny)
    }

    /// Periodic wrap of a signed offset along x.
    #[inline]
    pub fn wrap_x(&self, ix: usize, off: isize) -> usize {
        (ix as isize + off).rem_euclid(self.nx as isize) as usize
    }

    /// Periodic wrap of a signed offset along y.
    #[inline]
    pub fn wrap_y(&self, iy: usize, off: isize) -> usize {
        (iy as isize + off).rem_euclid(self.ny as isize) as usize
    }

    /// Whether `it` addresses one of the two Dirichlet layers.
    #[inline]
    pub fn is_boundary_layer(&self, it: usize) -> bool {
        it == 0 || it == self.nt - 1
    }

    /// Coordinates of a node: x, y in \[0,1), xi in \[0,1\].
    #[inline]
    pub fn coords(&self, (ix, iy, it): Node) -> (F, F, F) {
        (
            self.hx * lit::<F>(ix as f64),
            self.hy * lit::<F>(iy as f64),
            self.ht * lit::<F>(it as f64),
        )
    }

    /// Iterator over all nodes, linear-index order.
    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Iterator over nodes with `it` strictly inside the strip.
    pub fn interior_nodes(&self) -> impl Iterator<Item = Node> + '_ {
        let nt = self.nt;
        self.nodes()
            .filter(move |&(_, _, it)| it > 0 && it < nt - 1)
    }

    /// Number of interior (unknown) nodes.
    #[inline]
    pub fn interior_len(&self) -> usize {
        self.nx * self.ny * (self.nt - 2)
    }

    /// Linear index among interior nodes (it in 1..nt-1).
    #[inline]
    pub fn interior_idx(&self, (ix, iy, it): Node) -> usize {
        debug_assert!(it > 0 && it < self.nt - 1);
        ix + self.nx * (iy + self.ny * (it - 1))
    }

    /// Inverse of [`GridSpec::interior_idx`].
    #[inline]
    pub fn interior_node(&self, idx: usize) -> Node {
        let ix = idx % self.nx;
        let rest = idx / self.nx;
        (ix, rest % self.ny, rest / self.ny + 1)
    }
}

/// Convenience constructor mirroring the grid contract.
pub fn make_grid<F: Real>(
    m: usize,
    nx: usize,
    ny: usize,
    nt: usize,
) -> Result<GridSpec<F>, GridError> {
    GridSpec::new(m, nx, ny, nt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings_computed() {
        let g: GridSpec<f64> = make_grid(1, 8, 8, 9).unwrap();
        assert_eq!(g.hx, 0.125);
        assert_eq!(g.hy, 0.125);
        assert_eq!(g.ht, 0.125);
    }

    #[test]
    fn rejects_odd_nx() {
        assert_eq!(
            make_grid::<f64>(1, 7, 8, 9).unwrap_err(),
            GridError::BadNx(7)
        );
    }

    #[test]
    fn rejects_unsupported_dimension() {
        assert_eq!(
            make_grid::<f64>(2, 8, 8, 9).unwrap_err(),
            GridError::UnsupportedDimension(2)
        );
    }

    #[test]
    fn rejects_small_nt_and_odd_ny() {
        assert_eq!(
            make_grid::<f64>(1, 8, 8, 8).unwrap_err(),
            GridError::BadNt(8)
        );
        assert_eq!(
            make_grid::<f64>(1, 8, 9, 9).unwrap_err(),
            GridError::BadNy(9)
        );
    }

    #[test]
    fn index_roundtrip_and_wrap() {
        let g: GridSpec<f64> = make_grid(1, 8, 10, 9).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.idx(g.node(i)), i);
        }
        assert_eq!(g.wrap_x(0, -1), 7);
        assert_eq!(g.wrap_x(7, 1), 0);
        assert_eq!(g.wrap_y(0, -3), 7);
        for i in 0..g.interior_len() {
            assert_eq!(g.interior_idx(g.interior_node(i)), i);
        }
    }
}
