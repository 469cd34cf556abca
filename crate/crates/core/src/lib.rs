//! Numerical laboratory for geodesics in the space of Kähler potentials on
//! the flat torus.
//!
//! The centerpiece is a damped Newton solver for the regularized complex
//! Monge-Ampère equation on the reduced product domain T^2 x \[0,1\]: for a
//! pair of Kähler potentials and a decreasing schedule of the regularization
//! parameter it produces the family of approximate geodesics, whose limit is
//! the weak geodesic joining the pair. Around it sit independent oracles
//! (closed-form reduced solutions, manufactured solutions, the
//! Legendre-transform geodesic for x-only data), the eigenvalue-perturbation
//! calculus used to monitor the largest Hessian eigenvalue, and diagnostics
//! that decide whether the monitored suprema stay bounded as the
//! regularization vanishes.
//!
//! All numerics are generic over the scalar type via [`scalar::Real`];
//! concrete `f64` aliases live at the crate root.

pub mod data;
pub mod diagnostics;
pub mod eigen;
pub mod field;
pub mod geodesic;
pub mod grid;
pub mod io;
pub mod krylov;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod stencil;
pub mod weight;

pub use scalar::Real;

/// Grid over `f64`.
pub type GridSpec64 = grid::GridSpec<f64>;
/// Scalar field over `f64`.
pub type ScalarField64 = field::ScalarField<f64>;
/// Torus slice over `f64`.
pub type TorusField64 = field::TorusField<f64>;
/// Symmetric matrix over `f64`.
pub type SymMatrix64 = eigen::SymMatrix<f64>;
/// Eigensystem over `f64`.
pub type EigenSystem64 = eigen::EigenSystem<f64>;
/// Newton configuration over `f64`.
pub type NewtonConfig64 = solver::NewtonConfig<f64>;

/// Grid over `f32`.
pub type GridSpec32 = grid::GridSpec<f32>;
/// Scalar field over `f32`.
pub type ScalarField32 = field::ScalarField<f32>;
/// Symmetric matrix over `f32`.
pub type SymMatrix32 = eigen::SymMatrix<f32>;
