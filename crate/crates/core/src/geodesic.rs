//! Boundary-value setup for the regularized geodesic family: two Kähler
//! potentials become Dirichlet data on the strip ends, a convexified linear
//! interpolation seeds the first solve, and the continuation sweep produces
//! one field per value of the regularization parameter.

use crate::field::{ScalarField, TorusField};
use crate::grid::GridSpec;
use crate::scalar::{lit, Real};
use crate::solver::{continuity_sweep, EpsSolve, NewtonConfig, ScheduleError, SweepError};
use crate::stencil::complex_hessian;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("potential {index} is not a Kähler potential: margin {margin} <= 0")]
    InadmissiblePotential { index: usize, margin: f64 },
    #[error("potential dimensions {0}x{1} do not match the grid")]
    GridMismatch(usize, usize),
    #[error("schedule invalid: {0}")]
    Schedule(#[from] ScheduleError),
}

/// Endpoint Kähler potentials with their admissibility margins.
#[derive(Debug, Clone)]
pub struct PotentialPair<F> {
    pub phi0: TorusField<F>,
    pub phi1: TorusField<F>,
    /// `min(1 + lap(phi0)/4)` over nodes.
    pub margin0: F,
    /// `min(1 + lap(phi1)/4)` over nodes.
    pub margin1: F,
}

impl<F: Real> PotentialPair<F> {
    /// Validates that both potentials define positive metrics.
    pub fn new(phi0: TorusField<F>, phi1: TorusField<F>) -> Result<Self, GeodesicError> {
        let margin0 = phi0.kahler_margin();
        let margin1 = phi1.kahler_margin();
        for (index, margin) in [(0usize, margin0), (1, margin1)] {
            if !(margin > F::zero()) {
                return Err(GeodesicError::InadmissiblePotential {
                    index,
                    margin: margin.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(PotentialPair {
            phi0,
            phi1,
            margin0,
            margin1,
        })
    }
}

/// Fully assembled boundary-value problem for the continuation sweep.
#[derive(Debug, Clone)]
pub struct EpsProblem<F> {
    pub pair: PotentialPair<F>,
    pub grid: GridSpec<F>,
    /// Strictly decreasing regularization schedule inside (0, 1].
    pub schedule: Vec<F>,
    /// Convexification constant of the initial guess.
    pub k_init: F,
    initial: ScalarField<F>,
}

impl<F: Real> EpsProblem<F> {
    /// Dirichlet data from the pair, initial guess
    /// `(1 - xi) phi0 + xi phi1 + k xi (xi - 1)` with `k` the smallest value
    /// (found by a scan over interior nodes) making the initial slot
    /// determinant at least `eps_first * exp(2 xi) / 2` everywhere.
    pub fn build(
        pair: PotentialPair<F>,
        grid: GridSpec<F>,
        schedule: Vec<F>,
    ) -> Result<Self, GeodesicError> {
        if pair.phi0.nx != grid.nx || pair.phi0.ny != grid.ny {
            return Err(GeodesicError::GridMismatch(pair.phi0.nx, pair.phi0.ny));
        }
        if pair.phi1.nx != grid.nx || pair.phi1.ny != grid.ny {
            return Err(GeodesicError::GridMismatch(pair.phi1.nx, pair.phi1.ny));
        }
        crate::solver::validate_schedule(&schedule)?;

        let line = ScalarField::from_fn(grid, |(ix, iy, it)| {
            let xi = grid.ht * lit::<F>(it as f64);
            (F::one() - xi) * pair.phi0.get(ix, iy) + xi * pair.phi1.get(ix, iy)
        });

        // The convexification k xi (xi - 1) only enters the strip-strip slot
        // entry, adding k/2; scan for the smallest k that clears the target
        // determinant margin at every interior node.
        let eps_first = schedule[0];
        let half = lit::<F>(0.5);
        let two = lit::<F>(2.0);
        let mut k_min = F::zero();
        for node in grid.interior_nodes() {
            let slot = complex_hessian(&line, node).expect("interior node");
            let xi = grid.coords(node).2;
            let target = half * eps_first * (two * xi).exp();
            // a (c + k/2) - |b|^2 >= target, a > 0 for an admissible pair.
            let needed = two * (target + slot.b.norm_sqr() - slot.a * slot.c) / slot.a;
            k_min = k_min.max(needed);
        }

        let mut initial = line;
        for node in grid.interior_nodes() {
            let xi = grid.coords(node).2;
            let v = initial.get(node) + k_min * xi * (xi - F::one());
            initial.set(node, v);
        }

        Ok(EpsProblem {
            pair,
            grid,
            schedule,
            k_init: k_min,
            initial,
        })
    }

    /// The convexified initial guess (boundary layers carry the Dirichlet data).
    pub fn initial_guess(&self) -> &ScalarField<F> {
        &self.initial
    }
}

/// Runs the continuation sweep of the problem.
pub fn solve_geodesic<F: Real>(
    problem: &EpsProblem<F>,
    cfg: &NewtonConfig<F>,
) -> Result<Vec<EpsSolve<F>>, SweepError<F>> {
    continuity_sweep(problem.initial_guess(), &problem.schedule, cfg)
}

/// Time slices of a solved space-time potential together with centered time
/// derivatives at the interior slices.
#[derive(Debug, Clone)]
pub struct GeodesicPath<F> {
    /// One time value per strip layer.
    pub times: Vec<F>,
    /// Potential slices, one per strip layer; the first and last are the
    /// Dirichlet data bit-for-bit.
    pub slices: Vec<TorusField<F>>,
    /// Centered time derivatives at the interior layers (length nt - 2).
    pub velocities: Vec<TorusField<F>>,
}

pub fn extract_path<F: Real>(psi: &ScalarField<F>) -> GeodesicPath<F> {
    let g = psi.grid();
    let times = (0..g.nt).map(|it| g.ht * lit::<F>(it as f64)).collect();
    let slices: Vec<TorusField<F>> = (0..g.nt).map(|it| psi.layer(it)).collect();
    let two_ht = lit::<F>(2.0) * g.ht;
    let velocities = (1..g.nt - 1)
        .map(|it| {
            TorusField::from_fn(g.nx, g.ny, |ix, iy| {
                (psi.get((ix, iy, it + 1)) - psi.get((ix, iy, it - 1))) / two_ht
            })
        })
        .collect();
    GeodesicPath {
        times,
        slices,
        velocities,
    }
}

/// Discrete path speed at each interior time: the quadrature of the squared
/// velocity against the slice volume form `(1 + lap(phi_t)/4) hx hy`.
pub fn geodesic_speed<F: Real>(path: &GeodesicPath<F>) -> Vec<F> {
    let nt = path.slices.len();
    let quarter = lit::<F>(0.25);
    (1..nt - 1)
        .map(|it| {
            let slice = &path.slices[it];
            let vel = &path.velocities[it - 1];
            let nx = slice.nx;
            let ny = slice.ny;
            let cell = F::one() / lit::<F>((nx * ny) as f64);
            let mut acc = F::zero();
            for iy in 0..ny {
                for ix in 0..nx {
                    let v = vel.get(ix, iy);
                    let w = F::one() + quarter * slice.laplacian(ix, iy);
                    acc += v * v * w * cell;
                }
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::oracle::trivial_solution;
    use std::f64::consts::TAU;

    fn grid(nx: usize, ny: usize, nt: usize) -> GridSpec<f64> {
        make_grid(1, nx, ny, nt).unwrap()
    }

    fn zero_pair(nx: usize, ny: usize) -> PotentialPair<f64> {
        PotentialPair::new(TorusField::zeros(nx, ny), TorusField::zeros(nx, ny)).unwrap()
    }

    fn default_schedule_3() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3]
    }

    #[test]
    fn rejects_inadmissible_potential() {
        let phi1 = TorusField::<f64>::sample(64, 8, |x, _| 0.2 * (TAU * x).cos());
        let err = PotentialPair::new(TorusField::zeros(64, 8), phi1).unwrap_err();
        match err {
            GeodesicError::InadmissiblePotential { index, margin } => {
                assert_eq!(index, 1);
                assert!(margin < 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn build_problem_trivial_data() {
        let g = grid(16, 16, 17);
        let problem = EpsProblem::build(zero_pair(16, 16), g, default_schedule_3()).unwrap();
        // Slot determinant of k xi (xi - 1) is k/2; the scan needs
        // k = eps_first * exp(2 xi) at the worst interior node.
        let expect = 0.1 * (2.0 * (1.0 - g.ht)).exp();
        assert!((problem.k_init - expect).abs() <= 1e-12);
        assert!(problem.k_init <= 6.0);
        let guess = problem.initial_guess();
        let rep = crate::solver::admissibility_check(guess);
        assert!(rep.admissible);
    }

    #[test]
    fn build_problem_constant_shift() {
        let g = grid(16, 8, 17);
        let pair = PotentialPair::new(
            TorusField::zeros(16, 8),
            TorusField::sample(16, 8, |_, _| 0.7),
        )
        .unwrap();
        let problem = EpsProblem::build(pair, g, default_schedule_3()).unwrap();
        // Constants drop out of every slot entry.
        let expect = 0.1 * (2.0 * (1.0 - g.ht)).exp();
        assert!((problem.k_init - expect).abs() <= 1e-12);
        let guess = problem.initial_guess();
        for iy in 0..8 {
            for ix in 0..16 {
                assert_eq!(guess.get((ix, iy, 0)), 0.0);
                assert_eq!(guess.get((ix, iy, g.nt - 1)), 0.7);
            }
        }
    }

    #[test]
    fn solve_trivial_matches_closed_form() {
        let g = grid(16, 16, 33);
        let problem = EpsProblem::build(zero_pair(16, 16), g, vec![1e-1, 1e-2]).unwrap();
        let solves = solve_geodesic(&problem, &NewtonConfig::default()).unwrap();
        assert_eq!(solves.len(), 2);
        for s in &solves {
            let exact = trivial_solution(g, s.eps);
            assert!(s.field.sup_distance(&exact).unwrap() <= 1e-3);
        }
    }

    #[test]
    fn constant_shift_solution_is_superposition() {
        let g = grid(16, 8, 17);
        let c = 0.7;
        let pair = PotentialPair::new(
            TorusField::zeros(16, 8),
            TorusField::sample(16, 8, |_, _| c),
        )
        .unwrap();
        let problem = EpsProblem::build(pair, g, vec![1e-1]).unwrap();
        let solves = solve_geodesic(&problem, &NewtonConfig::default()).unwrap();
        // The discrete solution is exactly the solved trivial field plus the
        // ramp c xi (affine additions drop from every slot entry).
        let trivial_problem = EpsProblem::build(zero_pair(16, 8), g, vec![1e-1]).unwrap();
        let trivial_solved = solve_geodesic(&trivial_problem, &NewtonConfig::default())
            .unwrap()
            .remove(0)
            .field;
        let expect = {
            let mut f = trivial_solved;
            let ramp = ScalarField::from_fn(g, |n| g.coords(n).2);
            f.add_scaled(&ramp, c);
            f
        };
        assert!(solves[0].field.sup_distance(&expect).unwrap() <= 1e-8);
        // And the continuum superposition holds at discretization accuracy.
        let mut continuum = trivial_solution(g, 0.1);
        continuum.add_scaled(&ScalarField::from_fn(g, |n| g.coords(n).2), c);
        assert!(solves[0].field.sup_distance(&continuum).unwrap() <= 1e-3);
    }

    #[test]
    fn shift_equivariance() {
        let g = grid(8, 8, 17);
        let base =
            TorusField::<f64>::sample(8, 8, |x, y| 0.02 * (TAU * x).cos() + 0.02 * (TAU * y).sin());
        let cfg = NewtonConfig::default();
        let plain = {
            let pair = PotentialPair::new(TorusField::zeros(8, 8), base.clone()).unwrap();
            let problem = EpsProblem::build(pair, g, vec![1e-2]).unwrap();
            solve_geodesic(&problem, &cfg).unwrap().remove(0).field
        };
        let (c0, c1) = (0.25, -0.5);
        let shifted = {
            let phi0 = TorusField::sample(8, 8, |_, _| c0);
            let phi1 = TorusField::from_fn(8, 8, |ix, iy| base.get(ix, iy) + c1);
            let pair = PotentialPair::new(phi0, phi1).unwrap();
            let problem = EpsProblem::build(pair, g, vec![1e-2]).unwrap();
            solve_geodesic(&problem, &cfg).unwrap().remove(0).field
        };
        let mut expect = plain;
        let affine = ScalarField::from_fn(g, |n| {
            let xi = g.coords(n).2;
            (1.0 - xi) * c0 + xi * c1
        });
        expect.add_scaled(&affine, 1.0);
        assert!(shifted.sup_distance(&expect).unwrap() <= 1e-7);
    }

    #[test]
    fn symmetry_inheritance_y_independent_data() {
        let g = grid(16, 8, 17);
        let phi1 = TorusField::<f64>::sample(16, 8, |x, _| 0.05 * (TAU * x).cos());
        let pair = PotentialPair::new(TorusField::zeros(16, 8), phi1).unwrap();
        let problem = EpsProblem::build(pair, g, vec![1e-1, 1e-2]).unwrap();
        let solves = solve_geodesic(&problem, &NewtonConfig::default()).unwrap();
        for s in &solves {
            assert!(s.field.y_variation() <= 1e-9);
        }
    }

    // Discrete comparison principle: smaller regularization lifts the
    // solution at every interior node.
    #[test]
    fn xonly_sweep_is_nodewise_monotone() {
        let g = grid(16, 8, 17);
        let phi1 = TorusField::<f64>::sample(16, 8, |x, _| 0.05 * (TAU * x).cos());
        let pair = PotentialPair::new(TorusField::zeros(16, 8), phi1).unwrap();
        let problem = EpsProblem::build(pair, g, vec![1e-1, 1e-2, 1e-3]).unwrap();
        let solves = solve_geodesic(&problem, &NewtonConfig::default()).unwrap();
        for w in solves.windows(2) {
            for node in g.interior_nodes() {
                assert!(w[1].field.get(node) > w[0].field.get(node));
            }
        }
    }

    #[test]
    fn path_extraction_examples() {
        let g = grid(8, 8, 17);
        let c = 0.6;
        let psi = ScalarField::from_fn(g, |n| c * g.coords(n).2);
        let path = extract_path(&psi);
        assert_eq!(path.slices.len(), 17);
        assert_eq!(path.velocities.len(), 15);
        for vel in &path.velocities {
            for iy in 0..8 {
                for ix in 0..8 {
                    assert!((vel.get(ix, iy) - c).abs() <= 1e-13);
                }
            }
        }
        let speed = geodesic_speed(&path);
        for s in &speed {
            assert!((s - c * c).abs() <= 1e-12);
        }
    }

    #[test]
    fn trivial_path_speed_is_second_order_in_eps() {
        let g = grid(8, 8, 33);
        let eps = 1e-2;
        let psi = trivial_solution(g, eps);
        let speed = geodesic_speed(&extract_path(&psi));
        for s in &speed {
            assert!(*s <= 71.0 * eps * eps, "speed {s}");
        }
    }

    #[test]
    fn endpoint_slices_are_boundary_data_bitwise() {
        let g = grid(16, 8, 17);
        let phi1 =
            TorusField::<f64>::sample(16, 8, |x, y| 0.03 * (TAU * x).cos() * (TAU * y).cos());
        let pair = PotentialPair::new(TorusField::zeros(16, 8), phi1.clone()).unwrap();
        let problem = EpsProblem::build(pair, g, vec![1e-1]).unwrap();
        let solves = solve_geodesic(&problem, &NewtonConfig::default()).unwrap();
        let path = extract_path(&solves[0].field);
        assert_eq!(path.slices[0], TorusField::zeros(16, 8));
        assert_eq!(path.slices[16], phi1);
    }
}
