//! Damped Newton solver in log-determinant form for the discretized complex
//! Monge-Ampère equation, with admissibility safeguards and warm-started
//! continuation in the regularization parameter.

use crate::field::ScalarField;
use crate::grid::{GridSpec, Node};
use crate::krylov::bicgstab;
use crate::scalar::{lit, Real};
use crate::stencil::complex_hessian;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("inadmissible slot at node {node:?}: a = {a}, det = {det}")]
    Inadmissible { node: Node, a: f64, det: f64 },
    #[error("density is not positive at node {node:?}")]
    NonPositiveDensity { node: Node },
    #[error("line search failed: step {step} below 1e-12")]
    LineSearchFailure { step: f64 },
    #[error("maximum Newton iterations exceeded; residual {residual}")]
    MaxOuterExceeded { residual: f64 },
    #[error("linear solver produced a non-finite step")]
    LinearBreakdown,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error(
        "schedule must be non-empty, strictly decreasing and inside (0, 1]; offending index {0}"
    )]
    Invalid(usize),
}

/// Prescribed right-hand-side density of the log-determinant equation.
#[derive(Debug, Clone)]
pub enum Density<F> {
    /// `eps * exp(2 xi)`: the regularized geodesic density.
    EpsExp(F),
    /// Arbitrary per-node samples (manufactured solutions).
    Samples(ScalarField<F>),
    /// Spatially constant density.
    Const(F),
}

impl<F: Real> Density<F> {
    pub fn eval(&self, grid: &GridSpec<F>, node: Node) -> F {
        match self {
            Density::EpsExp(eps) => {
                let xi = grid.coords(node).2;
                *eps * (lit::<F>(2.0) * xi).exp()
            }
            Density::Samples(f) => f.get(node),
            Density::Const(c) => *c,
        }
    }
}

/// Newton iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig<F> {
    /// Sup-norm residual tolerance.
    pub tol_res: F,
    /// Maximum outer Newton steps.
    pub max_outer: usize,
    /// Backtracking factor in (0, 1).
    pub armijo_factor: F,
    /// Sufficient-decrease slope.
    pub armijo_slope: F,
    /// Relative Krylov tolerance floor; the per-step tolerance is
    /// `max(linear_tol, 0.1 * ||r||_inf)` (inexact Newton).
    pub linear_tol: F,
    /// Krylov iteration cap.
    pub linear_max: usize,
}

impl<F: Real> Default for NewtonConfig<F> {
    fn default() -> Self {
        NewtonConfig {
            tol_res: lit(1e-9),
            max_outer: 50,
            armijo_factor: lit(0.5),
            armijo_slope: lit(1e-4),
            linear_tol: lit(1e-8),
            linear_max: 1000,
        }
    }
}

/// Convergence record of one Newton solve.
#[derive(Debug, Clone)]
pub struct SolveReport<F> {
    pub outer_iters: usize,
    /// Sup-norm residuals: the initial one, then one entry per accepted step.
    pub residual_history: Vec<F>,
    /// Minimum slot determinant over all accepted iterates.
    pub min_admissibility: F,
    pub linear_iter_counts: Vec<usize>,
    pub wall_time: Duration,
}

/// Log-determinant residual on interior nodes.
#[derive(Debug, Clone)]
pub struct ResidualField<F> {
    grid: GridSpec<F>,
    values: Vec<F>,
}

impl<F: Real> ResidualField<F> {
    pub fn grid(&self) -> &GridSpec<F> {
        &self.grid
    }

    /// Value at an interior node.
    pub fn get(&self, node: Node) -> F {
        self.values[self.grid.interior_idx(node)]
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn sup_norm(&self) -> F {
        self.values.iter().fold(F::zero(), |a, v| a.max(v.abs()))
    }
}

// Per-interior-node slot data cached by the Newton loop.
struct Slots<F> {
    a: Vec<F>,
    b_re: Vec<F>,
    b_im: Vec<F>,
    c: Vec<F>,
    det: Vec<F>,
    min_det: F,
}

fn compute_slots<F: Real>(psi: &ScalarField<F>) -> Result<Slots<F>, SolveError> {
    let g = psi.grid();
    let n = g.interior_len();
    let mut slots = Slots {
        a: Vec::with_capacity(n),
        b_re: Vec::with_capacity(n),
        b_im: Vec::with_capacity(n),
        c: Vec::with_capacity(n),
        det: Vec::with_capacity(n),
        min_det: F::infinity(),
    };
    for idx in 0..n {
        let node = g.interior_node(idx);
        let s = complex_hessian(psi, node).expect("interior node");
        let det = s.det();
        if !(s.a > F::zero() && det > F::zero()) {
            return Err(SolveError::Inadmissible {
                node,
                a: s.a.to_f64().unwrap_or(f64::NAN),
                det: det.to_f64().unwrap_or(f64::NAN),
            });
        }
        slots.a.push(s.a);
        slots.b_re.push(s.b.re);
        slots.b_im.push(s.b.im);
        slots.c.push(s.c);
        slots.det.push(det);
        slots.min_det = slots.min_det.min(det);
    }
    Ok(slots)
}

fn residual_from_slots<F: Real>(
    grid: &GridSpec<F>,
    slots: &Slots<F>,
    rhs: &Density<F>,
) -> Result<ResidualField<F>, SolveError> {
    let n = grid.interior_len();
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let node = grid.interior_node(idx);
        let rho = rhs.eval(grid, node);
        if !(rho > F::zero()) {
            return Err(SolveError::NonPositiveDensity { node });
        }
        values.push(slots.det[idx].ln() - rho.ln());
    }
    Ok(ResidualField {
        grid: *grid,
        values,
    })
}

/// Log-determinant residual `log det(slot) - log rhs` at interior nodes.
pub fn log_residual<F: Real>(
    psi: &ScalarField<F>,
    rhs: &Density<F>,
) -> Result<ResidualField<F>, SolveError> {
    let slots = compute_slots(psi)?;
    residual_from_slots(psi.grid(), &slots, rhs)
}

// Action of the residual Jacobian on an interior vector, using cached slots.
// The derivative of log det M(psi) along delta is tr(M^{-1} dM(delta)):
//   [c (d_xx + d_yy)/4 + a d_titi/4 - (b_re d_xti - b_im d_yti)/2] / det.
fn apply_jacobian_vec<F: Real>(grid: &GridSpec<F>, slots: &Slots<F>, v: &[F], out: &mut [F]) {
    let (nx, ny, nt) = (grid.nx, grid.ny, grid.nt);
    let inv_hx2 = F::one() / (grid.hx * grid.hx);
    let inv_hy2 = F::one() / (grid.hy * grid.hy);
    let inv_ht2 = F::one() / (grid.ht * grid.ht);
    let inv_4hxht = F::one() / (lit::<F>(4.0) * grid.hx * grid.ht);
    let inv_4hyht = F::one() / (lit::<F>(4.0) * grid.hy * grid.ht);
    let quarter = lit::<F>(0.25);
    let half = lit::<F>(0.5);
    let two = lit::<F>(2.0);

    let at = |v: &[F], ix: usize, iy: usize, it: usize| -> F {
        // Boundary layers carry zero Dirichlet increments.
        if it == 0 || it == nt - 1 {
            F::zero()
        } else {
            v[ix + nx * (iy + ny * (it - 1))]
        }
    };

    for idx in 0..grid.interior_len() {
        let (ix, iy, it) = grid.interior_node(idx);
        let xp = grid.wrap_x(ix, 1);
        let xm = grid.wrap_x(ix, -1);
        let yp = grid.wrap_y(iy, 1);
        let ym = grid.wrap_y(iy, -1);
        let center = v[idx];

        let dxx = (at(v, xp, iy, it) - two * center + at(v, xm, iy, it)) * inv_hx2;
        let dyy = (at(v, ix, yp, it) - two * center + at(v, ix, ym, it)) * inv_hy2;
        let dtt = (at(v, ix, iy, it + 1) - two * center + at(v, ix, iy, it - 1)) * inv_ht2;
        let dxt = (at(v, xp, iy, it + 1) - at(v, xp, iy, it - 1) - at(v, xm, iy, it + 1)
            + at(v, xm, iy, it - 1))
            * inv_4hxht;
        let dyt = (at(v, ix, yp, it + 1) - at(v, ix, yp, it - 1) - at(v, ix, ym, it + 1)
            + at(v, ix, ym, it - 1))
            * inv_4hyht;

        out[idx] = (slots.c[idx] * quarter * (dxx + dyy) + slots.a[idx] * quarter * dtt
            - half * (slots.b_re[idx] * dxt - slots.b_im[idx] * dyt))
            / slots.det[idx];
    }
}

/// Directional derivative of [`log_residual`] at `psi` along `delta`,
/// returned as a field that vanishes on the Dirichlet layers. `delta` is an
/// arbitrary full-grid field; entries on the boundary layers participate
/// through the stencils exactly as in the nonlinear residual.
pub fn jacobian_apply<F: Real>(
    psi: &ScalarField<F>,
    delta: &ScalarField<F>,
) -> Result<ScalarField<F>, SolveError> {
    let g = psi.grid();
    let slots = compute_slots(psi)?;
    let mut out = ScalarField::zeros(*g);
    let two = lit::<F>(2.0);
    for idx in 0..g.interior_len() {
        let node = g.interior_node(idx);
        let d = complex_hessian(delta, node).expect("interior node");
        let da = d.a - F::one();
        let cross = two * (slots.b_re[idx] * d.b.re + slots.b_im[idx] * d.b.im);
        let value = (slots.c[idx] * da + slots.a[idx] * d.c - cross) / slots.det[idx];
        out.set(node, value);
    }
    Ok(out)
}

/// Strict positivity check of the slot matrices over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport<F> {
    pub admissible: bool,
    pub min_det: F,
    pub worst_node: Node,
}

pub fn admissibility_check<F: Real>(psi: &ScalarField<F>) -> AdmissibilityReport<F> {
    let g = psi.grid();
    let mut report = AdmissibilityReport {
        admissible: true,
        min_det: F::infinity(),
        worst_node: (0, 0, 1),
    };
    for node in g.interior_nodes() {
        let s = complex_hessian(psi, node).expect("interior node");
        let det = s.det();
        if det < report.min_det {
            report.min_det = det;
            report.worst_node = node;
        }
        if !(s.a > F::zero() && det > F::zero()) {
            report.admissible = false;
        }
    }
    report
}

/// Damped Newton iteration on the log-determinant residual. Boundary layers
/// of `psi0` are Dirichlet data and are never modified.
pub fn newton_solve<F: Real>(
    psi0: &ScalarField<F>,
    rhs: &Density<F>,
    cfg: &NewtonConfig<F>,
) -> Result<(ScalarField<F>, SolveReport<F>), SolveError> {
    let start = Instant::now();
    let g = *psi0.grid();
    let n = g.interior_len();

    let mut psi = psi0.clone();
    let mut slots = compute_slots(&psi)?;
    let mut residual = residual_from_slots(&g, &slots, rhs)?;
    let mut res_norm = residual.sup_norm();
    let mut min_admissibility = slots.min_det;

    let mut history = vec![res_norm];
    let mut linear_iter_counts = Vec::new();

    for outer in 0..cfg.max_outer {
        if res_norm <= cfg.tol_res {
            return Ok((
                psi,
                SolveReport {
                    outer_iters: outer,
                    residual_history: history,
                    min_admissibility,
                    linear_iter_counts,
                    wall_time: start.elapsed(),
                },
            ));
        }

        // Right-hand side -r and Jacobi preconditioner from the stencil
        // diagonal (cross stencils contribute nothing on the diagonal).
        let b: Vec<F> = residual.values().iter().map(|r| -*r).collect();
        let inv_hx2 = F::one() / (g.hx * g.hx);
        let inv_hy2 = F::one() / (g.hy * g.hy);
        let inv_ht2 = F::one() / (g.ht * g.ht);
        let half = lit::<F>(0.5);
        let mut inv_diag = Vec::with_capacity(n);
        for idx in 0..n {
            let d = -(slots.c[idx] * half * (inv_hx2 + inv_hy2) + slots.a[idx] * half * inv_ht2)
                / slots.det[idx];
            inv_diag.push(F::one() / d);
        }

        let eta = cfg
            .linear_tol
            .max(lit::<F>(0.1) * res_norm)
            .min(lit::<F>(0.5));
        let mut step = vec![F::zero(); n];
        let outcome = bicgstab(
            |v, out| apply_jacobian_vec(&g, &slots, v, out),
            &inv_diag,
            &b,
            eta,
            cfg.linear_max,
            &mut step,
        );
        linear_iter_counts.push(outcome.iterations);
        if step.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::LinearBreakdown);
        }

        // Backtracking: first into the admissible cone, then Armijo on the
        // sup-norm residual.
        let mut t = F::one();
        let floor = lit::<F>(1e-12);
        loop {
            let mut candidate = psi.clone();
            for idx in 0..n {
                let node = g.interior_node(idx);
                let v = candidate.get(node) + t * step[idx];
                candidate.set(node, v);
            }
            match compute_slots(&candidate) {
                Ok(cand_slots) => {
                    let cand_residual = residual_from_slots(&g, &cand_slots, rhs)?;
                    let cand_norm = cand_residual.sup_norm();
                    if cand_norm <= (F::one() - cfg.armijo_slope * t) * res_norm {
                        psi = candidate;
                        min_admissibility = min_admissibility.min(cand_slots.min_det);
                        slots = cand_slots;
                        residual = cand_residual;
                        res_norm = cand_norm;
                        history.push(res_norm);
                        break;
                    }
                }
                Err(_) => {}
            }
            t *= cfg.armijo_factor;
            if t < floor {
                return Err(SolveError::LineSearchFailure {
                    step: t.to_f64().unwrap_or(0.0),
                });
            }
        }
    }

    if res_norm <= cfg.tol_res {
        Ok((
            psi,
            SolveReport {
                outer_iters: cfg.max_outer,
                residual_history: history,
                min_admissibility,
                linear_iter_counts,
                wall_time: start.elapsed(),
            },
        ))
    } else {
        Err(SolveError::MaxOuterExceeded {
            residual: res_norm.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// One solved member of the continuation family.
#[derive(Debug, Clone)]
pub struct EpsSolve<F> {
    pub eps: F,
    pub field: ScalarField<F>,
    pub report: SolveReport<F>,
}

#[derive(Debug, Error)]
pub enum SweepError<F: Real> {
    #[error("invalid schedule: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("solve failed at eps = {eps}: {source}")]
    SolveFailed {
        eps: f64,
        #[source]
        source: SolveError,
        /// Successfully solved prefix of the schedule.
        completed: Vec<EpsSolve<F>>,
    },
}

pub fn validate_schedule<F: Real>(schedule: &[F]) -> Result<(), ScheduleError> {
    if schedule.is_empty() {
        return Err(ScheduleError::Invalid(0));
    }
    for (i, &eps) in schedule.iter().enumerate() {
        let ok_range = eps > F::zero() && eps <= F::one();
        let ok_order = i == 0 || eps < schedule[i - 1];
        if !(ok_range && ok_order) {
            return Err(ScheduleError::Invalid(i));
        }
    }
    Ok(())
}

/// Warm-started continuation over a strictly decreasing schedule of the
/// regularization parameter, with density `eps * exp(2 xi)`. Aborts on the
/// first failure, surfacing the completed prefix.
pub fn continuity_sweep<F: Real>(
    psi0: &ScalarField<F>,
    schedule: &[F],
    cfg: &NewtonConfig<F>,
) -> Result<Vec<EpsSolve<F>>, SweepError<F>> {
    validate_schedule(schedule)?;
    let mut solves: Vec<EpsSolve<F>> = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let initial = solves.last().map(|s| &s.field).unwrap_or(psi0);
        match newton_solve(initial, &Density::EpsExp(eps), cfg) {
            Ok((field, report)) => solves.push(EpsSolve { eps, field, report }),
            Err(source) => {
                return Err(SweepError::SolveFailed {
                    eps: eps.to_f64().unwrap_or(f64::NAN),
                    source,
                    completed: solves,
                })
            }
        }
    }
    Ok(solves)
}
