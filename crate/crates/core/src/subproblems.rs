//! Shared subproblem steps used by the smoothing solvers and the classical
//! baselines.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;

/// Solves `argmin_v h(v) - <lambda, B v> + (eta/2) ||a_u + B v - c||^2`.
///
/// With orthonormal `B` this is `prox_{h/eta}(B^T((c - a_u) + lambda/eta))`;
/// otherwise a caller-supplied solver is required (the crate bundles no
/// generic inner loop).
pub(crate) fn solve_v_subproblem(
    problem: &ProblemSpec,
    eta: f64,
    lambda: &Array1<f64>,
    a_u: &Array1<f64>,
) -> Result<Array1<f64>> {
    if let Some(solver) = &problem.v_solver {
        return solver(eta, lambda, a_u);
    }
    if !problem.b.is_orthonormal() {
        return Err(Error::MissingCapability(
            "B is not orthonormal and no v-subproblem solver was supplied".into(),
        ));
    }
    let combined = &(&problem.c - a_u) + &(lambda / eta);
    let arg = problem.b.apply_adjoint(&combined)?;
    problem.h.prox(1.0 / eta, &arg)
}

/// Solves `argmin_u g(u) - <lambda, A u> + (rho/2) ||A u + b_v - c||^2
/// + gamma b(u, center)` (the penalized, smoothed `u` step).
///
/// With orthonormal `A` this reduces to a prox of `g` at the combined point;
/// otherwise a caller-supplied solver is required. `gamma = 0` recovers the
/// classical penalized step.
pub(crate) fn solve_u_subproblem(
    problem: &ProblemSpec,
    rho: f64,
    gamma: f64,
    lambda: &Array1<f64>,
    b_v: &Array1<f64>,
) -> Result<Array1<f64>> {
    if let Some(solver) = &problem.u_solver {
        return solver(rho, gamma, lambda, b_v);
    }
    if !problem.a.is_orthonormal() {
        return Err(Error::MissingCapability(
            "A is not orthonormal and no u-subproblem solver was supplied".into(),
        ));
    }
    let combined = lambda - &((b_v - &problem.c) * rho);
    let at = problem.a.apply_adjoint(&combined)?;
    let scale = rho + gamma;
    let arg = (&(&problem.center * gamma) + &at) / scale;
    problem.g.prox(1.0 / scale, &arg)
}
