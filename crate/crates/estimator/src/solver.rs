//! Dense Levenberg-Marquardt core shared by initialization and per-frame
//! fusion.
//!
//! Problems are small (a handful of unknowns per drone), so the normal
//! equations are formed densely and solved by Cholesky. Steps are accepted
//! only when they decrease the cost, which keeps the reported cost monotone.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use swarm_core::LmConfig;

/// Sum-of-squares problem with analytic Jacobians.
pub trait LeastSquaresProblem {
    fn residual_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// Writes residuals (and the Jacobian when requested) at `params`.
    fn fill(&self, params: &DVector<f64>, residuals: &mut DVector<f64>, jacobian: Option<&mut DMatrix<f64>>);
    /// Hook to nudge the iterate away from points where a Jacobian is
    /// undefined (e.g. a range residual at the origin).
    fn regularize(&self, _params: &mut DVector<f64>) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
    pub wall_time_s: f64,
}

/// Minimizes the sum of squared residuals starting from `initial`.
///
/// Damping starts at the configured value, divides by 10 on every accepted
/// step and multiplies by 10 on every rejection. Terminates on relative cost
/// decrease below `cost_tolerance`, gradient infinity norm below
/// `gradient_tolerance`, or the iteration cap; in the last case the best
/// iterate seen is returned with `converged = false`.
pub fn solve(
    problem: &impl LeastSquaresProblem,
    initial: DVector<f64>,
    cfg: &LmConfig,
) -> (DVector<f64>, SolverReport) {
    let start = Instant::now();
    let m = problem.residual_dim();
    let n = problem.param_dim();

    let mut params = initial;
    problem.regularize(&mut params);

    let mut residuals = DVector::zeros(m);
    let mut jacobian = DMatrix::zeros(m, n);
    problem.fill(&params, &mut residuals, None);
    let mut cost = residuals.norm_squared();
    let initial_cost = cost;

    let mut lambda = cfg.initial_damping;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        problem.fill(&params, &mut residuals, Some(&mut jacobian));
        let gradient = jacobian.transpose() * &residuals;
        if gradient.amax() < cfg.gradient_tolerance {
            converged = true;
            break;
        }

        let mut normal = jacobian.transpose() * &jacobian;
        for i in 0..n {
            normal[(i, i)] += lambda;
        }
        let step = match normal.cholesky() {
            Some(chol) => chol.solve(&(-&gradient)),
            None => {
                lambda *= 10.0;
                continue;
            }
        };

        let mut candidate = &params + step;
        problem.regularize(&mut candidate);
        let mut candidate_residuals = DVector::zeros(m);
        problem.fill(&candidate, &mut candidate_residuals, None);
        let candidate_cost = candidate_residuals.norm_squared();

        if candidate_cost < cost {
            let relative_decrease = (cost - candidate_cost) / cost.max(f64::MIN_POSITIVE);
            params = candidate;
            cost = candidate_cost;
            lambda *= 0.1;
            if relative_decrease < cfg.cost_tolerance || cost == 0.0 {
                converged = true;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                // Numerically stuck; the current iterate is already the best.
                break;
            }
        }
    }

    let report = SolverReport {
        iterations,
        initial_cost,
        final_cost: cost,
        converged,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    (params, report)
}
