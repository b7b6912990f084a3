//! Plan sensitivities by implicit differentiation of the marginal constraints.
//!
//! Differentiating `sum_j P_ij = r_i`, `sum_i P_ij = c_j` with
//! `P_ij = exp((f_i + g_j - C_ij) / eps)` gives a linear system in the
//! potential derivatives with the block operator as its matrix. The system is
//! singular along the gauge direction `(1, -1)`; adding the rank-one term
//! `v v^T` with `v = (1, -1) / sqrt(2n)` removes that null direction without
//! changing the (gauge-orthogonal) solution.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::spectral::block::block_matrix;
use crate::spectral::jacobian::project_matrix;
use crate::spectral::support::ActiveSupport;
use crate::transport::{sinkhorn_iterate, SolveConfig, TransportSolution};

/// Random unit directions on the support added to the canonical ones when
/// estimating the cost-sensitivity norm.
pub const RANDOM_DIRECTIONS: usize = 8;

/// Seed for those directions; fixed so reports are reproducible.
const DIRECTION_SEED: u64 = 0x5eed;

/// Singular values of the regularised system below this fraction of the
/// largest are discarded.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-14;

/// Solves `A z = b` for `z` orthogonal to the gauge direction.
///
/// Uses a truncated SVD: when the support splits into weakly coupled blocks
/// the relative potential shifts between blocks are determined only to
/// `exp(-margin / eps)` accuracy, and those directions are dropped.
fn solve_regularized(plan: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let n = plan.nrows();
    let mut a = block_matrix(plan);
    let w = 1.0 / (2 * n) as f64;
    for p in 0..2 * n {
        for q in 0..2 * n {
            let sp = if p < n { 1.0 } else { -1.0 };
            let sq = if q < n { 1.0 } else { -1.0 };
            a[(p, q)] += sp * sq * w;
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(rhs, PSEUDO_INVERSE_CUTOFF * smax)
        .ok()
        .filter(|z| z.iter().all(|v| v.is_finite()))
        .ok_or_else(|| {
            Error::Numerical("implicit-differentiation system could not be solved".into())
        })
}

/// `dP_ij = (P_ij / eps) (df_i + dg_j - w_ij)` for a right-hand side built
/// from weights `w`.
fn plan_response(
    plan: &DMatrix<f64>,
    epsilon: f64,
    weights: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = plan.nrows();
    let weighted = plan.component_mul(weights);
    let mut rhs = DVector::zeros(2 * n);
    for i in 0..n {
        rhs[i] = weighted.row(i).sum();
    }
    for j in 0..n {
        rhs[n + j] = weighted.column(j).sum();
    }
    let z = solve_regularized(plan, &rhs)?;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        plan[(i, j)] / epsilon * (z[i] + z[n + j] - weights[(i, j)])
    }))
}

/// `dP / d eps` at fixed cost.
pub fn plan_derivative_epsilon(solution: &TransportSolution) -> Result<DMatrix<f64>> {
    let log_p = solution.plan.map(|p| if p > 0.0 { p.ln() } else { 0.0 });
    plan_response(&solution.plan, solution.epsilon, &log_p)
}

/// Directional derivative of the plan along a cost perturbation.
pub fn plan_derivative_cost(
    solution: &TransportSolution,
    direction: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if direction.shape() != solution.plan.shape() {
        return Err(Error::InvalidInput(
            "direction shape does not match plan".into(),
        ));
    }
    plan_response(&solution.plan, solution.epsilon, direction)
}

/// Lower bound on the operator norm of `C -> P` restricted to perturbations
/// supported on `support`: the largest `||dP||_F` over unit canonical
/// directions `e_kl` with `(k, l)` in the support and a few random unit
/// directions on the support.
pub fn sensitivity_cost_norm(solution: &TransportSolution, support: &ActiveSupport) -> Result<f64> {
    let n = solution.n();
    let mut best = 0.0f64;
    for &(k, l) in &support.indices {
        let mut d = DMatrix::zeros(n, n);
        d[(k, l)] = 1.0;
        best = best.max(plan_derivative_cost(solution, &d)?.norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    for _ in 0..RANDOM_DIRECTIONS {
        let mut d = DMatrix::zeros(n, n);
        for &(k, l) in &support.indices {
            d[(k, l)] = rng.random::<f64>() * 2.0 - 1.0;
        }
        let norm = d.norm();
        if norm > 0.0 {
            d /= norm;
            best = best.max(plan_derivative_cost(solution, &d)?.norm());
        }
    }
    Ok(best)
}

/// Derivative of the gauge-fixed round map with respect to the cost entries in
/// `support`, as a `(2n - 1) x |S|` matrix.
pub fn partial_cost_matrix(solution: &TransportSolution, support: &ActiveSupport) -> DMatrix<f64> {
    let n = solution.n();
    let p = &solution.plan;
    let r = p.column_sum();
    let c = p.row_sum();
    let mut full = DMatrix::zeros(2 * n, support.len());
    for (col, &(k, l)) in support.indices.iter().enumerate() {
        let rk = p[(k, l)] / r[k];
        full[(k, col)] = rk;
        for j in 0..n {
            let mut v = -(p[(k, j)] / c[j]) * rk;
            if j == l {
                v += p[(k, l)] / c[l];
            }
            full[(n + j, col)] = v;
        }
    }
    project_matrix(n) * full
}

/// Spectral norm of [`partial_cost_matrix`].
pub fn partial_cost_norm(solution: &TransportSolution, support: &ActiveSupport) -> f64 {
    spectral_norm(&partial_cost_matrix(solution, support))
}

/// Solve used by the finite-difference estimates: tight tolerance, last
/// iterate accepted if it meets `accept_tol`.
pub fn solve_for_differences(
    cost: &CostMatrix,
    epsilon: f64,
    accept_tol: f64,
    warm: Option<&TransportSolution>,
) -> Result<TransportSolution> {
    let (sol, _) = sinkhorn_iterate(cost, epsilon, &SolveConfig::precise(), warm)?;
    if sol.marginal_residual > accept_tol {
        return Err(Error::NotConverged {
            residual: sol.marginal_residual,
            solution: Box::new(sol),
        });
    }
    Ok(sol)
}

/// Central difference `(P(eps + h) - P(eps - h)) / 2h` with `h = rel_step * eps`.
pub fn finite_difference_epsilon(
    cost: &CostMatrix,
    solution: &TransportSolution,
    rel_step: f64,
    accept_tol: f64,
) -> Result<DMatrix<f64>> {
    let eps = solution.epsilon;
    let h = rel_step * eps;
    let plus = solve_for_differences(cost, eps + h, accept_tol, Some(solution))?;
    let minus = solve_for_differences(cost, eps - h, accept_tol, Some(solution))?;
    Ok((plus.plan - minus.plan) / (2.0 * h))
}

/// `||P(eps + h) - 2 P(eps) + P(eps - h)||_F / h^2` with `h = 1e-3 eps`.
pub fn hessian_scale(
    cost: &CostMatrix,
    solution: &TransportSolution,
    accept_tol: f64,
) -> Result<f64> {
    let eps = solution.epsilon;
    let h = 1e-3 * eps;
    let plus = solve_for_differences(cost, eps + h, accept_tol, Some(solution))?;
    let minus = solve_for_differences(cost, eps - h, accept_tol, Some(solution))?;
    let second = plus.plan - &solution.plan * 2.0 + minus.plan;
    Ok(second.norm() / (h * h))
}
