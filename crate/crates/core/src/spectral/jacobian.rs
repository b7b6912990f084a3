//! Derivative of one balancing round at a fixed point.
//!
//! The round map `(f, g) -> (f', g')` commutes with the gauge shift
//! `(f + s, g - s)`, so it descends to the quotient space. Coordinates on the
//! quotient are `x = (f_0, ..., f_{n-2}, g_0, ..., g_{n-1})` with the last row
//! potential recovered from `sum f = 0`.

use nalgebra::{DMatrix, DVector};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::transport::{balance_round, logsumexp, TransportSolution};

/// Largest relative Frobenius disagreement tolerated between the analytic and
/// finite-difference Jacobians.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-4;

/// Maps gauge-fixed coordinates to full potentials.
pub fn embed(x: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    let mut f = DVector::zeros(n);
    for i in 0..n - 1 {
        f[i] = x[i];
    }
    f[n - 1] = -x.rows(0, n - 1).sum();
    let g = x.rows(n - 1, n).into_owned();
    (f, g)
}

/// Gauge-fixes `(f, g)` so that `sum f = 0` and drops the last row potential.
pub fn project(f: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    let n = f.len();
    let m = f.mean();
    let mut x = DVector::zeros(2 * n - 1);
    for i in 0..n - 1 {
        x[i] = f[i] - m;
    }
    for j in 0..n {
        x[n - 1 + j] = g[j] + m;
    }
    x
}

/// Matrix of [`embed`].
pub(crate) fn embed_matrix(n: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(2 * n, 2 * n - 1);
    for i in 0..n - 1 {
        e[(i, i)] = 1.0;
        e[(n - 1, i)] = -1.0;
    }
    for j in 0..n {
        e[(n + j, n - 1 + j)] = 1.0;
    }
    e
}

/// Matrix of [`project`].
pub(crate) fn project_matrix(n: usize) -> DMatrix<f64> {
    let w = 1.0 / n as f64;
    let mut q = DMatrix::zeros(2 * n - 1, 2 * n);
    for i in 0..n - 1 {
        for k in 0..n {
            q[(i, k)] = if i == k { 1.0 - w } else { -w };
        }
    }
    for j in 0..n {
        for k in 0..n {
            q[(n - 1 + j, k)] = w;
        }
        q[(n - 1 + j, n + j)] = 1.0;
    }
    q
}

/// Row-conditional probabilities `R_ij = P_ij / sum_j P_ij` of the half step
/// taken from `g` (the row update ignores `f`), and column-conditional `K_ji = P'_ij / sum_i P'_ij` of
/// the second half step.
fn conditionals(cost: &CostMatrix, epsilon: f64, g: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = cost.n();
    let c = cost.entries();
    let mut row_cond = DMatrix::zeros(n, n);
    let mut f_new = DVector::zeros(n);
    for i in 0..n {
        let z: Vec<f64> = (0..n).map(|j| (g[j] - c[(i, j)]) / epsilon).collect();
        let lse = logsumexp(z.iter().copied());
        for j in 0..n {
            row_cond[(i, j)] = (z[j] - lse).exp();
        }
        f_new[i] = epsilon * (cost.row_marginal()[i].ln() - lse);
    }
    let mut col_cond = DMatrix::zeros(n, n);
    for j in 0..n {
        let z: Vec<f64> = (0..n).map(|i| (f_new[i] - c[(i, j)]) / epsilon).collect();
        let lse = logsumexp(z.iter().copied());
        for i in 0..n {
            col_cond[(j, i)] = (z[i] - lse).exp();
        }
    }
    (row_cond, col_cond)
}

/// Ungauged `2n x 2n` derivative `[[0, -R], [0, K R]]`.
fn full_derivative(row_cond: &DMatrix<f64>, col_cond: &DMatrix<f64>) -> DMatrix<f64> {
    let n = row_cond.nrows();
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    d.view_mut((0, n), (n, n)).copy_from(&(-row_cond));
    d.view_mut((n, n), (n, n)).copy_from(&(col_cond * row_cond));
    d
}

/// Analytic Jacobian in gauge-fixed coordinates, without the finite-difference
/// cross-check.
pub fn analytic_jacobian(cost: &CostMatrix, solution: &TransportSolution) -> DMatrix<f64> {
    let n = cost.n();
    let (r, k) = conditionals(cost, solution.epsilon, &solution.log_potentials_g);
    project_matrix(n) * full_derivative(&r, &k) * embed_matrix(n)
}

/// Central-difference Jacobian of the gauge-fixed round map.
pub fn finite_difference_jacobian(cost: &CostMatrix, solution: &TransportSolution) -> DMatrix<f64> {
    let n = cost.n();
    let eps = solution.epsilon;
    let h = 1e-5 * eps;
    let x0 = project(&solution.log_potentials_f, &solution.log_potentials_g);
    let round = |x: &DVector<f64>| {
        let (f, g) = embed(x, n);
        let (f2, g2) = balance_round(cost, eps, &f, &g);
        project(&f2, &g2)
    };
    let d = 2 * n - 1;
    let mut jac = DMatrix::zeros(d, d);
    for k in 0..d {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[k] += h;
        xm[k] -= h;
        let col = (round(&xp) - round(&xm)) / (2.0 * h);
        jac.set_column(k, &col);
    }
    jac
}

/// Jacobian of one full balancing round at the solution, in the
/// `(2n - 1)`-dimensional gauge-fixed potential space.
///
/// Fails with [`Error::InconsistentJacobian`] if the analytic matrix and the
/// central-difference matrix disagree by more than [`JACOBIAN_CHECK_TOL`]
/// in relative Frobenius norm.
pub fn sinkhorn_jacobian(cost: &CostMatrix, solution: &TransportSolution) -> Result<DMatrix<f64>> {
    if solution.n() != cost.n() {
        return Err(Error::InvalidInput(format!(
            "solution has n = {}, cost has n = {}",
            solution.n(),
            cost.n()
        )));
    }
    let analytic = analytic_jacobian(cost, solution);
    let fd = finite_difference_jacobian(cost, solution);
    let scale = analytic.norm().max(1e-12);
    let relative_error = (&analytic - &fd).norm() / scale;
    if !(relative_error <= JACOBIAN_CHECK_TOL) {
        return Err(Error::InconsistentJacobian { relative_error });
    }
    Ok(analytic)
}
