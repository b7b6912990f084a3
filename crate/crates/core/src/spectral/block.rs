use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, zero_sum_basis};
use crate::spectral::support::ActiveSupport;
use crate::transport::TransportSolution;

/// Below this the reduced operator is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// The symmetric operator `[[diag(r), P], [P^T, diag(c)]]` governing the
/// linearised marginal constraints, and its restriction to the active rows and
/// columns.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub matrix: DMatrix<f64>,
    /// Active block expressed in an orthonormal basis of
    /// `{sum f_active = 0, sum g_active = 0}`.
    pub reduced: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

impl BlockOperator {
    /// `1 / lambda_min` of the reduced operator.
    pub fn inverse_bound(&self) -> f64 {
        1.0 / self.min_eigenvalue
    }
}

/// Full block operator with achieved marginals `r = P 1`, `c = P^T 1`.
pub fn block_matrix(plan: &DMatrix<f64>) -> DMatrix<f64> {
    let n = plan.nrows();
    let r = plan.column_sum();
    let c = plan.row_sum();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, i)] = r[i];
        a[(n + i, n + i)] = c[i];
        for j in 0..n {
            a[(i, n + j)] = plan[(i, j)];
            a[(n + j, i)] = plan[(i, j)];
        }
    }
    a
}

pub fn build_block_operator(
    solution: &TransportSolution,
    support: &ActiveSupport,
) -> Result<BlockOperator> {
    let n = solution.n();
    let matrix = block_matrix(&solution.plan);
    let rows = &support.active_rows;
    let cols = &support.active_cols;
    let (kr, kc) = (rows.len(), cols.len());
    if kr + kc < 3 {
        return Err(Error::InvalidInput(format!(
            "active support spans {kr} rows and {kc} columns; reduced system is empty"
        )));
    }

    let vars: Vec<usize> = rows
        .iter()
        .copied()
        .chain(cols.iter().map(|&j| n + j))
        .collect();
    let active = DMatrix::from_fn(vars.len(), vars.len(), |a, b| matrix[(vars[a], vars[b])]);

    let hr = zero_sum_basis(kr);
    let hc = zero_sum_basis(kc);
    let mut basis = DMatrix::zeros(kr + kc, hr.ncols() + hc.ncols());
    basis.view_mut((0, 0), (kr, hr.ncols())).copy_from(&hr);
    basis
        .view_mut((kr, hr.ncols()), (kc, hc.ncols()))
        .copy_from(&hc);

    let reduced = basis.transpose() * active * &basis;
    let min_eigenvalue = symmetric_eigenvalues(&reduced)[0];
    if min_eigenvalue <= SINGULAR_THRESHOLD {
        return Err(Error::SingularReducedSystem {
            lambda_min: min_eigenvalue,
        });
    }
    Ok(BlockOperator {
        matrix,
        reduced,
        min_eigenvalue,
    })
}
