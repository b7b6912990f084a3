//! Sweep of the empirical constants over a list of temperatures.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;
use crate::spectral::block::build_block_operator;
use crate::spectral::jacobian::sinkhorn_jacobian;
use crate::spectral::report::matrix_spectrum;
use crate::spectral::sensitivity::{hessian_scale, plan_derivative_epsilon, solve_for_differences};
use crate::spectral::support::{default_eta, detect_active_support, full_support};
use crate::transport::{SolveConfig, TransportSolution};

pub const CONSTANTS_HEADER: [&str; 8] = [
    "eps",
    "op_norm",
    "C0_est",
    "dS_de_norm",
    "K1_est",
    "K2_est",
    "rho_mean",
    "rho_std",
];

/// Scale of the uniform jitter that distinguishes the seeded variants.
pub const VARIANT_JITTER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantRow {
    pub eps: f64,
    pub op_norm: f64,
    /// `1 / lambda_min` of the reduced block operator; infinite when it is
    /// numerically singular.
    #[serde(rename = "C0_est")]
    pub c0_est: f64,
    #[serde(rename = "dS_de_norm")]
    pub ds_de_norm: f64,
    #[serde(rename = "K1_est")]
    pub k1_est: f64,
    #[serde(rename = "K2_est")]
    pub k2_est: f64,
    pub rho_mean: f64,
    pub rho_std: f64,
}

impl ConstantRow {
    fn fields(&self) -> [f64; 8] {
        [
            self.eps,
            self.op_norm,
            self.c0_est,
            self.ds_de_norm,
            self.k1_est,
            self.k2_est,
            self.rho_mean,
            self.rho_std,
        ]
    }
}

pub fn write_constants_csv<W: Write>(rows: &[ConstantRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CONSTANTS_HEADER)?;
    for r in rows {
        w.write_record(r.fields().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Variant `seed` of `cost`: seed 0 is the cost itself, other seeds add
/// independent `U[0, VARIANT_JITTER)` noise to every entry.
pub fn cost_variant(cost: &CostMatrix, seed: u64) -> Result<CostMatrix> {
    if seed == 0 {
        return Ok(cost.clone());
    }
    let n = cost.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * VARIANT_JITTER);
    cost.with_entries(cost.entries() + jitter)
}

fn reduced_inverse_bound(solution: &TransportSolution) -> Result<f64> {
    let support = match detect_active_support(solution, default_eta(solution.n())) {
        Ok(s) => s,
        Err(Error::NoSeparation { .. }) => full_support(solution),
        Err(e) => return Err(e),
    };
    match build_block_operator(solution, &support) {
        Ok(op) => Ok(op.inverse_bound()),
        Err(Error::SingularReducedSystem { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// One row per temperature.
///
/// `seeds` variants of the cost (see [`cost_variant`]) supply the spread of the
/// spectral radius; every other column refers to `cost` itself.
pub fn estimate_constants(
    cost: &CostMatrix,
    eps_list: &[f64],
    seeds: usize,
    cfg: &SolveConfig,
) -> Result<Vec<ConstantRow>> {
    cfg.validate()?;
    if seeds == 0 {
        return Err(Error::InvalidInput("seeds must be >= 1".into()));
    }
    let variants: Vec<CostMatrix> = (0..seeds as u64)
        .map(|s| cost_variant(cost, s))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        cfg.check_epsilon(eps)?;
        let sol = solve_for_differences(cost, eps, cfg.tolerance, None)?;
        let op_norm = spectral_norm(&sol.plan);
        let c0_est = reduced_inverse_bound(&sol)?;
        let ds_de_norm = plan_derivative_epsilon(&sol)?.norm();
        let hess = hessian_scale(cost, &sol, cfg.tolerance)?;

        let mut rhos = Vec::with_capacity(seeds);
        for v in &variants {
            let s = solve_for_differences(v, eps, cfg.tolerance, None)?;
            rhos.push(matrix_spectrum(&sinkhorn_jacobian(v, &s)?)?.spectral_radius);
        }
        let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
        let var = rhos.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / rhos.len() as f64;

        rows.push(ConstantRow {
            eps,
            op_norm,
            c0_est,
            ds_de_norm,
            k1_est: eps * ds_de_norm,
            k2_est: eps * eps * hess,
            rho_mean: mean,
            rho_std: var.sqrt(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn swap_cost_operator_norm() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let rows = estimate_constants(&c, &[1.0], 1, &SolveConfig::default()).unwrap();
        assert_abs_diff_eq!(rows[0].op_norm, 0.5, epsilon = 1e-9);
        assert_eq!(rows[0].rho_std, 0.0);
    }

    #[test]
    fn header_only_for_empty_list() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let rows = estimate_constants(&c, &[], 3, &SolveConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_constants_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "eps,op_norm,C0_est,dS_de_norm,K1_est,K2_est,rho_mean,rho_std\n"
        );
    }
}
