use nalgebra::DMatrix;
use serde::Serialize;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, min_singular_value, modal_condition};
use crate::spectral::jacobian::sinkhorn_jacobian;
use crate::spectral::sensitivity::{
    hessian_scale, partial_cost_norm, plan_derivative_epsilon, sensitivity_cost_norm,
    solve_for_differences,
};
use crate::spectral::support::{default_eta, detect_active_support, full_support};
use crate::transport::{SolveConfig, TransportSolution};

/// Relative slack allowed by [`duality_check`].
pub const DUALITY_SLACK: f64 = 0.05;

/// Spectral and sensitivity summary of the fixed point at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub epsilon: f64,
    pub spectral_radius: f64,
    pub spectral_gap: f64,
    pub resolvent_norm: f64,
    pub dist_one_spectrum: f64,
    /// `f64::INFINITY` when the eigenvector basis is (numerically) singular.
    /// Serialises as `null` in that case.
    pub modal_condition: f64,
    pub sensitivity_eps_norm: f64,
    pub sensitivity_cost_norm: f64,
    pub hessian_scale: f64,
    #[serde(rename = "partialC_norm")]
    pub partial_c_norm: f64,
}

/// Eigenvalue and resolvent part of a report for an arbitrary square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixSpectrum {
    pub spectral_radius: f64,
    pub dist_one_spectrum: f64,
    pub resolvent_norm: f64,
    pub modal_condition: f64,
}

pub fn matrix_spectrum(j: &DMatrix<f64>) -> Result<MatrixSpectrum> {
    let n = j.nrows();
    let lambdas = eigenvalues(j)?;
    let spectral_radius = lambdas.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dist_one_spectrum = lambdas
        .iter()
        .map(|z| (z - 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    let smin = min_singular_value(&(DMatrix::identity(n, n) - j));
    let resolvent_norm = if smin > 0.0 {
        1.0 / smin
    } else {
        f64::INFINITY
    };
    Ok(MatrixSpectrum {
        spectral_radius,
        dist_one_spectrum,
        resolvent_norm,
        modal_condition: modal_condition(j)?,
    })
}

/// Full report for `cost` at `epsilon`.
///
/// The fixed point is computed with tight settings; its last iterate is
/// accepted if its residual is within `cfg.tolerance`. The active support uses
/// the default threshold `0.5 / n`; when that threshold does not separate the
/// plan, every entry is taken as active.
pub fn spectral_report(
    cost: &CostMatrix,
    epsilon: f64,
    cfg: &SolveConfig,
) -> Result<SpectralReport> {
    cfg.validate()?;
    cfg.check_epsilon(epsilon)?;
    let sol = solve_for_differences(cost, epsilon, cfg.tolerance, None)?;
    report_for_solution(cost, &sol, cfg.tolerance)
}

/// Report for an already computed fixed point.
pub fn report_for_solution(
    cost: &CostMatrix,
    solution: &TransportSolution,
    accept_tol: f64,
) -> Result<SpectralReport> {
    let support = match detect_active_support(solution, default_eta(solution.n())) {
        Ok(s) => s,
        Err(Error::NoSeparation { .. }) => full_support(solution),
        Err(e) => return Err(e),
    };
    let j = sinkhorn_jacobian(cost, solution)?;
    let spec = matrix_spectrum(&j)?;
    let sensitivity_eps_norm = plan_derivative_epsilon(solution)?.norm();
    let sensitivity_cost_norm = sensitivity_cost_norm(solution, &support)?;
    let partial_c_norm = partial_cost_norm(solution, &support);
    let hessian_scale = hessian_scale(cost, solution, accept_tol)?;
    Ok(SpectralReport {
        epsilon: solution.epsilon,
        spectral_radius: spec.spectral_radius,
        spectral_gap: 1.0 - spec.spectral_radius,
        resolvent_norm: spec.resolvent_norm,
        dist_one_spectrum: spec.dist_one_spectrum,
        modal_condition: spec.modal_condition,
        sensitivity_eps_norm,
        sensitivity_cost_norm,
        hessian_scale,
        partial_c_norm,
    })
}

/// Outcome of [`duality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityOutcome {
    pub pass: bool,
    /// `dist / (partial_c_norm / sensitivity_cost_norm) - 1`; non-positive
    /// means the bound holds without slack.
    pub slack: f64,
    pub bound: f64,
}

/// Checks `dist(1, spec J) <= ||d_C Phi|| / ||DS||` with 5% relative slack.
pub fn duality_check(report: &SpectralReport) -> Result<DualityOutcome> {
    if !(report.sensitivity_cost_norm > 0.0) {
        return Err(Error::InvalidInput(
            "sensitivity_cost_norm must be > 0 for the duality check".into(),
        ));
    }
    let bound = report.partial_c_norm / report.sensitivity_cost_norm;
    let slack = report.dist_one_spectrum / bound - 1.0;
    Ok(DualityOutcome {
        pass: report.dist_one_spectrum <= (1.0 + DUALITY_SLACK) * bound,
        slack,
        bound,
    })
}
