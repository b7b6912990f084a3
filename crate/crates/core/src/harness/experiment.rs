//! The frozen collapse experiment: high early noise on 8×8 planted tasks,
//! three methods, and the Phase I proxies used to calibrate the safety slope.

use crate::anneal::{
    calibrate_k_safe, CalibrationResult, CalibrationSettings, ControllerConfig, CostProcess,
    Schedule,
};
use crate::error::{Error, Result};
use crate::harness::compare::{CompareConfig, TaskSpec};
use crate::harness::task::{generate_task, SyntheticTask};
use crate::spectral::ConstantRow;
use crate::tracking::{BasinModel, TrackingParams};
use crate::transport::SolveConfig;

pub const COOLING_ALPHA: f64 = 0.95;
pub const CALIBRATION_ALPHA: f64 = 0.8;
pub const GUMBEL_SCALE: f64 = 0.1;
pub const GUMBEL_SEED: u64 = 7;

pub fn collapse_task() -> TaskSpec {
    TaskSpec {
        n: 8,
        margin: 1.0,
        noise_a: 5.0,
        noise_b: 0.05,
    }
}

/// Warm-started, 200 iterations per annealing step.
pub fn collapse_solve_config() -> SolveConfig {
    SolveConfig {
        max_iterations: 200,
        ..SolveConfig::default()
    }
}

fn method(name: &str, k_safe: Option<f64>, schedule: Schedule) -> ControllerConfig {
    ControllerConfig {
        name: name.into(),
        k_safe,
        schedule,
        epsilon_start: 1.0,
        epsilon_target: 0.01,
        max_steps: 600,
        max_consecutive_pauses: 400,
        hold_steps: 20,
    }
}

/// Standard exponential, Gumbel-perturbed exponential, and the controlled
/// schedule with the given safety slope.
pub fn collapse_methods(k_safe: f64) -> Vec<ControllerConfig> {
    let exp = Schedule::Exponential {
        alpha: COOLING_ALPHA,
    };
    vec![
        method("standard", None, exp),
        method(
            "gumbel",
            None,
            Schedule::GumbelExponential {
                alpha: COOLING_ALPHA,
                noise_scale: GUMBEL_SCALE,
                seed: GUMBEL_SEED,
            },
        ),
        method("eph_asc", Some(k_safe), exp),
    ]
}

pub fn collapse_experiment(k_safe: f64, seeds: Vec<u64>) -> CompareConfig {
    CompareConfig {
        task: collapse_task(),
        seeds,
        methods: collapse_methods(k_safe),
        solve: collapse_solve_config(),
    }
}

/// Same task family with milder noise (a = 1), seeds 100 to 104.
pub fn calibration_proxies() -> Result<Vec<SyntheticTask>> {
    let t = collapse_task();
    (100..105)
        .map(|s| generate_task(t.n, t.margin, (1.0, t.noise_b), s))
        .collect()
}

pub fn calibrate_collapse_experiment() -> Result<CalibrationResult> {
    let proxies = calibration_proxies()?;
    let refs: Vec<&dyn CostProcess> = proxies.iter().map(|p| p as &dyn CostProcess).collect();
    calibrate_k_safe(
        &refs,
        CALIBRATION_ALPHA,
        &collapse_solve_config(),
        &CalibrationSettings::default(),
    )
}

/// Tracking-model constants read off a diagnostics sweep at its hottest
/// temperature: `gamma = (1 - rho) / eps`, `s = eps * ||dP/d eps||`, with
/// `kappa = 1` and a constant basin of the given radius.
pub fn fit_tracking_params(rows: &[ConstantRow], basin_radius: f64) -> Result<TrackingParams> {
    let row = rows
        .iter()
        .filter(|r| r.rho_mean < 1.0 && r.ds_de_norm > 0.0 && r.ds_de_norm.is_finite())
        .max_by(|a, b| a.eps.total_cmp(&b.eps))
        .ok_or_else(|| Error::InvalidInput("no usable sweep row to fit".into()))?;
    let gamma = (1.0 - row.rho_mean) / row.eps;
    let p = TrackingParams {
        gamma,
        sensitivity_const: row.eps * row.ds_de_norm,
        kappa: 1.0,
        basin_radius,
        basin: BasinModel::Constant,
        epsilon_start: (1.0 / gamma).min(1.0),
        schedule: None,
        initial_error: 0.0,
        epsilon_floor: 0.0,
    };
    p.validate()?;
    Ok(p)
}
