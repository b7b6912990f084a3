//! Browser bindings for the demo page.
//!
//! Each export takes plain numbers and returns a JSON string; the page parses
//! it and draws on a canvas. Errors surface as JavaScript exceptions.

use entropic_anneal::anneal::Schedule;
use entropic_anneal::harness::{generate_task, random_cost};
use entropic_anneal::io::matrix_rows;
use entropic_anneal::spectral::{pseudospectrum_grid, sinkhorn_jacobian, spectral_report};
use entropic_anneal::tracking::{critical_epsilon, simulate_tracking, BasinModel, TrackingParams};
use entropic_anneal::{
    plan_entropy, round_to_assignment, sinkhorn_solve, CostMatrix, Error, SolveConfig,
};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 24;

/// Default tolerance with a larger iteration budget: planted tasks near a
/// permutation converge slowly at low temperature.
fn demo_solve() -> SolveConfig {
    SolveConfig {
        max_iterations: 100_000,
        ..SolveConfig::default()
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(|e| JsError::new(&e.to_string()))
}

/// `margin > 0` gives a planted task, otherwise i.i.d. uniform costs.
fn cost_for(n: usize, margin: f64, seed: u64) -> Result<(CostMatrix, Option<Vec<usize>>), JsError> {
    if !(2..=MAX_N).contains(&n) {
        return Err(JsError::new(&format!("n must be in 2..={MAX_N}")));
    }
    if margin > 0.0 {
        let t = generate_task(n, margin, (0.0, 0.0), seed).map_err(js)?;
        Ok((t.base_cost, Some(t.planted)))
    } else {
        Ok((random_cost(n, seed).map_err(js)?, None))
    }
}

/// Solves one instance and returns the plan with its rounding and spectral
/// summary.
#[wasm_bindgen]
pub fn solve(n: usize, margin: f64, epsilon: f64, seed: u64) -> Result<String, JsError> {
    let (cost, planted) = cost_for(n, margin, seed)?;
    let cfg = demo_solve();
    let s = sinkhorn_solve(&cost, epsilon, &cfg, None).map_err(js)?;
    let report = spectral_report(&cost, epsilon, &cfg).ok();
    to_json(&json!({
        "epsilon": s.epsilon,
        "iterations": s.iterations,
        "marginal_residual": s.marginal_residual,
        "entropy": plan_entropy(&s),
        "assignment": round_to_assignment(&s).permutation,
        "planted": planted,
        "plan": matrix_rows(&s.plan),
        "report": report,
    }))
}

/// `sigma_min(zI - J)` for the fixed-point Jacobian on a square grid.
#[wasm_bindgen]
pub fn pseudospectrum(
    n: usize,
    margin: f64,
    epsilon: f64,
    seed: u64,
    resolution: usize,
) -> Result<String, JsError> {
    let (cost, _) = cost_for(n, margin, seed)?;
    let s = sinkhorn_solve(&cost, epsilon, &demo_solve(), None).map_err(js)?;
    let j = sinkhorn_jacobian(&cost, &s).map_err(js)?;
    let grid = pseudospectrum_grid(&j, (-0.2, 1.2), (-0.7, 0.7), resolution).map_err(js)?;
    to_json(&grid)
}

/// Tracking-error traces for exponential and quadratic cooling of the same
/// scalar model.
#[wasm_bindgen]
pub fn tracking(
    gamma: f64,
    sensitivity: f64,
    radius: f64,
    alpha: f64,
    quadratic: f64,
    steps: usize,
) -> Result<String, JsError> {
    let base = TrackingParams {
        gamma,
        sensitivity_const: sensitivity,
        kappa: 1.0,
        basin_radius: radius,
        basin: BasinModel::Linear,
        epsilon_start: 1.0,
        schedule: None,
        initial_error: 0.0,
        epsilon_floor: 0.0,
    };
    let mut out = serde_json::Map::new();
    for (name, schedule) in [
        ("exponential", Schedule::Exponential { alpha }),
        ("quadratic", Schedule::Quadratic { c: quadratic }),
    ] {
        let p = TrackingParams {
            schedule: Some(schedule),
            ..base
        };
        let trace = simulate_tracking(&p, steps).map_err(js)?;
        let crit = critical_epsilon(&p).map_err(js)?;
        out.insert(
            name.into(),
            json!({ "records": trace.records, "critical": crit }),
        );
    }
    to_json(&out)
}
