//! Scalar model of the tracking error under a cooling schedule.
//!
//! The error obeys `e_{t+1} = rho_t (e_t + d_t)` with contraction
//! `rho_t = 1 - gamma * eps_{t+1}` and injected drift
//! `d_t = (s / eps_t) * delta_t * kappa`, where `delta_t = eps_t - eps_{t+1}`.
//! The trajectory escapes once the error exceeds the basin radius at the
//! current temperature.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::anneal::controller::{controller_decide, Decision};
use crate::anneal::schedule::Schedule;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasinModel {
    /// Radius `R * eps`.
    #[default]
    Linear,
    /// Radius `R` at every temperature.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingParams {
    /// Gap constant: `1 - rho = gamma * eps`.
    pub gamma: f64,
    /// Sensitivity constant: `||dP/d eps|| = s / eps`.
    pub sensitivity_const: f64,
    /// Non-normal amplification, at least 1.
    pub kappa: f64,
    pub basin_radius: f64,
    #[serde(default)]
    pub basin: BasinModel,
    pub epsilon_start: f64,
    /// `None` holds the temperature fixed.
    pub schedule: Option<Schedule>,
    #[serde(default)]
    pub initial_error: f64,
    /// Lower clamp of the schedule; 0 disables it.
    #[serde(default)]
    pub epsilon_floor: f64,
}

impl TrackingParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("sensitivity_const", self.sensitivity_const),
            ("basin_radius", self.basin_radius),
            ("epsilon_start", self.epsilon_start),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "kappa must be >= 1, got {}",
                self.kappa
            )));
        }
        if !(self.gamma * self.epsilon_start <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "gamma * epsilon_start = {} exceeds 1",
                self.gamma * self.epsilon_start
            )));
        }
        if !(self.initial_error >= 0.0) || !(self.epsilon_floor >= 0.0) {
            return Err(Error::InvalidInput(
                "initial_error and epsilon_floor must be >= 0".into(),
            ));
        }
        if let Some(s) = &self.schedule {
            s.validate()?;
        }
        Ok(())
    }

    pub fn basin_at(&self, epsilon: f64) -> f64 {
        match self.basin {
            BasinModel::Linear => self.basin_radius * epsilon,
            BasinModel::Constant => self.basin_radius,
        }
    }

    fn next_epsilon(&self, epsilon: f64) -> f64 {
        match &self.schedule {
            Some(s) => s.next_epsilon(epsilon, self.epsilon_floor),
            None => epsilon,
        }
    }

    fn injected(&self, epsilon: f64, delta: f64) -> f64 {
        self.sensitivity_const / epsilon * delta * self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackingRecord {
    pub step: usize,
    pub epsilon: f64,
    /// Temperature decrease applied after this step.
    pub delta: f64,
    /// Drift injected by that decrease.
    pub drift: f64,
    /// Tracking error at this step.
    pub error: f64,
    /// Steady-state error if `delta` were repeated at this temperature.
    pub bound: f64,
    pub escaped: bool,
    pub paused: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackingTrace {
    pub records: Vec<TrackingRecord>,
}

impl TrackingTrace {
    pub fn escaped(&self) -> bool {
        self.records.last().is_some_and(|r| r.escaped)
    }

    /// First record at which the error left the basin.
    pub fn escape(&self) -> Option<&TrackingRecord> {
        self.records.iter().find(|r| r.escaped)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "step", "epsilon", "delta", "drift", "error", "bound", "escaped",
        ])?;
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                r.epsilon.to_string(),
                r.delta.to_string(),
                r.drift.to_string(),
                r.error.to_string(),
                r.bound.to_string(),
                r.escaped.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(1 / (gamma eps)) (s / eps) delta kappa`.
pub fn steady_state_bound(params: &TrackingParams, epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !(params.gamma * epsilon < 1.0) || !(delta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need eps > 0, gamma * eps < 1 and delta >= 0, got eps = {epsilon}, delta = {delta}"
        )));
    }
    Ok(params.injected(epsilon, delta) / (params.gamma * epsilon))
}

fn simulate(params: &TrackingParams, steps: usize, k_safe: Option<f64>) -> Result<TrackingTrace> {
    params.validate()?;
    let mut records = Vec::with_capacity(steps + 1);
    let mut eps = params.epsilon_start;
    let mut error = params.initial_error;
    let mut escaped = false;
    for step in 0..=steps {
        escaped |= error > params.basin_at(eps);
        let proposed = params.next_epsilon(eps);
        let proposed_drift = params.injected(eps, eps - proposed);
        let paused = match k_safe {
            Some(k) => controller_decide(proposed_drift, eps, k) == Decision::Pause,
            None => false,
        };
        let next = if paused { eps } else { proposed };
        let delta = eps - next;
        let drift = if paused { 0.0 } else { proposed_drift };
        let bound = if params.gamma * eps < 1.0 && eps > 0.0 {
            steady_state_bound(params, eps, delta)?
        } else {
            f64::INFINITY
        };
        records.push(TrackingRecord {
            step,
            epsilon: eps,
            delta,
            drift,
            error,
            bound,
            escaped,
            paused,
        });
        // a schedule without floor can underflow to zero
        if step == steps || next <= 0.0 {
            break;
        }
        let rho = 1.0 - params.gamma * next;
        error = rho * (error + drift);
        eps = next;
    }
    Ok(TrackingTrace { records })
}

/// Runs the recurrence for `steps` steps (`steps + 1` records, fewer if the
/// temperature underflows to zero).
pub fn simulate_tracking(params: &TrackingParams, steps: usize) -> Result<TrackingTrace> {
    simulate(params, steps, None)
}

/// Same recurrence with the pause rule applied before each step: a step is
/// taken only if the drift it would inject is at most `k_safe * eps`;
/// otherwise the temperature is held and nothing is injected.
pub fn simulate_controlled_tracking(
    params: &TrackingParams,
    steps: usize,
    k_safe: f64,
) -> Result<TrackingTrace> {
    if !(k_safe > 0.0) {
        return Err(Error::InvalidInput(format!(
            "k_safe must be > 0, got {k_safe}"
        )));
    }
    simulate(params, steps, Some(k_safe))
}

/// Iterates `e <- rho e + u` from `e0`, returning all `steps + 1` values.
pub fn linear_recurrence(rho: f64, u: f64, e0: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut e = e0;
    out.push(e);
    for _ in 0..steps {
        e = rho * e + u;
        out.push(e);
    }
    out
}

/// Limit `u / (1 - rho)` of [`linear_recurrence`].
pub fn neumann_limit(rho: f64, u: f64) -> f64 {
    u / (1.0 - rho)
}

/// Analytic crossing of the steady-state error with the basin, and the
/// temperature at which a simulation actually escaped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalEpsilon {
    /// `None` when the schedule never crosses the basin.
    pub analytic: Option<f64>,
    pub simulated: Option<f64>,
}

/// Default horizon of the escape simulation in [`critical_epsilon`].
pub const CRITICAL_SIM_STEPS: usize = 10_000;

/// Temperature below which the schedule of `params` can no longer be tracked.
///
/// Exponential cooling injects `(1 - alpha) s kappa` per step, giving a
/// steady error `(1 - alpha) s kappa / (gamma eps)`; it crosses a linear basin
/// at `sqrt((1 - alpha) s kappa / (gamma R))` and a constant one at
/// `(1 - alpha) s kappa / (gamma R)`. Quadratic cooling gives the constant
/// error `c s kappa / gamma`, which never crosses a constant basin larger than
/// it and crosses a linear basin at `c s kappa / (gamma R)`.
pub fn critical_epsilon(params: &TrackingParams) -> Result<CriticalEpsilon> {
    params.validate()?;
    let sk = params.sensitivity_const * params.kappa;
    let g = params.gamma;
    let r = params.basin_radius;
    let analytic = match (params.schedule, params.basin) {
        (None, _) => None,
        (
            Some(Schedule::Exponential { alpha } | Schedule::GumbelExponential { alpha, .. }),
            basin,
        ) => {
            let x = (1.0 - alpha) * sk / (g * r);
            Some(match basin {
                BasinModel::Linear => x.sqrt(),
                BasinModel::Constant => x,
            })
        }
        (Some(Schedule::Quadratic { c }), BasinModel::Linear) => Some(c * sk / (g * r)),
        (Some(Schedule::Quadratic { c }), BasinModel::Constant) => {
            if c * sk / g < r {
                None
            } else {
                Some(params.epsilon_start)
            }
        }
    };
    let trace = simulate_tracking(params, CRITICAL_SIM_STEPS)?;
    Ok(CriticalEpsilon {
        analytic,
        simulated: trace.escape().map(|r| r.epsilon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(schedule: Option<Schedule>) -> TrackingParams {
        TrackingParams {
            gamma: 1.0,
            sensitivity_const: 1.0,
            kappa: 1.0,
            basin_radius: 1.0,
            basin: BasinModel::Linear,
            epsilon_start: 1.0,
            schedule,
            initial_error: 0.0,
            epsilon_floor: 0.0,
        }
    }

    #[test]
    fn bound_examples() {
        let p = unit(None);
        assert_abs_diff_eq!(
            steady_state_bound(&p, 0.1, 0.01).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        for eps in [0.5, 0.1, 0.01] {
            assert_abs_diff_eq!(
                steady_state_bound(&p, eps, eps * eps).unwrap(),
                1.0,
                epsilon = 1e-12
            );
        }
        let b1 = steady_state_bound(&p, 0.2, 0.05 * 0.2).unwrap();
        let b2 = steady_state_bound(&p, 0.1, 0.05 * 0.1).unwrap();
        assert_abs_diff_eq!(b2, 2.0 * b1, epsilon = 1e-12);
    }

    #[test]
    fn frozen_temperature_contracts() {
        let mut p = unit(None);
        p.epsilon_start = 0.2;
        p.initial_error = 1.0;
        let t = simulate_tracking(&p, 20).unwrap();
        for (k, r) in t.records.iter().enumerate() {
            assert_abs_diff_eq!(r.error, 0.8f64.powi(k as i32), epsilon = 1e-12);
        }
    }

    #[test]
    fn neumann_series_limit() {
        let e = linear_recurrence(0.9, 0.01, 0.0, 200);
        assert_abs_diff_eq!(*e.last().unwrap(), 0.1, epsilon = 1e-6);
        assert_abs_diff_eq!(neumann_limit(0.9, 0.01), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn critical_epsilon_unit_parameters() {
        let p = unit(Some(Schedule::Exponential { alpha: 0.95 }));
        let c = critical_epsilon(&p).unwrap();
        assert_abs_diff_eq!(c.analytic.unwrap(), 0.05f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.analytic.unwrap(), 0.2236, epsilon = 1e-4);
    }

    #[test]
    fn validation() {
        let mut p = unit(None);
        p.kappa = 0.5;
        assert!(p.validate().is_err());
        let mut p = unit(None);
        p.epsilon_start = 2.0;
        assert!(p.validate().is_err());
    }
}
