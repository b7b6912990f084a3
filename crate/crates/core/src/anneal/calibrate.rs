//! Offline estimate of the safety slope from deliberately aggressive runs.

use serde::{Deserialize, Serialize};

use crate::anneal::controller::ControllerConfig;
use crate::anneal::process::CostProcess;
use crate::anneal::run::{run_annealing, AnnealState};
use crate::anneal::schedule::Schedule;
use crate::error::{Error, Result};
use crate::transport::SolveConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSettings {
    pub epsilon_start: f64,
    pub epsilon_target: f64,
    pub max_steps: usize,
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
    /// A departure counts as a collapse only if the assignment stays wrong
    /// for this many further steps (or until the run ends).
    #[serde(default = "default_lookahead")]
    pub lookahead: usize,
    #[serde(default)]
    pub hold_steps: usize,
}

fn default_safety() -> f64 {
    0.8
}

fn default_lookahead() -> usize {
    5
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            epsilon_start: 1.0,
            epsilon_target: 0.01,
            max_steps: 500,
            safety_factor: default_safety(),
            lookahead: default_lookahead(),
            hold_steps: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationTrial {
    pub proxy: usize,
    pub collapsed: bool,
    pub step: Option<usize>,
    pub epsilon: Option<f64>,
    pub drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub k_safe_estimate: f64,
    pub collapse_epsilon: f64,
    pub collapse_drift: f64,
    pub safety_factor: f64,
    pub trials: Vec<CalibrationTrial>,
}

/// First step `t >= 1` at which a correct rounded assignment turns wrong and
/// stays wrong for the next `lookahead` steps, with the window truncated at the
/// end of the run.
pub fn detect_collapse(history: &[AnnealState], lookahead: usize) -> Option<usize> {
    let wrong = |s: &AnnealState| s.assignment_correct == Some(false);
    (1..history.len()).find(|&t| {
        let end = (t + lookahead).min(history.len() - 1);
        history[t - 1].assignment_correct == Some(true) && history[t..=end].iter().all(wrong)
    })
}

/// Runs an uncontrolled exponential schedule with rate `aggressive_alpha` on
/// every proxy and sets `k_safe = safety_factor * min(drift / eps)` over the
/// observed collapses.
pub fn calibrate_k_safe(
    proxies: &[&dyn CostProcess],
    aggressive_alpha: f64,
    solve_cfg: &SolveConfig,
    settings: &CalibrationSettings,
) -> Result<CalibrationResult> {
    if proxies.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 proxy instances, got {}",
            proxies.len()
        )));
    }
    if !(settings.safety_factor > 0.0) {
        return Err(Error::InvalidInput("safety_factor must be > 0".into()));
    }
    let cfg = ControllerConfig {
        name: "calibration".into(),
        k_safe: None,
        schedule: Schedule::Exponential {
            alpha: aggressive_alpha,
        },
        epsilon_start: settings.epsilon_start,
        epsilon_target: settings.epsilon_target,
        max_steps: settings.max_steps,
        max_consecutive_pauses: 1,
        hold_steps: settings.hold_steps,
    };
    let mut trials = Vec::with_capacity(proxies.len());
    let mut best: Option<(f64, f64, f64)> = None;
    for (idx, proxy) in proxies.iter().enumerate() {
        if proxy.reference().is_none() {
            return Err(Error::InvalidInput(format!(
                "proxy {idx} has no reference assignment"
            )));
        }
        let run = run_annealing(*proxy, &cfg, solve_cfg).map_err(|f| f.error)?;
        match detect_collapse(&run.history, settings.lookahead) {
            Some(t) => {
                let s = &run.history[t];
                let ratio = s.drift / s.epsilon;
                if best.is_none_or(|(r, _, _)| ratio < r) {
                    best = Some((ratio, s.epsilon, s.drift));
                }
                trials.push(CalibrationTrial {
                    proxy: idx,
                    collapsed: true,
                    step: Some(t),
                    epsilon: Some(s.epsilon),
                    drift: Some(s.drift),
                });
            }
            None => trials.push(CalibrationTrial {
                proxy: idx,
                collapsed: false,
                step: None,
                epsilon: None,
                drift: None,
            }),
        }
    }
    let (ratio, collapse_epsilon, collapse_drift) = best.ok_or_else(|| {
        Error::CalibrationInconclusive(format!(
            "no collapse on any of {} proxies with alpha = {aggressive_alpha}",
            proxies.len()
        ))
    })?;
    let k_safe_estimate = settings.safety_factor * ratio;
    if !(k_safe_estimate > 0.0) {
        return Err(Error::CalibrationInconclusive(
            "collapse observed with zero drift".into(),
        ));
    }
    Ok(CalibrationResult {
        k_safe_estimate,
        collapse_epsilon,
        collapse_drift,
        safety_factor: settings.safety_factor,
        trials,
    })
}
