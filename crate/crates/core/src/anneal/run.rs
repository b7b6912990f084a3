use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::anneal::controller::{
    controller_decide, measure_drift, perturb_cost, ControllerConfig, Decision,
};
use crate::anneal::process::CostProcess;
use crate::assignment::round_to_assignment;
use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::transport::{plan_entropy, sinkhorn_iterate, SolveConfig, TransportSolution};

/// One step of an annealing run, as logged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealState {
    pub step: usize,
    /// Temperature the plan of this step was solved at.
    pub epsilon: f64,
    /// Frobenius distance to the previous step's plan (0 on the first step).
    pub drift: f64,
    pub decision: Decision,
    pub entropy: f64,
    /// Whether the rounded plan equals the process reference, when there is one.
    pub assignment_correct: Option<bool>,
    /// Consecutive pauses up to and including this step.
    pub pause_count: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Result of a run that ended normally.
#[derive(Debug, Clone)]
pub struct AnnealRun {
    pub history: Vec<AnnealState>,
    pub final_solution: TransportSolution,
    pub reached_target: bool,
    /// Seconds spent measuring drift and deciding.
    pub controller_seconds: f64,
}

/// A run that ended with an error; the history up to the failure is kept.
#[derive(Debug)]
pub struct RunFailure {
    pub error: Error,
    pub history: Vec<AnnealState>,
    pub controller_seconds: f64,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (after {} logged steps)",
            self.error,
            self.history.len()
        )
    }
}

impl std::error::Error for RunFailure {}

/// Seed of the cost perturbation at `step` for a run seeded with `seed`.
pub fn step_seed(seed: u64, step: usize) -> u64 {
    (seed << 32) ^ step as u64
}

/// Next temperature proposed by the schedule, clamped to the target.
pub fn schedule_step(state: &AnnealState, cfg: &ControllerConfig, epsilon_floor: f64) -> f64 {
    cfg.schedule
        .next_epsilon(state.epsilon, epsilon_floor)
        .max(cfg.epsilon_target)
}

fn cost_for_step(
    process: &dyn CostProcess,
    cfg: &ControllerConfig,
    step: usize,
) -> Result<CostMatrix> {
    let cost = process.cost_at(step)?;
    match cfg.schedule.cost_noise() {
        Some((scale, seed)) => perturb_cost(&cost, scale, step_seed(seed, step)),
        None => Ok(cost),
    }
}

/// Runs the schedule on `process`, pausing whenever the drift between
/// consecutive plans exceeds `k_safe * epsilon`.
///
/// Every step performs one warm-started solve bounded by
/// `solve_cfg.max_iterations`; an unconverged last iterate is accepted and
/// flagged. The run ends once `hold_steps + 1` steps have been solved at the
/// target, or after `max_steps` steps.
pub fn run_annealing(
    process: &dyn CostProcess,
    cfg: &ControllerConfig,
    solve_cfg: &SolveConfig,
) -> std::result::Result<AnnealRun, RunFailure> {
    let mut history: Vec<AnnealState> = Vec::new();
    let mut controller_seconds = 0.0;
    macro_rules! bail {
        ($e:expr) => {
            return Err(RunFailure {
                error: $e,
                history,
                controller_seconds,
            })
        };
    }
    if let Err(e) = solve_cfg
        .validate()
        .and_then(|_| cfg.validate(solve_cfg.epsilon_floor))
    {
        bail!(e);
    }

    let reference = process.reference().map(|r| r.to_vec());
    let mut epsilon = cfg.epsilon_start;
    let mut previous: Option<TransportSolution> = None;
    let mut consecutive = 0usize;
    let mut at_target = 0usize;

    for step in 0..cfg.max_steps {
        let cost = match cost_for_step(process, cfg, step) {
            Ok(c) => c,
            Err(e) => bail!(e),
        };
        let (sol, converged) = match sinkhorn_iterate(&cost, epsilon, solve_cfg, previous.as_ref())
        {
            Ok(r) => r,
            Err(e) => bail!(e),
        };
        let started = Instant::now();
        let drift = match &previous {
            Some(p) => match measure_drift(&p.plan, &sol.plan) {
                Ok(d) => d,
                Err(e) => bail!(e),
            },
            None => 0.0,
        };
        let decision = match cfg.k_safe {
            Some(k) => controller_decide(drift, epsilon, k),
            None => Decision::Cool,
        };
        controller_seconds += started.elapsed().as_secs_f64();
        consecutive = match decision {
            Decision::Pause => consecutive + 1,
            Decision::Cool => 0,
        };
        let state = AnnealState {
            step,
            epsilon,
            drift,
            decision,
            entropy: plan_entropy(&sol),
            assignment_correct: reference
                .as_ref()
                .map(|r| round_to_assignment(&sol).matches(r)),
            pause_count: consecutive,
            iterations: sol.iterations,
            converged,
        };
        let next = schedule_step(&state, cfg, solve_cfg.epsilon_floor);
        history.push(state);
        previous = Some(sol);

        if epsilon <= cfg.epsilon_target {
            at_target += 1;
            if at_target > cfg.hold_steps {
                return Ok(AnnealRun {
                    history,
                    final_solution: previous.expect("solved at least once"),
                    reached_target: true,
                    controller_seconds,
                });
            }
            continue;
        }
        match decision {
            Decision::Cool => epsilon = next,
            Decision::Pause => {
                if consecutive > cfg.max_consecutive_pauses {
                    bail!(Error::ControllerStalled {
                        step,
                        epsilon,
                        pauses: consecutive,
                    });
                }
            }
        }
    }
    Ok(AnnealRun {
        history,
        final_solution: previous.expect("max_steps > 0"),
        reached_target: false,
        controller_seconds,
    })
}

/// Writes one JSON object per state.
pub fn write_jsonl<W: Write>(history: &[AnnealState], mut out: W) -> Result<()> {
    for s in history {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::process::StaticCost;
    use crate::anneal::schedule::Schedule;

    fn cfg(k: Option<f64>) -> ControllerConfig {
        ControllerConfig {
            name: "t".into(),
            k_safe: k,
            schedule: Schedule::Exponential { alpha: 0.5 },
            epsilon_start: 1.0,
            epsilon_target: 0.1,
            max_steps: 100,
            max_consecutive_pauses: 5,
            hold_steps: 0,
        }
    }

    #[test]
    fn zero_drift_never_pauses() {
        let c = CostMatrix::uniform(nalgebra::DMatrix::zeros(3, 3)).unwrap();
        let p = StaticCost::new(c);
        let run = run_annealing(&p, &cfg(Some(0.5)), &SolveConfig::default()).unwrap();
        assert!(run.history.iter().all(|s| s.decision == Decision::Cool));
        let eps: Vec<f64> = run.history.iter().map(|s| s.epsilon).collect();
        assert_eq!(eps, vec![1.0, 0.5, 0.25, 0.125, 0.1]);
        assert!(run.reached_target);
    }

    #[test]
    fn invalid_config_is_reported() {
        let c = CostMatrix::uniform(nalgebra::DMatrix::zeros(2, 2)).unwrap();
        let mut bad = cfg(None);
        bad.epsilon_target = 2.0;
        let err = run_annealing(&StaticCost::new(c), &bad, &SolveConfig::default()).unwrap_err();
        assert!(matches!(err.error, Error::InvalidInput(_)));
    }

    #[test]
    fn jsonl_keys() {
        let s = AnnealState {
            step: 0,
            epsilon: 1.0,
            drift: 0.0,
            decision: Decision::Pause,
            entropy: 1.0,
            assignment_correct: Some(true),
            pause_count: 1,
            iterations: 3,
            converged: true,
        };
        let mut buf = Vec::new();
        write_jsonl(&[s], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        for k in [
            "step",
            "epsilon",
            "drift",
            "decision",
            "entropy",
            "assignment_correct",
        ] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["decision"], "pause");
    }
}
