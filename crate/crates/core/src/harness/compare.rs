use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::anneal::controller::{ControllerConfig, Decision};
use crate::anneal::run::{run_annealing, AnnealState};
use crate::assignment::round_to_assignment;
use crate::error::{Error, Result};
use crate::harness::task::{generate_task, SyntheticTask};
use crate::transport::SolveConfig;

/// Consecutive correct steps at the target temperature that count as
/// recovery.
pub const SUSTAIN_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub method: String,
    /// Step at which the planted assignment had been recovered at the target
    /// temperature for [`SUSTAIN_STEPS`] consecutive steps; `None` if never.
    pub steps_to_target: Option<usize>,
    pub final_accuracy: f64,
    pub pause_steps: usize,
    /// Final rounded plan differs from the planted permutation.
    pub collapse_detected: bool,
    /// Error message if the run ended early.
    pub failure: Option<String>,
    /// Excluded from serialised output so that logs stay byte-stable.
    #[serde(skip)]
    pub wall_time: f64,
    /// Part of `wall_time` spent in the controller; not serialised either.
    #[serde(skip)]
    pub controller_time: f64,
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub summary: RunSummary,
    pub history: Vec<AnnealState>,
}

pub fn steps_to_target(history: &[AnnealState], epsilon_target: f64) -> Option<usize> {
    let mut streak = 0;
    for s in history {
        if s.epsilon <= epsilon_target && s.assignment_correct == Some(true) {
            streak += 1;
            if streak >= SUSTAIN_STEPS {
                return Some(s.step);
            }
        } else {
            streak = 0;
        }
    }
    None
}

/// Runs one method on `task`. The error, if any, is returned alongside the
/// outcome, whose summary records it as text.
pub fn run_method(
    task: &SyntheticTask,
    method: &ControllerConfig,
    solve_cfg: &SolveConfig,
) -> (MethodOutcome, Option<Error>) {
    let start = Instant::now();
    let result = run_annealing(task, method, solve_cfg);
    let wall_time = start.elapsed().as_secs_f64();
    let (history, final_plan, error, controller_time) = match result {
        Ok(run) => (
            run.history,
            Some(run.final_solution),
            None,
            run.controller_seconds,
        ),
        Err(f) => (f.history, None, Some(f.error), f.controller_seconds),
    };
    let final_accuracy = final_plan
        .as_ref()
        .map(|s| round_to_assignment(s).accuracy(&task.planted))
        .unwrap_or(0.0);
    let summary = RunSummary {
        method: method.name.clone(),
        steps_to_target: steps_to_target(&history, method.epsilon_target),
        final_accuracy,
        pause_steps: history
            .iter()
            .filter(|s| s.decision == Decision::Pause)
            .count(),
        collapse_detected: final_accuracy < 1.0,
        failure: error.as_ref().map(|e| e.to_string()),
        wall_time,
        controller_time,
    };
    (MethodOutcome { summary, history }, error)
}

/// Runs every method on the same task. A failing method is recorded in its
/// summary and does not stop the others.
pub fn run_comparison(
    task: &SyntheticTask,
    methods: &[ControllerConfig],
    solve_cfg: &SolveConfig,
) -> Vec<MethodOutcome> {
    methods
        .iter()
        .map(|m| run_method(task, m, solve_cfg).0)
        .collect()
}

/// Task family shared by all seeds of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub n: usize,
    pub margin: f64,
    pub noise_a: f64,
    pub noise_b: f64,
}

/// Configuration of a multi-seed comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub task: TaskSpec,
    pub seeds: Vec<u64>,
    pub methods: Vec<ControllerConfig>,
    #[serde(default)]
    pub solve: SolveConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    #[serde(flatten)]
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub outcomes: Vec<MethodOutcome>,
}

pub fn run_compare_config(cfg: &CompareConfig) -> Result<Vec<SeedOutcome>> {
    cfg.seeds
        .iter()
        .map(|&seed| {
            let t = &cfg.task;
            let task = generate_task(t.n, t.margin, (t.noise_a, t.noise_b), seed)?;
            Ok(SeedOutcome {
                seed,
                outcomes: run_comparison(&task, &cfg.methods, &cfg.solve),
            })
        })
        .collect()
}

fn opt_to_string<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// One row per (seed, method).
pub fn write_summary_csv<W: Write>(outcomes: &[SeedOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed",
        "method",
        "steps_to_target",
        "final_accuracy",
        "pause_steps",
        "collapse_detected",
        "failure",
    ])?;
    for so in outcomes {
        for o in &so.outcomes {
            let s = &o.summary;
            w.write_record([
                so.seed.to_string(),
                s.method.clone(),
                opt_to_string(&s.steps_to_target),
                s.final_accuracy.to_string(),
                s.pause_steps.to_string(),
                s.collapse_detected.to_string(),
                s.failure.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-method aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodAggregate {
    pub method: String,
    pub runs: usize,
    pub collapses: usize,
    pub collapse_rate: f64,
    /// Median over runs that reached the target; `None` if none did.
    pub median_steps_to_target: Option<f64>,
    pub mean_pause_steps: f64,
}

pub fn aggregate(outcomes: &[SeedOutcome]) -> Vec<MethodAggregate> {
    let mut names: Vec<String> = Vec::new();
    for so in outcomes {
        for o in &so.outcomes {
            if !names.contains(&o.summary.method) {
                names.push(o.summary.method.clone());
            }
        }
    }
    names
        .into_iter()
        .map(|name| {
            let runs: Vec<&RunSummary> = outcomes
                .iter()
                .flat_map(|so| so.outcomes.iter())
                .map(|o| &o.summary)
                .filter(|s| s.method == name)
                .collect();
            let collapses = runs.iter().filter(|s| s.collapse_detected).count();
            let mut steps: Vec<f64> = runs
                .iter()
                .filter_map(|s| s.steps_to_target.map(|v| v as f64))
                .collect();
            steps.sort_by(|a, b| a.total_cmp(b));
            let median = match steps.len() {
                0 => None,
                k if k % 2 == 1 => Some(steps[k / 2]),
                k => Some(0.5 * (steps[k / 2 - 1] + steps[k / 2])),
            };
            MethodAggregate {
                collapse_rate: collapses as f64 / runs.len().max(1) as f64,
                runs: runs.len(),
                collapses,
                median_steps_to_target: median,
                mean_pause_steps: runs.iter().map(|s| s.pause_steps as f64).sum::<f64>()
                    / runs.len().max(1) as f64,
                method: name,
            }
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(rows: &[MethodAggregate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "runs",
        "collapses",
        "collapse_rate",
        "median_steps_to_target",
        "mean_pause_steps",
    ])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.runs.to_string(),
            r.collapses.to_string(),
            r.collapse_rate.to_string(),
            opt_to_string(&r.median_steps_to_target),
            r.mean_pause_steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
