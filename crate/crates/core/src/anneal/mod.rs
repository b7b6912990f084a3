//! Cooling schedules and the drift-triggered pause controller.
//!
//! Each step solves the current cost at the current temperature, measures the
//! Frobenius drift of the plan since the previous step, and cools only when
//! the drift is at most `k_safe * eps`. Otherwise the temperature is held
//! exactly.

pub mod calibrate;
pub mod controller;
pub mod process;
pub mod run;
pub mod schedule;

pub use calibrate::{calibrate_k_safe, detect_collapse, CalibrationResult, CalibrationSettings};
pub use controller::{controller_decide, measure_drift, perturb_cost, ControllerConfig, Decision};
pub use process::{CostProcess, ScriptedCost, StaticCost};
pub use run::{run_annealing, schedule_step, write_jsonl, AnnealRun, AnnealState, RunFailure};
pub use schedule::Schedule;
