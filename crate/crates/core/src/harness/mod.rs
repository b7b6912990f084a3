//! Synthetic planted-permutation tasks, multi-method comparisons and
//! diagnostics sweeps.

pub mod compare;
pub mod experiment;
pub mod sweep;
pub mod task;

pub use compare::{
    aggregate, run_compare_config, run_comparison, run_method, CompareConfig, MethodOutcome,
    RunSummary, SeedOutcome, TaskSpec,
};
pub use sweep::{diagnostics_sweep, SweepOutput};
pub use task::{generate_task, random_cost, NoiseSchedule, SyntheticTask, TaskDocument};
