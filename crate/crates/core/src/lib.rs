//! Entropic optimal transport with a drift-controlled annealing schedule.
//!
//! The crate is organised around five pieces:
//!
//! * [`transport`]: log-domain Sinkhorn solver, entropy, residuals, and
//!   rounding to hard assignments ([`assignment`]).
//! * [`spectral`]: Jacobian of the balancing map at its fixed point, plan
//!   sensitivities, resolvent and pseudospectral diagnostics.
//! * [`anneal`]: cooling schedules and the pause-on-drift controller.
//! * [`tracking`]: scalar model of tracking error under a cooling schedule.
//! * [`harness`]: synthetic planted-permutation tasks and method comparisons.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod assignment;
pub mod cost;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod spectral;
pub mod tracking;
pub mod transport;

pub use assignment::{round_plan, round_to_assignment, Assignment};
pub use cost::CostMatrix;
pub use error::{Error, Result};
pub use transport::{
    log_kernel, marginal_residual, plan_entropy, sinkhorn_iterate, sinkhorn_solve, SolveConfig,
    TransportSolution,
};
