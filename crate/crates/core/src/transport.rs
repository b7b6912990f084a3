//! Log-domain Sinkhorn balancing.
//!
//! Potentials are kept in cost units (`f = eps * log u`, `g = eps * log v`) so a
//! solution at one temperature can warm-start a solve at another. The kernel
//! `exp(-C/eps)` is never formed; every reduction goes through a max-shifted
//! log-sum-exp.

use nalgebra::{DMatrix, DVector};

use crate::cost::CostMatrix;
use crate::error::{Error, Result};

/// Stopping rule and admissible temperature range for [`sinkhorn_solve`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Target for the l1 marginal residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest temperature the solver accepts.
    pub epsilon_floor: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 10_000,
            epsilon_floor: 1e-4,
        }
    }
}

impl SolveConfig {
    /// Tight settings used by the finite-difference diagnostics.
    pub fn precise() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 20_000,
            epsilon_floor: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if !(self.epsilon_floor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon_floor must be > 0, got {}",
                self.epsilon_floor
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be > 0".into()));
        }
        Ok(())
    }

    pub(crate) fn check_epsilon(&self, epsilon: f64) -> Result<()> {
        if !epsilon.is_finite() || epsilon < self.epsilon_floor {
            return Err(Error::InvalidInput(format!(
                "epsilon {epsilon} is below the floor {} or not finite",
                self.epsilon_floor
            )));
        }
        Ok(())
    }
}

/// A balanced plan with its gauge-fixed dual potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub plan: DMatrix<f64>,
    /// Row potentials `f`, gauge fixed so that they sum to zero.
    pub log_potentials_f: DVector<f64>,
    pub log_potentials_g: DVector<f64>,
    pub epsilon: f64,
    pub iterations: usize,
    pub marginal_residual: f64,
}

impl TransportSolution {
    pub fn n(&self) -> usize {
        self.plan.nrows()
    }
}

/// Entrywise `-C_ij / eps`.
pub fn log_kernel(cost: &CostMatrix, epsilon: f64, epsilon_floor: f64) -> Result<DMatrix<f64>> {
    if !epsilon.is_finite() || epsilon < epsilon_floor {
        return Err(Error::InvalidInput(format!(
            "epsilon {epsilon} is below the floor {epsilon_floor} or not finite"
        )));
    }
    let c = cost.entries();
    let n = cost.n();
    for i in 0..n {
        for j in 0..n {
            if !c[(i, j)].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "cost entry ({i}, {j}) is not finite"
                )));
            }
        }
    }
    Ok(c.map(|v| -v / epsilon))
}

pub(crate) fn logsumexp<I: Iterator<Item = f64> + Clone>(values: I) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Scaled potentials `a = f/eps`, `b = g/eps` over a precomputed log-kernel.
struct Balancer<'a> {
    lk: &'a DMatrix<f64>,
    log_r: DVector<f64>,
    log_c: DVector<f64>,
}

impl<'a> Balancer<'a> {
    fn new(lk: &'a DMatrix<f64>, cost: &CostMatrix) -> Self {
        Self {
            lk,
            log_r: cost.row_marginal().map(f64::ln),
            log_c: cost.col_marginal().map(f64::ln),
        }
    }

    fn update_rows(&self, a: &mut DVector<f64>, b: &DVector<f64>) {
        let n = a.len();
        for i in 0..n {
            let lse = logsumexp((0..n).map(|j| self.lk[(i, j)] + b[j]));
            a[i] = self.log_r[i] - lse;
        }
    }

    fn update_cols(&self, a: &DVector<f64>, b: &mut DVector<f64>) {
        let n = b.len();
        for j in 0..n {
            let lse = logsumexp((0..n).map(|i| self.lk[(i, j)] + a[i]));
            b[j] = self.log_c[j] - lse;
        }
    }

    fn plan(&self, a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
        let n = a.len();
        DMatrix::from_fn(n, n, |i, j| (a[i] + b[j] + self.lk[(i, j)]).exp())
    }
}

/// One full balancing round (rows, then columns) in cost units.
///
/// This is the map whose fixed point is the entropic plan; the diagnostics
/// differentiate it.
pub fn balance_round(
    cost: &CostMatrix,
    epsilon: f64,
    f: &DVector<f64>,
    g: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let lk = cost.entries().map(|v| -v / epsilon);
    let bal = Balancer::new(&lk, cost);
    let mut a = f / epsilon;
    let mut b = g / epsilon;
    bal.update_rows(&mut a, &b);
    bal.update_cols(&a, &mut b);
    (a * epsilon, b * epsilon)
}

/// Plan `exp((f_i + g_j - C_ij) / eps)` for given potentials.
pub fn plan_from_potentials(
    cost: &CostMatrix,
    epsilon: f64,
    f: &DVector<f64>,
    g: &DVector<f64>,
) -> DMatrix<f64> {
    let n = cost.n();
    let c = cost.entries();
    DMatrix::from_fn(n, n, |i, j| ((f[i] + g[j] - c[(i, j)]) / epsilon).exp())
}

/// Solves the entropic problem at temperature `epsilon`.
///
/// On running out of iterations the last iterate comes back inside
/// [`Error::NotConverged`].
pub fn sinkhorn_solve(
    cost: &CostMatrix,
    epsilon: f64,
    cfg: &SolveConfig,
    warm_start: Option<&TransportSolution>,
) -> Result<TransportSolution> {
    cfg.validate()?;
    let lk = log_kernel(cost, epsilon, cfg.epsilon_floor)?;
    let n = cost.n();
    let bal = Balancer::new(&lk, cost);

    let (mut a, mut b) = match warm_start {
        Some(w) => {
            if w.n() != n {
                return Err(Error::InvalidInput(format!(
                    "warm start has n = {}, instance has n = {n}",
                    w.n()
                )));
            }
            (&w.log_potentials_f / epsilon, &w.log_potentials_g / epsilon)
        }
        None => (DVector::zeros(n), DVector::zeros(n)),
    };

    let mut iterations = 0;
    let mut residual = if warm_start.is_some() {
        marginal_residual(&bal.plan(&a, &b), cost)
    } else {
        f64::INFINITY
    };

    while residual > cfg.tolerance && iterations < cfg.max_iterations {
        bal.update_rows(&mut a, &b);
        bal.update_cols(&a, &mut b);
        iterations += 1;
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite potential after {iterations} iterations at eps = {epsilon}"
            )));
        }
        residual = marginal_residual(&bal.plan(&a, &b), cost);
    }

    let shift = a.mean();
    a.add_scalar_mut(-shift);
    b.add_scalar_mut(shift);
    let plan = bal.plan(&a, &b);
    let marginal_residual = marginal_residual(&plan, cost);
    if plan.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite plan at eps = {epsilon}"
        )));
    }

    let solution = TransportSolution {
        plan,
        log_potentials_f: a * epsilon,
        log_potentials_g: b * epsilon,
        epsilon,
        iterations,
        marginal_residual,
    };
    if marginal_residual > cfg.tolerance {
        return Err(Error::NotConverged {
            residual: marginal_residual,
            solution: Box::new(solution),
        });
    }
    Ok(solution)
}

/// Like [`sinkhorn_solve`] but hands back the last iterate when the iteration
/// budget runs out, together with a convergence flag.
pub fn sinkhorn_iterate(
    cost: &CostMatrix,
    epsilon: f64,
    cfg: &SolveConfig,
    warm_start: Option<&TransportSolution>,
) -> Result<(TransportSolution, bool)> {
    match sinkhorn_solve(cost, epsilon, cfg, warm_start) {
        Ok(s) => Ok((s, true)),
        Err(Error::NotConverged { solution, .. }) => Ok((*solution, false)),
        Err(e) => Err(e),
    }
}

/// Shannon entropy `-sum P log P` of the plan, with `0 log 0 = 0`.
pub fn plan_entropy(solution: &TransportSolution) -> f64 {
    entropy(&solution.plan)
}

pub fn entropy(plan: &DMatrix<f64>) -> f64 {
    -plan
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// `||P 1 - r||_1 + ||P^T 1 - c||_1`.
pub fn marginal_residual(plan: &DMatrix<f64>, cost: &CostMatrix) -> f64 {
    let rows = plan.column_sum();
    let cols = plan.row_sum();
    let r = cost.row_marginal();
    let c = cost.col_marginal();
    let dr: f64 = rows.iter().zip(r.iter()).map(|(a, b)| (a - b).abs()).sum();
    let dc: f64 = cols.iter().zip(c.iter()).map(|(a, b)| (a - b).abs()).sum();
    dr + dc
}
