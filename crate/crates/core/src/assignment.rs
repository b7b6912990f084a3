//! Rounding a soft plan to a hard assignment.
//!
//! For `n <= EXACT_LIMIT` the plan is treated as a profit matrix and the
//! maximum-weight perfect matching is found exactly (Hungarian algorithm). Among
//! optimal matchings the lexicographically smallest one is returned, which
//! reduces to "lowest column wins" on ties. Larger plans use greedy row argmax.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::transport::TransportSolution;

pub const EXACT_LIMIT: usize = 10;

/// Relative tolerance when deciding whether two matching weights tie.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    /// `permutation[i]` is the column assigned to row `i`.
    pub permutation: Vec<usize>,
    /// True when the exact matching path ran.
    pub exact_match: bool,
}

impl Assignment {
    pub fn matches(&self, reference: &[usize]) -> bool {
        self.permutation == reference
    }

    /// Fraction of rows that agree with `reference`.
    pub fn accuracy(&self, reference: &[usize]) -> f64 {
        let hits = self
            .permutation
            .iter()
            .zip(reference)
            .filter(|(a, b)| a == b)
            .count();
        hits as f64 / reference.len().max(1) as f64
    }
}

pub fn round_to_assignment(solution: &TransportSolution) -> Assignment {
    round_plan(&solution.plan)
}

pub fn round_plan(plan: &DMatrix<f64>) -> Assignment {
    let n = plan.nrows();
    if n <= EXACT_LIMIT {
        Assignment {
            permutation: lexicographic_max_matching(plan),
            exact_match: true,
        }
    } else {
        Assignment {
            permutation: greedy_argmax(plan),
            exact_match: false,
        }
    }
}

/// Row argmax with lowest-column tie-breaking. The result need not be a
/// permutation.
fn greedy_argmax(plan: &DMatrix<f64>) -> Vec<usize> {
    (0..plan.nrows())
        .map(|i| {
            let mut best = 0;
            for j in 1..plan.ncols() {
                if plan[(i, j)] > plan[(i, best)] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Minimum-cost assignment on a square cost matrix, with forbidden cells
/// marked by `None`. Returns `None` if no perfect matching avoids them.
///
/// Shortest augmenting path formulation of the Hungarian method, O(n^3).
fn hungarian_min(cost: &[Vec<Option<f64>>]) -> Option<(f64, Vec<usize>)> {
    let n = cost.len();
    let big = cost
        .iter()
        .flatten()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        * (n as f64 + 1.0)
        * 4.0
        + 1.0;
    let at = |i: usize, j: usize| cost[i][j].unwrap_or(big);

    // 1-based potentials over rows (u) and columns (v); p[j] is the row matched
    // to column j, row 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[p[j] - 1] = j - 1;
    }
    let mut total = 0.0;
    for (i, &j) in perm.iter().enumerate() {
        total += cost[i][j]?;
    }
    Some((total, perm))
}

/// Maximum-weight matching; ties resolved towards the lexicographically
/// smallest permutation by fixing rows one at a time.
fn lexicographic_max_matching(plan: &DMatrix<f64>) -> Vec<usize> {
    let n = plan.nrows();
    let mut allowed: Vec<Vec<Option<f64>>> = (0..n)
        .map(|i| (0..n).map(|j| Some(-plan[(i, j)])).collect())
        .collect();
    let (best, mut perm) = hungarian_min(&allowed).expect("complete matrix has a matching");
    let scale = plan
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let tol = TIE_TOL * scale * n as f64;

    for row in 0..n {
        for col in 0..n {
            if col == perm[row] {
                break;
            }
            if allowed[row][col].is_none() {
                continue;
            }
            let mut trial = allowed.clone();
            for (j, x) in trial[row].iter_mut().enumerate() {
                if j != col {
                    *x = None;
                }
            }
            if let Some((value, p)) = hungarian_min(&trial) {
                if value <= best + tol {
                    perm = p;
                    break;
                }
            }
        }
        let chosen = perm[row];
        for (j, x) in allowed[row].iter_mut().enumerate() {
            if j != chosen {
                *x = None;
            }
        }
    }
    perm
}
