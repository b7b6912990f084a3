use crate::error::{Error, Result};
use crate::transport::TransportSolution;

/// Entries of a plan that carry non-vanishing mass.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ActiveSupport {
    /// `(row, col)` pairs in row-major order.
    pub indices: Vec<(usize, usize)>,
    /// Lower bound on mass inside the support.
    pub eta: f64,
    /// Largest mass outside the support (0 when the support is everything).
    pub tau: f64,
    pub active_rows: Vec<usize>,
    pub active_cols: Vec<usize>,
}

impl ActiveSupport {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.indices.binary_search(&(i, j)).is_ok()
    }
}

/// Default mass threshold `0.5 / n`.
pub fn default_eta(n: usize) -> f64 {
    0.5 / n as f64
}

/// Thresholds the plan at `eta`.
///
/// Fails with [`Error::NoSeparation`] when nothing clears the threshold or when
/// the largest inactive entry is within a factor two of `eta`.
pub fn detect_active_support(solution: &TransportSolution, eta: f64) -> Result<ActiveSupport> {
    if !(eta > 0.0) {
        return Err(Error::InvalidInput(format!("eta must be > 0, got {eta}")));
    }
    let p = &solution.plan;
    let n = p.nrows();
    let mut indices = Vec::new();
    let mut tau = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = p[(i, j)];
            if v >= eta {
                indices.push((i, j));
            } else {
                tau = tau.max(v);
            }
        }
    }
    if indices.is_empty() || eta <= 2.0 * tau {
        return Err(Error::NoSeparation { eta, tau });
    }
    let mut active_rows: Vec<usize> = indices.iter().map(|&(i, _)| i).collect();
    let mut active_cols: Vec<usize> = indices.iter().map(|&(_, j)| j).collect();
    active_rows.dedup();
    active_cols.sort_unstable();
    active_cols.dedup();
    Ok(ActiveSupport {
        indices,
        eta,
        tau,
        active_rows,
        active_cols,
    })
}

/// Every entry treated as active, with `eta` the smallest plan entry.
///
/// Used when thresholding finds no clean separation, which is the normal
/// situation at moderate temperature where every entry carries mass.
pub fn full_support(solution: &TransportSolution) -> ActiveSupport {
    let n = solution.n();
    let indices = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    ActiveSupport {
        indices,
        eta: solution.plan.min(),
        tau: 0.0,
        active_rows: (0..n).collect(),
        active_cols: (0..n).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn sol(plan: DMatrix<f64>) -> TransportSolution {
        let n = plan.nrows();
        TransportSolution {
            plan,
            log_potentials_f: DVector::zeros(n),
            log_potentials_g: DVector::zeros(n),
            epsilon: 1.0,
            iterations: 0,
            marginal_residual: 0.0,
        }
    }

    #[test]
    fn permutation_plan() {
        let s = detect_active_support(&sol(DMatrix::identity(2, 2) * 0.5), 0.1).unwrap();
        assert_eq!(s.indices, vec![(0, 0), (1, 1)]);
        assert_eq!(s.tau, 0.0);
        assert_eq!(s.active_rows, vec![0, 1]);
        assert!(s.contains(1, 1) && !s.contains(0, 1));
    }

    #[test]
    fn uniform_plan() {
        let u = sol(DMatrix::from_element(4, 4, 0.0625));
        let s = detect_active_support(&u, 0.05).unwrap();
        assert_eq!(s.len(), 16);
        assert_eq!(s.tau, 0.0);
        assert!(matches!(
            detect_active_support(&u, 0.1),
            Err(Error::NoSeparation { .. })
        ));
    }

    #[test]
    fn band_entries_break_separation() {
        let p = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, 0.4]);
        assert!(detect_active_support(&sol(p.clone()), 0.3).is_ok());
        // 0.2 <= 2 * 0.1
        assert!(matches!(
            detect_active_support(&sol(p), 0.2),
            Err(Error::NoSeparation { .. })
        ));
    }
}
