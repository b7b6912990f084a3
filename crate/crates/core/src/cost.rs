//! Problem instances: a square cost matrix with its two marginals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Marginals must sum to one within this tolerance.
pub const MARGINAL_SUM_TOL: f64 = 1e-12;

/// A dense `n x n` transport cost together with the row and column marginals.
///
/// Construction validates every invariant, so a `CostMatrix` in hand is always
/// finite, square with `n >= 2`, and carries strictly positive marginals that
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: DMatrix<f64>,
    row_marginal: DVector<f64>,
    col_marginal: DVector<f64>,
}

impl CostMatrix {
    pub fn new(
        entries: DMatrix<f64>,
        row_marginal: DVector<f64>,
        col_marginal: DVector<f64>,
    ) -> Result<Self> {
        let n = entries.nrows();
        if entries.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "cost matrix must be square, got {}x{}",
                n,
                entries.ncols()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
        }
        for i in 0..n {
            for j in 0..n {
                if !entries[(i, j)].is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "cost entry ({i}, {j}) is not finite"
                    )));
                }
            }
        }
        check_marginal("row", &row_marginal, n)?;
        check_marginal("column", &col_marginal, n)?;
        Ok(Self {
            entries,
            row_marginal,
            col_marginal,
        })
    }

    /// Cost with uniform marginals `1/n`.
    pub fn uniform(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        let m = DVector::from_element(n, 1.0 / n.max(1) as f64);
        Self::new(entries, m.clone(), m)
    }

    /// Builds a uniform-marginal instance from row-major data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
        }
        Self::uniform(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn row_marginal(&self) -> &DVector<f64> {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &DVector<f64> {
        &self.col_marginal
    }

    /// Same marginals, new entries.
    pub fn with_entries(&self, entries: DMatrix<f64>) -> Result<Self> {
        Self::new(
            entries,
            self.row_marginal.clone(),
            self.col_marginal.clone(),
        )
    }
}

fn check_marginal(which: &str, m: &DVector<f64>, n: usize) -> Result<()> {
    if m.len() != n {
        return Err(Error::InvalidInput(format!(
            "{which} marginal has length {}, expected {n}",
            m.len()
        )));
    }
    for (i, &v) in m.iter().enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{which} marginal entry {i} must be finite and > 0, got {v}"
            )));
        }
    }
    let s: f64 = m.iter().sum();
    if (s - 1.0).abs() > MARGINAL_SUM_TOL {
        return Err(Error::InvalidInput(format!(
            "{which} marginal sums to {s}, expected 1"
        )));
    }
    Ok(())
}
