//! Dense helpers on top of nalgebra: general eigenvalues, extreme singular
//! values, and the condition number of an eigenvector basis.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvector bases with a condition number above this are reported as
/// infinite.
pub const MODAL_CONDITION_CAP: f64 = 1e12;

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let ev = f
        .eigenvalues()
        .map_err(|e| Error::Numerical(format!("eigenvalue iteration failed: {e:?}")))?;
    Ok(ev.iter().map(|z| Complex::new(z.re, z.im)).collect())
}

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.ncols() > 2 * m.nrows() {
        // wide operators: the Gram matrix is much smaller
        let gram = m * m.transpose();
        return symmetric_eigenvalues(&gram)
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(0.0)
            .sqrt();
    }
    singular_values(m)[0]
}

pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn min_singular_value_complex(m: &DMatrix<Complex<f64>>) -> f64 {
    m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a symmetric matrix in increasing order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// `kappa(V) = ||V|| ||V^-1||` for a unit-column eigenvector matrix of `m`.
///
/// Eigenvalues closer than a relative `1e-6` are treated as one cluster and
/// get an orthonormal basis of the corresponding near-null space of
/// `m - lambda I`. A cluster whose null space is too small means `m` is
/// defective there, and the result is `f64::INFINITY`, as is any condition
/// number above [`MODAL_CONDITION_CAP`].
pub fn modal_condition(m: &DMatrix<f64>) -> Result<f64> {
    let n = m.nrows();
    if n == 0 {
        return Ok(1.0);
    }
    let scale = m.norm().max(1.0);
    let mut lambdas = eigenvalues(m)?;
    lambdas.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let cluster_tol = 1e-6 * scale;
    let mut clusters: Vec<Vec<Complex<f64>>> = Vec::new();
    for l in lambdas {
        match clusters
            .iter_mut()
            .find(|c| c.iter().any(|x| (x - l).norm() <= cluster_tol))
        {
            Some(c) => c.push(l),
            None => clusters.push(vec![l]),
        }
    }

    let mc: DMatrix<Complex<f64>> = m.map(|v| Complex::new(v, 0.0));
    let mut columns: Vec<DVector<Complex<f64>>> = Vec::with_capacity(n);
    for cluster in &clusters {
        let k = cluster.len();
        let centre = cluster.iter().sum::<Complex<f64>>() / k as f64;
        let shifted = &mc - DMatrix::<Complex<f64>>::identity(n, n) * centre;
        let svd = shifted.svd(false, true);
        let v_t = match svd.v_t {
            Some(v) => v,
            None => return Ok(f64::INFINITY),
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        // the k-th smallest singular value must vanish for a full eigenspace
        let spread = cluster
            .iter()
            .map(|x| (x - centre).norm())
            .fold(0.0, f64::max);
        if svd.singular_values[order[k - 1]] > 1e-6 * scale + 4.0 * spread {
            return Ok(f64::INFINITY);
        }
        for &idx in order.iter().take(k) {
            let row = v_t.row(idx);
            columns.push(DVector::from_iterator(n, row.iter().map(|z| z.conj())));
        }
    }
    let v = DMatrix::from_columns(&columns);
    let s = v.singular_values();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let kappa = smax / smin;
    if !kappa.is_finite() || kappa > MODAL_CONDITION_CAP {
        Ok(f64::INFINITY)
    } else {
        Ok(kappa)
    }
}

/// Orthonormal basis (as columns) of the vectors in `R^k` that sum to zero.
pub fn zero_sum_basis(k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(k, k.saturating_sub(1));
    for m in 1..k {
        let norm = ((m * (m + 1)) as f64).sqrt();
        for i in 0..m {
            h[(i, m - 1)] = 1.0 / norm;
        }
        h[(m, m - 1)] = -(m as f64) / norm;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_matrix_has_unit_modal_condition() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        assert_abs_diff_eq!(modal_condition(&m).unwrap(), 1.0, epsilon = 1e-10);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_abs_diff_eq!(modal_condition(&rot).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn jordan_block_is_infinite() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]);
        assert!(modal_condition(&m).unwrap().is_infinite());
    }

    #[test]
    fn repeated_but_diagonalizable() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 0.3]));
        assert_abs_diff_eq!(modal_condition(&m).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn non_normal_two_by_two() {
        // eigenvectors (1,0) and (1,1)/sqrt2: kappa = cot(pi/8) = 1 + sqrt2
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(
            modal_condition(&m).unwrap(),
            1.0 + 2f64.sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn zero_sum_basis_is_orthonormal() {
        for k in 1..6 {
            let h = zero_sum_basis(k);
            let g = h.transpose() * &h;
            assert_abs_diff_eq!(
                (g - DMatrix::identity(k - 1, k - 1)).amax(),
                0.0,
                epsilon = 1e-12
            );
            for c in 0..k - 1 {
                assert_abs_diff_eq!(h.column(c).sum(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn wide_spectral_norm_matches_svd() {
        let m = DMatrix::from_fn(3, 10, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
        assert_abs_diff_eq!(spectral_norm(&m), singular_values(&m)[0], epsilon = 1e-10);
    }
}
