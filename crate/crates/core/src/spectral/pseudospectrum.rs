use std::io::Write;

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::min_singular_value_complex;

/// `sigma_min(z I - J)` sampled on a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudospectrumGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `values[k][l]` belongs to `z = re[l] + i im[k]`.
    pub values: Vec<Vec<f64>>,
}

impl PseudospectrumGrid {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "sigma_min"])?;
        for (k, &y) in self.im.iter().enumerate() {
            for (l, &x) in self.re.iter().enumerate() {
                w.write_record([x.to_string(), y.to_string(), self.values[k][l].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `resolution` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    let step = (hi - lo) / (resolution - 1) as f64;
    (0..resolution)
        .map(|k| {
            if k + 1 == resolution {
                hi
            } else {
                lo + step * k as f64
            }
        })
        .collect()
}

/// Smallest singular value of `z I - j`.
pub fn sigma_min_at(j: &DMatrix<f64>, z: Complex<f64>) -> f64 {
    let n = j.nrows();
    let m = DMatrix::from_fn(n, n, |a, b| {
        let d = if a == b { z } else { Complex::new(0.0, 0.0) };
        d - Complex::new(j[(a, b)], 0.0)
    });
    min_singular_value_complex(&m)
}

pub fn pseudospectrum_grid(
    j: &DMatrix<f64>,
    re_range: (f64, f64),
    im_range: (f64, f64),
    resolution: usize,
) -> Result<PseudospectrumGrid> {
    if !j.is_square() || j.nrows() == 0 {
        return Err(Error::InvalidInput(
            "matrix must be square and non-empty".into(),
        ));
    }
    if resolution < 2 {
        return Err(Error::InvalidInput(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    for (lo, hi) in [re_range, im_range] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("bad range [{lo}, {hi}]")));
        }
    }
    let re = linspace(re_range.0, re_range.1, resolution);
    let im = linspace(im_range.0, im_range.1, resolution);
    let values = im
        .iter()
        .map(|&y| {
            re.iter()
                .map(|&x| sigma_min_at(j, Complex::new(x, y)))
                .collect()
        })
        .collect();
    Ok(PseudospectrumGrid { re, im, values })
}
