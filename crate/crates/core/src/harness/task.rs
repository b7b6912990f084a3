use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::anneal::process::CostProcess;
use crate::anneal::run::step_seed;
use crate::cost::CostMatrix;
use crate::error::{Error, Result};
use crate::io::matrix_rows;

/// Scale of the jitter added to off-permutation entries.
pub const TASK_JITTER: f64 = 1e-3;

/// Noise level `a / (1 + b * step)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub a: f64,
    pub b: f64,
}

impl NoiseSchedule {
    pub fn at(&self, step: usize) -> f64 {
        self.a / (1.0 + self.b * step as f64)
    }
}

/// Planted-permutation assignment problem observed through decaying noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub n: usize,
    pub margin: f64,
    pub planted: Vec<usize>,
    pub base_cost: CostMatrix,
    pub noise: NoiseSchedule,
    pub seed: u64,
}

/// Serialised form of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDocument {
    pub n: usize,
    pub margin: f64,
    pub noise_a: f64,
    pub noise_b: f64,
    pub seed: u64,
    pub planted: Vec<usize>,
    pub base_cost: Vec<Vec<f64>>,
}

impl SyntheticTask {
    pub fn to_document(&self) -> TaskDocument {
        TaskDocument {
            n: self.n,
            margin: self.margin,
            noise_a: self.noise.a,
            noise_b: self.noise.b,
            seed: self.seed,
            planted: self.planted.clone(),
            base_cost: matrix_rows(self.base_cost.entries()),
        }
    }

    pub fn from_document(doc: &TaskDocument) -> Result<Self> {
        let n = doc.n;
        let mut seen = vec![false; n];
        if doc.planted.len() != n
            || doc
                .planted
                .iter()
                .any(|&j| j >= n || std::mem::replace(&mut seen[j], true))
        {
            return Err(Error::InvalidInput(
                "planted is not a permutation of 0..n".into(),
            ));
        }
        Ok(Self {
            n,
            margin: doc.margin,
            planted: doc.planted.clone(),
            base_cost: CostMatrix::from_rows(&doc.base_cost)?,
            noise: NoiseSchedule {
                a: doc.noise_a,
                b: doc.noise_b,
            },
            seed: doc.seed,
        })
    }

    /// Noise-free instance.
    pub fn clean(&self) -> Self {
        Self {
            noise: NoiseSchedule { a: 0.0, b: 0.0 },
            ..self.clone()
        }
    }
}

/// Samples a task: uniform random planted permutation, cost 0 on it and
/// `margin + U[0, TASK_JITTER)` elsewhere.
pub fn generate_task(n: usize, margin: f64, noise: (f64, f64), seed: u64) -> Result<SyntheticTask> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "margin must be > 0, got {margin}"
        )));
    }
    if !(noise.0 >= 0.0 && noise.1 >= 0.0) {
        return Err(Error::InvalidInput("noise parameters must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted: Vec<usize> = (0..n).collect();
    planted.shuffle(&mut rng);
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let jitter: f64 = rng.random::<f64>() * TASK_JITTER;
            if planted[i] != j {
                entries[(i, j)] = margin + jitter;
            }
        }
    }
    Ok(SyntheticTask {
        n,
        margin,
        planted,
        base_cost: CostMatrix::uniform(entries)?,
        noise: NoiseSchedule {
            a: noise.0,
            b: noise.1,
        },
        seed,
    })
}

/// Uniform marginals and i.i.d. `U[0, 1)` entries, filled row by row.
pub fn random_cost(n: usize, seed: u64) -> Result<CostMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("need n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
    CostMatrix::uniform(DMatrix::from_row_slice(n, n, &values))
}

impl CostProcess for SyntheticTask {
    fn n(&self) -> usize {
        self.n
    }

    /// Base cost plus i.i.d. Gaussian noise of scale `noise.at(step)`, drawn
    /// afresh for every step.
    fn cost_at(&self, step: usize) -> Result<CostMatrix> {
        let scale = self.noise.at(step);
        if scale == 0.0 {
            return Ok(self.base_cost.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(step_seed(self.seed, step));
        let n = self.n;
        let noise = DMatrix::from_fn(n, n, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * scale
        });
        self.base_cost
            .with_entries(self.base_cost.entries() + noise)
    }

    fn reference(&self) -> Option<&[usize]> {
        Some(&self.planted)
    }
}
