use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel};
use serde::{Deserialize, Serialize};

use crate::anneal::schedule::Schedule;
use crate::cost::CostMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Cool,
    Pause,
}

/// Settings for one annealing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    /// Label used in logs and summaries.
    #[serde(default = "default_name")]
    pub name: String,
    /// Safety slope of the drift law. `None` runs the schedule uncontrolled.
    pub k_safe: Option<f64>,
    pub schedule: Schedule,
    pub epsilon_start: f64,
    pub epsilon_target: f64,
    pub max_steps: usize,
    pub max_consecutive_pauses: usize,
    /// Extra steps solved at the target temperature after it is reached.
    #[serde(default)]
    pub hold_steps: usize,
}

fn default_name() -> String {
    "run".into()
}

impl ControllerConfig {
    pub fn validate(&self, epsilon_floor: f64) -> Result<()> {
        self.schedule.validate()?;
        if let Some(k) = self.k_safe {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidInput(format!("k_safe must be > 0, got {k}")));
            }
        }
        if !(self.epsilon_target < self.epsilon_start) || !self.epsilon_start.is_finite() {
            return Err(Error::InvalidInput(format!(
                "need epsilon_target < epsilon_start, got {} and {}",
                self.epsilon_target, self.epsilon_start
            )));
        }
        if !(self.epsilon_target >= epsilon_floor) {
            return Err(Error::InvalidInput(format!(
                "epsilon_target {} is below the floor {epsilon_floor}",
                self.epsilon_target
            )));
        }
        if self.max_steps == 0 || self.max_consecutive_pauses == 0 {
            return Err(Error::InvalidInput(
                "max_steps and max_consecutive_pauses must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Cool iff `drift <= k_safe * epsilon`.
pub fn controller_decide(drift: f64, epsilon: f64, k_safe: f64) -> Decision {
    if drift <= k_safe * epsilon {
        Decision::Cool
    } else {
        Decision::Pause
    }
}

/// Frobenius norm of `curr - prev`.
pub fn measure_drift(prev_plan: &DMatrix<f64>, curr_plan: &DMatrix<f64>) -> Result<f64> {
    if prev_plan.shape() != curr_plan.shape() {
        return Err(Error::InvalidInput(format!(
            "plan shapes differ: {:?} vs {:?}",
            prev_plan.shape(),
            curr_plan.shape()
        )));
    }
    Ok((curr_plan - prev_plan).norm())
}

/// Adds i.i.d. `Gumbel(0, noise_scale)` noise to every entry, row-major order.
pub fn perturb_cost(cost: &CostMatrix, noise_scale: f64, rng_seed: u64) -> Result<CostMatrix> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise_scale must be >= 0, got {noise_scale}"
        )));
    }
    if noise_scale == 0.0 {
        return Ok(cost.clone());
    }
    let gumbel =
        Gumbel::new(0.0, noise_scale).map_err(|e| Error::InvalidInput(format!("gumbel: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = cost.n();
    let mut entries = cost.entries().clone();
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] += gumbel.sample(&mut rng);
        }
    }
    cost.with_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn decisions() {
        assert_eq!(controller_decide(0.04, 0.1, 0.5), Decision::Cool);
        assert_eq!(controller_decide(0.06, 0.1, 0.5), Decision::Pause);
        assert_eq!(controller_decide(0.05, 0.1, 0.5), Decision::Cool);
    }

    #[test]
    fn drift_examples() {
        let a = DMatrix::from_element(2, 2, 0.25);
        assert_eq!(measure_drift(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b[(0, 0)] += 0.1;
        b[(0, 1)] -= 0.1;
        assert_abs_diff_eq!(
            measure_drift(&a, &b).unwrap(),
            0.02f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(measure_drift(&a, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(perturb_cost(&c, 0.0, 3).unwrap(), c);
        let p1 = perturb_cost(&c, 0.1, 3).unwrap();
        let p2 = perturb_cost(&c, 0.1, 3).unwrap();
        let p3 = perturb_cost(&c, 0.1, 4).unwrap();
        assert_eq!(p1, p2);
        assert_ne!(p1, p3);
    }
}
