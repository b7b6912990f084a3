use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cooling law applied on every step the controller allows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// `eps <- alpha * eps`.
    Exponential { alpha: f64 },
    /// `eps <- eps - c * eps^2`.
    Quadratic { c: f64 },
    /// Exponential cooling on a cost perturbed by fresh Gumbel noise each
    /// step.
    GumbelExponential {
        alpha: f64,
        noise_scale: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Exponential { alpha } | Schedule::GumbelExponential { alpha, .. }
                if !(alpha > 0.0 && alpha < 1.0) =>
            {
                Err(Error::InvalidInput(format!(
                    "alpha must lie in (0, 1), got {alpha}"
                )))
            }
            Schedule::GumbelExponential { noise_scale, .. } if !(noise_scale >= 0.0) => Err(
                Error::InvalidInput(format!("noise_scale must be >= 0, got {noise_scale}")),
            ),
            Schedule::Quadratic { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidInput(format!("c must be > 0, got {c}")))
            }
            _ => Ok(()),
        }
    }

    /// Proposed next temperature, never below `epsilon_floor`.
    pub fn next_epsilon(&self, epsilon: f64, epsilon_floor: f64) -> f64 {
        let next = match *self {
            Schedule::Exponential { alpha } | Schedule::GumbelExponential { alpha, .. } => {
                alpha * epsilon
            }
            Schedule::Quadratic { c } => epsilon - c * epsilon * epsilon,
        };
        next.max(epsilon_floor)
    }

    /// Scale of the Gumbel perturbation applied to the cost, zero for the
    /// deterministic schedules.
    pub fn cost_noise(&self) -> Option<(f64, u64)> {
        match *self {
            Schedule::GumbelExponential {
                noise_scale, seed, ..
            } if noise_scale > 0.0 => Some((noise_scale, seed)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        assert_abs_diff_eq!(
            Schedule::Exponential { alpha: 0.95 }.next_epsilon(1.0, 1e-4),
            0.95,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Schedule::Quadratic { c: 0.5 }.next_epsilon(0.1, 1e-4),
            0.095,
            epsilon = 1e-15
        );
        assert_eq!(
            Schedule::Quadratic { c: 0.5 }.next_epsilon(1e-4, 1e-4),
            1e-4
        );
    }

    #[test]
    fn serde_shape() {
        let s: Schedule = serde_json::from_str(r#"{"kind":"exponential","alpha":0.9}"#).unwrap();
        assert_eq!(s, Schedule::Exponential { alpha: 0.9 });
        let g: Schedule =
            serde_json::from_str(r#"{"kind":"gumbel_exponential","alpha":0.9,"noise_scale":0.1}"#)
                .unwrap();
        assert_eq!(g.cost_noise(), Some((0.1, 0)));
    }

    #[test]
    fn validation() {
        assert!(Schedule::Exponential { alpha: 1.0 }.validate().is_err());
        assert!(Schedule::Quadratic { c: 0.0 }.validate().is_err());
        assert!(Schedule::GumbelExponential {
            alpha: 0.9,
            noise_scale: -1.0,
            seed: 0
        }
        .validate()
        .is_err());
    }
}
