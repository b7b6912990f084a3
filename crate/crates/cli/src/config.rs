//! JSON configuration for each subcommand. Every field has a default, so a
//! config file only needs the fields it changes; command-line flags override
//! the file.

use std::path::{Path, PathBuf};

use entropic_anneal::anneal::{CalibrationSettings, ControllerConfig, Schedule};
use entropic_anneal::harness::experiment::{
    calibration_proxies, collapse_methods, collapse_solve_config, collapse_task,
};
use entropic_anneal::harness::{CompareConfig, TaskSpec};
use entropic_anneal::tracking::{BasinModel, TrackingParams};
use entropic_anneal::{Error, Result, SolveConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Safety slope calibrated for the collapse experiment, used when neither a
/// config nor `--k-safe` gives one.
pub const DEFAULT_K_SAFE: f64 = 0.8372391987897969;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad config {}: {e}", p.display())))
        }
    }
}

/// Where a planted task comes from: a saved task document, or the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSource {
    /// Path to a task document written by `gen`; overrides the fields below.
    pub task: Option<PathBuf>,
    pub n: usize,
    pub margin: f64,
    pub noise_a: f64,
    pub noise_b: f64,
    pub seed: u64,
}

impl Default for TaskSource {
    fn default() -> Self {
        Self {
            task: None,
            n: 8,
            margin: 1.0,
            noise_a: 0.0,
            noise_b: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveCommand {
    pub n: usize,
    /// `zero`, `random`, `task`, or a path to a CSV or JSON cost.
    pub cost: String,
    pub eps: f64,
    pub seed: u64,
    pub task: TaskSource,
    pub solve: SolveConfig,
}

impl Default for SolveCommand {
    fn default() -> Self {
        Self {
            n: 4,
            cost: "random".into(),
            eps: 0.1,
            seed: 0,
            task: TaskSource::default(),
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseCommand {
    pub task: TaskSource,
    /// A single temperature gives a spectral report; otherwise `eps_list` is
    /// swept.
    pub eps: Option<f64>,
    pub eps_list: Vec<f64>,
    /// Jittered copies of the cost per temperature in a sweep.
    pub jitter_seeds: usize,
    pub solve: SolveConfig,
}

impl Default for DiagnoseCommand {
    fn default() -> Self {
        Self {
            task: TaskSource::default(),
            eps: None,
            eps_list: vec![0.2, 0.1, 0.05],
            jitter_seeds: 1,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PseudospectrumCommand {
    pub task: TaskSource,
    pub eps: f64,
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub resolution: usize,
    pub solve: SolveConfig,
}

impl Default for PseudospectrumCommand {
    fn default() -> Self {
        Self {
            task: TaskSource::default(),
            eps: 0.1,
            re: (-0.2, 1.2),
            im: (-0.7, 0.7),
            resolution: 41,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateCommand {
    pub proxies: TaskSpec,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub settings: CalibrationSettings,
    pub solve: SolveConfig,
}

impl Default for CalibrateCommand {
    fn default() -> Self {
        let proxies = calibration_proxies().expect("fixed proxy parameters are valid");
        let first = &proxies[0];
        Self {
            proxies: TaskSpec {
                n: first.n,
                margin: first.margin,
                noise_a: first.noise.a,
                noise_b: first.noise.b,
            },
            seeds: proxies.iter().map(|p| p.seed).collect(),
            alpha: entropic_anneal::harness::experiment::CALIBRATION_ALPHA,
            settings: CalibrationSettings::default(),
            solve: collapse_solve_config(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunCommand {
    pub task: TaskSpec,
    pub seed: u64,
    pub method: ControllerConfig,
    pub solve: SolveConfig,
}

impl Default for RunCommand {
    fn default() -> Self {
        Self {
            task: collapse_task(),
            seed: 0,
            method: collapse_methods(DEFAULT_K_SAFE).remove(2),
            solve: collapse_solve_config(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CompareCommand(pub CompareConfig);

impl Default for CompareCommand {
    fn default() -> Self {
        Self(entropic_anneal::harness::experiment::collapse_experiment(
            DEFAULT_K_SAFE,
            (0..20).collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackCommand {
    pub params: TrackingParams,
    pub steps: usize,
    /// Applies the pause rule with this slope.
    pub k_safe: Option<f64>,
}

impl Default for TrackCommand {
    fn default() -> Self {
        Self {
            params: TrackingParams {
                gamma: 1.0,
                sensitivity_const: 1.0,
                kappa: 1.0,
                basin_radius: 1.0,
                basin: BasinModel::Linear,
                epsilon_start: 1.0,
                schedule: Some(Schedule::Exponential { alpha: 0.95 }),
                initial_error: 0.0,
                epsilon_floor: 0.0,
            },
            steps: 1000,
            k_safe: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenCommand {
    pub n: usize,
    pub margin: f64,
    pub noise_a: f64,
    pub noise_b: f64,
    pub seed: u64,
}

impl Default for GenCommand {
    fn default() -> Self {
        let t = collapse_task();
        Self {
            n: t.n,
            margin: t.margin,
            noise_a: t.noise_a,
            noise_b: t.noise_b,
            seed: 0,
        }
    }
}
