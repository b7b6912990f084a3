//! `eanneal`: experiment harness for drift-controlled entropic annealing.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure,
//! 3 controller stall.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use entropic_anneal::anneal::Schedule;
use entropic_anneal::harness::experiment::collapse_methods;
use entropic_anneal::tracking::BasinModel;
use entropic_anneal::{Error, Result};

use commands::Output;
use config::*;

#[derive(Parser)]
#[command(
    name = "eanneal",
    version,
    about = "Entropic optimal transport annealing experiments"
)]
struct Cli {
    /// JSON config for the subcommand; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for all artifacts; without it the main result goes to stdout.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct TaskFlags {
    /// Task document written by `gen`.
    #[arg(long)]
    task: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    margin: Option<f64>,
}

impl TaskFlags {
    fn apply(&self, src: &mut TaskSource, seed: Option<u64>) {
        if let Some(t) = &self.task {
            src.task = Some(t.clone());
        }
        set(&mut src.n, self.n);
        set(&mut src.margin, self.margin);
        set(&mut src.seed, seed);
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance at one temperature; prints plan, entropy and residual.
    Solve {
        #[arg(long)]
        n: Option<usize>,
        /// zero, random, task, or a path to a CSV/JSON cost.
        #[arg(long)]
        cost: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        task: Option<PathBuf>,
    },
    /// Spectral report at one temperature, or a constants sweep.
    Diagnose {
        #[command(flatten)]
        task: TaskFlags,
        #[arg(long)]
        eps: Option<f64>,
        /// Comma-separated temperatures for a sweep.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        #[arg(long)]
        jitter_seeds: Option<usize>,
    },
    /// sigma_min(zI - J) on a grid, as CSV.
    Pseudospectrum {
        #[command(flatten)]
        task: TaskFlags,
        #[arg(long)]
        eps: Option<f64>,
        /// Real range as `lo,hi`.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 2,
            allow_negative_numbers = true
        )]
        re: Option<Vec<f64>>,
        /// Imaginary range as `lo,hi`.
        #[arg(
            long,
            value_delimiter = ',',
            num_args = 2,
            allow_negative_numbers = true
        )]
        im: Option<Vec<f64>>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Estimate the safety slope from aggressive runs on proxy tasks.
    Calibrate {
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run one method on one task; writes the JSONL step log.
    Run {
        /// standard, gumbel or eph_asc from the collapse suite.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        k_safe: Option<f64>,
    },
    /// Run the method suite over seeds; prints the summary CSV.
    Compare {
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Safety slope for every controlled method.
        #[arg(long)]
        k_safe: Option<f64>,
    },
    /// Simulate the scalar tracking-error model; prints the trace CSV.
    Track {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        sensitivity: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        radius: Option<f64>,
        /// linear or constant.
        #[arg(long)]
        basin: Option<String>,
        #[arg(long)]
        eps_start: Option<f64>,
        /// Exponential schedule with this ratio.
        #[arg(long, conflicts_with = "quadratic")]
        alpha: Option<f64>,
        /// Quadratic schedule with this rate.
        #[arg(long)]
        quadratic: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        k_safe: Option<f64>,
    },
    /// Generate a planted task document.
    Gen {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        noise_a: Option<f64>,
        #[arg(long)]
        noise_b: Option<f64>,
    },
}

fn set<T>(field: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *field = v;
    }
}

fn pair(v: Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.map(|v| (v[0], v[1]))
}

fn execute(cli: Cli) -> Result<()> {
    let out = Output::new(cli.output_dir)?;
    let path = cli.config.as_deref();
    let seed = cli.seed;
    match cli.command {
        Command::Solve { n, cost, eps, task } => {
            let mut c: SolveCommand = load(path)?;
            set(&mut c.n, n);
            set(&mut c.cost, cost);
            set(&mut c.eps, eps);
            set(&mut c.seed, seed);
            set(&mut c.task.seed, seed);
            if task.is_some() {
                c.task.task = task;
                c.cost = "task".into();
            }
            commands::solve(&c, &out)
        }
        Command::Diagnose {
            task,
            eps,
            eps_list,
            jitter_seeds,
        } => {
            let mut c: DiagnoseCommand = load(path)?;
            task.apply(&mut c.task, seed);
            if eps.is_some() {
                c.eps = eps;
            }
            set(&mut c.eps_list, eps_list);
            set(&mut c.jitter_seeds, jitter_seeds);
            commands::diagnose(&c, &out)
        }
        Command::Pseudospectrum {
            task,
            eps,
            re,
            im,
            resolution,
        } => {
            let mut c: PseudospectrumCommand = load(path)?;
            task.apply(&mut c.task, seed);
            set(&mut c.eps, eps);
            set(&mut c.re, pair(re));
            set(&mut c.im, pair(im));
            set(&mut c.resolution, resolution);
            commands::pseudospectrum(&c, &out)
        }
        Command::Calibrate { alpha } => {
            let mut c: CalibrateCommand = load(path)?;
            set(&mut c.alpha, alpha);
            if let Some(s) = seed {
                let k = c.seeds.len() as u64;
                c.seeds = (s..s + k).collect();
            }
            commands::calibrate(&c, &out)
        }
        Command::Run { method, k_safe } => {
            let mut c: RunCommand = load(path)?;
            if let Some(name) = method {
                let k = c.method.k_safe.unwrap_or(DEFAULT_K_SAFE);
                c.method = collapse_methods(k)
                    .into_iter()
                    .find(|m| m.name == name)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "unknown method {name}; expected standard, gumbel or eph_asc"
                        ))
                    })?;
            }
            if k_safe.is_some() {
                c.method.k_safe = k_safe;
            }
            set(&mut c.seed, seed);
            commands::run(&c, &out)
        }
        Command::Compare { seeds, k_safe } => {
            let mut c: CompareCommand = load(path)?;
            if let Some(s) = seed {
                c.0.seeds = vec![s];
            }
            set(&mut c.0.seeds, seeds);
            if let Some(k) = k_safe {
                for m in c.0.methods.iter_mut().filter(|m| m.k_safe.is_some()) {
                    m.k_safe = Some(k);
                }
            }
            commands::compare(&c, &out)
        }
        Command::Track {
            gamma,
            sensitivity,
            kappa,
            radius,
            basin,
            eps_start,
            alpha,
            quadratic,
            steps,
            k_safe,
        } => {
            let mut c: TrackCommand = load(path)?;
            let p = &mut c.params;
            set(&mut p.gamma, gamma);
            set(&mut p.sensitivity_const, sensitivity);
            set(&mut p.kappa, kappa);
            set(&mut p.basin_radius, radius);
            set(&mut p.epsilon_start, eps_start);
            if let Some(b) = basin {
                p.basin = match b.as_str() {
                    "linear" => BasinModel::Linear,
                    "constant" => BasinModel::Constant,
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "unknown basin {other}; expected linear or constant"
                        )))
                    }
                };
            }
            if let Some(a) = alpha {
                p.schedule = Some(Schedule::Exponential { alpha: a });
            }
            if let Some(q) = quadratic {
                p.schedule = Some(Schedule::Quadratic { c: q });
            }
            set(&mut c.steps, steps);
            if k_safe.is_some() {
                c.k_safe = k_safe;
            }
            commands::track(&c, &out)
        }
        Command::Gen {
            n,
            margin,
            noise_a,
            noise_b,
        } => {
            let mut c: GenCommand = load(path)?;
            set(&mut c.n, n);
            set(&mut c.margin, margin);
            set(&mut c.noise_a, noise_a);
            set(&mut c.noise_b, noise_b);
            set(&mut c.seed, seed);
            commands::gen(&c, &out)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::Parse(_) | Error::Io(_) => 1,
        Error::ControllerStalled { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
