use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use entropic_anneal::anneal::{calibrate_k_safe, write_jsonl, CostProcess};
use entropic_anneal::harness::compare::{write_aggregate_csv, write_summary_csv};
use entropic_anneal::harness::sweep::write_reports_jsonl;
use entropic_anneal::harness::{
    aggregate, diagnostics_sweep, generate_task, random_cost, run_compare_config, run_method,
    SeedOutcome, SyntheticTask, TaskDocument,
};
use entropic_anneal::io::{load_cost, matrix_rows};
use entropic_anneal::spectral::{
    duality_check, pseudospectrum_grid, sinkhorn_jacobian, spectral_report, write_constants_csv,
};
use entropic_anneal::tracking::{
    critical_epsilon, simulate_controlled_tracking, simulate_tracking,
};
use entropic_anneal::{
    plan_entropy, round_to_assignment, sinkhorn_solve, CostMatrix, Error, Result,
};
use serde::Serialize;

use crate::config::*;

/// Artifact destination: files under `--output-dir`, or stdout for the
/// primary artifact when no directory is given.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    /// Writes the main result of a command.
    pub fn primary(&self, name: &str, bytes: &[u8]) -> Result<()> {
        match &self.dir {
            Some(d) => fs::write(d.join(name), bytes)?,
            None => io::stdout().lock().write_all(bytes)?,
        }
        Ok(())
    }

    /// Writes a secondary artifact; dropped when there is no output directory.
    pub fn extra(&self, rel: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            let path = d.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, bytes)?;
        }
        Ok(())
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn load_task(src: &TaskSource) -> Result<SyntheticTask> {
    match &src.task {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read task {}: {e}", path.display()))
            })?;
            let doc: TaskDocument = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidInput(format!("bad task {}: {e}", path.display())))?;
            SyntheticTask::from_document(&doc)
        }
        None => generate_task(src.n, src.margin, (src.noise_a, src.noise_b), src.seed),
    }
}

#[derive(Serialize)]
struct SolveOutput {
    epsilon: f64,
    iterations: usize,
    marginal_residual: f64,
    entropy: f64,
    assignment: Vec<usize>,
    plan: Vec<Vec<f64>>,
}

pub fn solve(cfg: &SolveCommand, out: &Output) -> Result<()> {
    let cost = match cfg.cost.as_str() {
        "zero" => CostMatrix::from_rows(&vec![vec![0.0; cfg.n]; cfg.n])?,
        "random" => random_cost(cfg.n, cfg.seed)?,
        "task" => load_task(&cfg.task)?.base_cost,
        path => load_cost(Path::new(path)).map_err(|e| match e {
            Error::Io(io) => Error::InvalidInput(format!("cannot read cost {path}: {io}")),
            other => other,
        })?,
    };
    let s = sinkhorn_solve(&cost, cfg.eps, &cfg.solve, None)?;
    let result = SolveOutput {
        epsilon: s.epsilon,
        iterations: s.iterations,
        marginal_residual: s.marginal_residual,
        entropy: plan_entropy(&s),
        assignment: round_to_assignment(&s).permutation,
        plan: matrix_rows(&s.plan),
    };
    out.primary("solve.json", &json_bytes(&result)?)
}

pub fn diagnose(cfg: &DiagnoseCommand, out: &Output) -> Result<()> {
    let task = load_task(&cfg.task)?;
    if let Some(eps) = cfg.eps {
        let report = spectral_report(&task.base_cost, eps, &cfg.solve)?;
        out.primary("report.json", &json_bytes(&report)?)?;
        let line = match duality_check(&report) {
            Ok(d) => format!(
                "duality_check: {} (slack {:e}, bound {:e})\n",
                if d.pass { "pass" } else { "FAIL" },
                d.slack,
                d.bound
            ),
            Err(e) => format!("duality_check: undefined ({e})\n"),
        };
        // the verdict always goes to stdout, next to or instead of the report
        io::stdout().lock().write_all(line.as_bytes())?;
        return Ok(());
    }
    let sweep = diagnostics_sweep(&task, &cfg.eps_list, cfg.jitter_seeds, &cfg.solve)?;
    let mut csv = Vec::new();
    write_constants_csv(&sweep.rows, &mut csv)?;
    out.primary("constants.csv", &csv)?;
    let mut jsonl = Vec::new();
    write_reports_jsonl(&sweep.reports, &mut jsonl)?;
    out.extra(Path::new("reports.jsonl"), &jsonl)
}

pub fn pseudospectrum(cfg: &PseudospectrumCommand, out: &Output) -> Result<()> {
    let task = load_task(&cfg.task)?;
    let s = sinkhorn_solve(&task.base_cost, cfg.eps, &cfg.solve, None)?;
    let j = sinkhorn_jacobian(&task.base_cost, &s)?;
    let grid = pseudospectrum_grid(&j, cfg.re, cfg.im, cfg.resolution)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv)?;
    out.primary("pseudospectrum.csv", &csv)
}

pub fn calibrate(cfg: &CalibrateCommand, out: &Output) -> Result<()> {
    let p = &cfg.proxies;
    let proxies: Vec<SyntheticTask> = cfg
        .seeds
        .iter()
        .map(|&s| generate_task(p.n, p.margin, (p.noise_a, p.noise_b), s))
        .collect::<Result<_>>()?;
    let refs: Vec<&dyn CostProcess> = proxies.iter().map(|t| t as &dyn CostProcess).collect();
    let res = calibrate_k_safe(&refs, cfg.alpha, &cfg.solve, &cfg.settings)?;
    out.primary("calibration.json", &json_bytes(&res)?)
}

pub fn run(cfg: &RunCommand, out: &Output) -> Result<()> {
    let t = &cfg.task;
    let task = generate_task(t.n, t.margin, (t.noise_a, t.noise_b), cfg.seed)?;
    let (outcome, error) = run_method(&task, &cfg.method, &cfg.solve);
    let mut log = Vec::new();
    write_jsonl(&outcome.history, &mut log)?;
    out.primary(&format!("{}.jsonl", cfg.method.name), &log)?;
    out.extra(Path::new("summary.json"), &json_bytes(&outcome.summary)?)?;
    let s = &outcome.summary;
    eprintln!(
        "{}: steps_to_target {}, final_accuracy {}, pauses {}, controller {:.2}% of {:.3} s",
        s.method,
        s.steps_to_target
            .map(|v| v.to_string())
            .unwrap_or_else(|| "failed".into()),
        s.final_accuracy,
        s.pause_steps,
        share(s.controller_time, s.wall_time),
        s.wall_time
    );
    match error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn share(part: f64, total: f64) -> f64 {
    if total > 0.0 {
        100.0 * part / total
    } else {
        0.0
    }
}

fn report_wall_time(outcomes: &[SeedOutcome]) {
    let mut names: Vec<&str> = Vec::new();
    for so in outcomes {
        for o in &so.outcomes {
            if !names.contains(&o.summary.method.as_str()) {
                names.push(&o.summary.method);
            }
        }
    }
    for name in names {
        let (mut ctl, mut wall) = (0.0, 0.0);
        for o in outcomes.iter().flat_map(|so| &so.outcomes) {
            if o.summary.method == name {
                ctl += o.summary.controller_time;
                wall += o.summary.wall_time;
            }
        }
        eprintln!(
            "{name}: controller wall-time share {:.2}% of {wall:.3} s",
            share(ctl, wall)
        );
    }
}

pub fn compare(cfg: &CompareCommand, out: &Output) -> Result<()> {
    let cfg = &cfg.0;
    if cfg.methods.is_empty() {
        return Err(Error::InvalidInput(
            "compare needs at least one method".into(),
        ));
    }
    let outcomes = run_compare_config(cfg)?;
    let mut summary = Vec::new();
    write_summary_csv(&outcomes, &mut summary)?;
    out.primary("summary.csv", &summary)?;
    let mut agg = Vec::new();
    write_aggregate_csv(&aggregate(&outcomes), &mut agg)?;
    out.extra(Path::new("aggregate.csv"), &agg)?;
    for so in &outcomes {
        for o in &so.outcomes {
            let mut log = Vec::new();
            write_jsonl(&o.history, &mut log)?;
            let rel = PathBuf::from(format!("seed_{}", so.seed))
                .join(format!("{}.jsonl", o.summary.method));
            out.extra(&rel, &log)?;
        }
    }
    report_wall_time(&outcomes);
    Ok(())
}

pub fn track(cfg: &TrackCommand, out: &Output) -> Result<()> {
    let trace = match cfg.k_safe {
        Some(k) => simulate_controlled_tracking(&cfg.params, cfg.steps, k)?,
        None => simulate_tracking(&cfg.params, cfg.steps)?,
    };
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    out.primary("trace.csv", &csv)?;
    let crit = critical_epsilon(&cfg.params)?;
    out.extra(Path::new("critical.json"), &json_bytes(&crit)?)?;
    match trace.escape() {
        Some(r) => eprintln!("escaped at step {} (eps {})", r.step, r.epsilon),
        None => eprintln!("no escape in {} steps", cfg.steps),
    }
    Ok(())
}

pub fn gen(cfg: &GenCommand, out: &Output) -> Result<()> {
    let task = generate_task(cfg.n, cfg.margin, (cfg.noise_a, cfg.noise_b), cfg.seed)?;
    out.primary("task.json", &json_bytes(&task.to_document())?)
}
