use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::harness::task::SyntheticTask;
use crate::spectral::constants::{estimate_constants, ConstantRow};
use crate::spectral::report::{spectral_report, SpectralReport};
use crate::transport::SolveConfig;

/// Per-temperature report line: either a report or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportLine {
    pub eps: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<SpectralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<ConstantRow>,
    pub reports: Vec<ReportLine>,
}

/// Constant estimates and spectral reports for the noise-free cost of `task`.
pub fn diagnostics_sweep(
    task: &SyntheticTask,
    eps_list: &[f64],
    seeds: usize,
    cfg: &SolveConfig,
) -> Result<SweepOutput> {
    let cost = &task.base_cost;
    let rows = estimate_constants(cost, eps_list, seeds, cfg)?;
    let reports = eps_list
        .iter()
        .map(|&eps| match spectral_report(cost, eps, cfg) {
            Ok(r) => ReportLine {
                eps,
                report: Some(r),
                error: None,
            },
            Err(e) => ReportLine {
                eps,
                report: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(SweepOutput { rows, reports })
}

pub fn write_reports_jsonl<W: Write>(lines: &[ReportLine], mut out: W) -> Result<()> {
    for l in lines {
        serde_json::to_writer(&mut out, l)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
