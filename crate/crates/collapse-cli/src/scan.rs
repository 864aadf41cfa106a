//! `scan`: run scaling sweeps and write CSV, JSON, and plot-data files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use collapse_core::{run_scan, ScalingReport, Verdict};

use crate::config::{self, Job, JobKind, RunConfig, SCHEMA_VERSION};
use crate::output;

/// Envelope for `{job}.report.json`; `report-merge` reads these back.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReportFile {
    pub schema_version: u32,
    pub job: String,
    pub report: ScalingReport,
}

pub fn run(cfg: &RunConfig, job: Option<&str>, out: &Path, seed: Option<u64>) -> Result<bool> {
    let jobs = config::select(cfg, JobKind::Scan, job)?;
    if jobs.is_empty() {
        eprintln!("warning: no scan jobs selected");
    }
    let mut ok = true;
    for job in jobs {
        match run_one(cfg, job, out, seed) {
            Ok(report) => {
                // Required sweeps gate the exit code on a usable verdict.
                if job.required && report.verdict == Verdict::Inconclusive {
                    ok = false;
                    eprintln!("error: scan job \"{}\" (required) is inconclusive", job.name);
                }
            }
            Err(err) => {
                ok = false;
                eprintln!("error: scan job \"{}\": {err:#}", job.name);
            }
        }
    }
    Ok(ok)
}

fn run_one(cfg: &RunConfig, job: &Job, out: &Path, seed: Option<u64>) -> Result<ScalingReport> {
    let spec = config::scan_spec(cfg, job, seed)?;
    let report = run_scan(&spec).with_context(|| format!("job \"{}\"", job.name))?;

    // Per-resolution table, raw values, fixed column order.
    let mut csv = String::from("R,lhs,rhs,ratio,lhs_converged,rhs_converged\n");
    for rec in &report.records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            rec.r, rec.lhs, rec.rhs, rec.ratio, rec.lhs_converged, rec.rhs_converged
        );
    }
    output::write_atomic(&out.join(format!("{}.scan.csv", job.name)), csv.as_bytes())?;

    let envelope = ReportFile {
        schema_version: SCHEMA_VERSION,
        job: job.name.clone(),
        report,
    };
    let json = serde_json::to_string_pretty(&envelope)? + "\n";
    output::write_atomic(&out.join(format!("{}.report.json", job.name)), json.as_bytes())?;
    let report = envelope.report;

    // Two whitespace-separated columns (log10 R, log10 ratio) for plotting.
    let mut plot = String::new();
    for rec in &report.records {
        let _ = writeln!(plot, "{} {}", rec.r.log10(), rec.ratio.log10());
    }
    output::write_atomic(&out.join(format!("{}.plot.dat", job.name)), plot.as_bytes())?;

    println!(
        "job {}: slope {:.4} (predicted {:.4}), verdict {}, converged {}",
        job.name, report.fitted.slope, report.predicted_slope, report.verdict, report.all_converged
    );
    Ok(report)
}
