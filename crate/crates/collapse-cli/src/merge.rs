//! `report-merge`: fold sweep reports into a verdict matrix.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use collapse_core::{verdict_summary, SuiteStatus, Verdict, VerdictSummary};

use crate::config::{self, JobKind, RunConfig, SCHEMA_VERSION};
use crate::output;
use crate::scan::ReportFile;

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct SummaryFile<'a> {
    schema_version: u32,
    jobs: Vec<&'a str>,
    summary: &'a VerdictSummary,
}

pub fn run(cfg: &RunConfig, job: Option<&str>, out: &Path) -> Result<bool> {
    let jobs = config::select(cfg, JobKind::Scan, job)?;
    if jobs.is_empty() {
        bail!("the config has no scan jobs; nothing to merge");
    }
    let mut reports = Vec::with_capacity(jobs.len());
    let mut names = Vec::with_capacity(jobs.len());
    let mut required_inconclusive = false;
    for job in &jobs {
        let path = out.join(format!("{}.report.json", job.name));
        let text = fs::read_to_string(&path).with_context(|| {
            format!(
                "no report for job \"{}\" at {} (run `scan` first)",
                job.name,
                path.display()
            )
        })?;
        let file: ReportFile = serde_json::from_str(&text)
            .with_context(|| format!("invalid report {}", path.display()))?;
        if file.schema_version != SCHEMA_VERSION {
            bail!(
                "{}: schema-version {} is unsupported (this build reads {SCHEMA_VERSION})",
                path.display(),
                file.schema_version
            );
        }
        if job.required && file.report.verdict == Verdict::Inconclusive {
            required_inconclusive = true;
        }
        names.push(job.name.as_str());
        reports.push(file.report);
    }

    let summary = verdict_summary(&reports)?;
    let file = SummaryFile {
        schema_version: SCHEMA_VERSION,
        jobs: names.clone(),
        summary: &summary,
    };
    let json = serde_json::to_string_pretty(&file)? + "\n";
    output::write_atomic(&out.join("summary.json"), json.as_bytes())?;

    println!(
        "{:<14} {:<10} {:>2} {:>2} {:>5} {:>5} {:>5} {:>2} {:>8} {:>9}  verdict",
        "job", "family", "n", "m", "p", "q", "alpha", "s", "slope", "predicted"
    );
    for (name, row) in names.iter().zip(&summary.rows) {
        println!(
            "{:<14} {:<10} {:>2} {:>2} {:>5} {:>5} {:>5} {:>2} {:>8.4} {:>9.4}  {}",
            name,
            row.family.to_string(),
            row.n,
            row.m.map_or_else(|| "-".into(), |m| m.to_string()),
            fmt_exponent(row.p),
            fmt_exponent(row.q),
            row.alpha,
            row.s,
            row.fitted_slope,
            row.predicted_slope,
            row.verdict
        );
    }
    println!("suite status: {} ({})", summary.status, summary.conclusion);

    Ok(summary.status != SuiteStatus::Fail && !required_inconclusive)
}

fn fmt_exponent(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v}")
    }
}
