//! `build`: construct families and write summary records.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use collapse_core::{build_family, gram_l2_norm, hs_norm_exact, Family, WavepacketSum};

use crate::config::{self, Job, JobKind, RunConfig, SCHEMA_VERSION};
use crate::output;

/// One constructed family, serialized as `{job}.build.json`. Norms appear
/// raw and as log10; records for the same config and seed are byte-identical.
#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct BuildRecord {
    schema_version: u32,
    job: String,
    family: Family,
    n: usize,
    r: f64,
    c: f64,
    m: Option<u32>,
    seed: u64,
    term_count: usize,
    min_spacing: f64,
    l2_norm: f64,
    l2_norm_log10: f64,
    hs_norms: Vec<HsNorm>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct HsNorm {
    s: u32,
    value: f64,
    log10: f64,
}

pub fn run(cfg: &RunConfig, job: Option<&str>, out: &Path, seed: Option<u64>) -> Result<bool> {
    let jobs = config::select(cfg, JobKind::Build, job)?;
    if jobs.is_empty() {
        eprintln!("warning: no build jobs selected");
    }
    let mut ok = true;
    for job in jobs {
        if let Err(err) = run_one(cfg, job, out, seed) {
            ok = false;
            eprintln!("error: build job \"{}\": {err:#}", job.name);
        }
    }
    Ok(ok)
}

fn run_one(cfg: &RunConfig, job: &Job, out: &Path, seed: Option<u64>) -> Result<()> {
    let spec = config::family_spec(cfg, job, job.r.expect("validated in load"), seed)?;
    let sum = build_family(&spec).with_context(|| format!("job \"{}\"", job.name))?;
    let meta = sum.meta().expect("built families carry meta");

    let l2 = gram_l2_norm(&sum);
    let orders = job
        .hs_orders
        .clone()
        .or_else(|| cfg.defaults.hs_orders.clone())
        .unwrap_or_else(|| vec![0, 1, 2]);
    let mut hs_norms = Vec::with_capacity(orders.len());
    for s in orders {
        let value = hs_norm_exact(&sum, s)?;
        hs_norms.push(HsNorm { s, value, log10: value.log10() });
    }

    let record = BuildRecord {
        schema_version: SCHEMA_VERSION,
        job: job.name.clone(),
        family: meta.family,
        n: meta.n,
        r: meta.r,
        c: meta.c,
        m: meta.m,
        seed: meta.seed,
        term_count: sum.term_count(),
        min_spacing: meta.min_spacing,
        l2_norm: l2,
        l2_norm_log10: l2.log10(),
        hs_norms,
    };
    let json = serde_json::to_string_pretty(&record)? + "\n";
    output::write_atomic(&out.join(format!("{}.build.json", job.name)), json.as_bytes())?;

    if job.write_terms {
        let csv = terms_csv(&sum);
        output::write_atomic(&out.join(format!("{}.terms.csv", job.name)), csv.as_bytes())?;
    }

    println!(
        "job {}: {} {} terms, min spacing {}, L2 norm {}",
        job.name,
        meta.family,
        sum.term_count(),
        meta.min_spacing,
        l2
    );
    Ok(())
}

/// Raw term list: center and modulation coordinates, then the shared width.
fn terms_csv(sum: &WavepacketSum) -> String {
    let d = sum.ambient_dim();
    let mut csv = String::new();
    for j in 1..=d {
        let _ = write!(csv, "center_{j},");
    }
    for j in 1..=d {
        let _ = write!(csv, "modulation_{j},");
    }
    csv.push_str("width\n");
    for term in sum.terms() {
        for v in term.center() {
            let _ = write!(csv, "{v},");
        }
        for v in term.modulation() {
            let _ = write!(csv, "{v},");
        }
        let _ = writeln!(csv, "{}", term.width());
    }
    csv
}
