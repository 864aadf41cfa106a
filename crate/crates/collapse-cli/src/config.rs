//! Versioned TOML run configuration. All physics parameters live here;
//! nothing numerical is hard-coded in the commands.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use collapse_core::{Family, FamilySpec, RegionPolicy, ScanSpec};

/// Config and report schema revision this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub defaults: Defaults,
    #[serde(default, rename = "job")]
    pub jobs: Vec<Job>,
}

/// Command-independent fallbacks; a job field always wins over these.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Defaults {
    /// Width multiplier override; absent means the per-family calibration.
    pub c: Option<f64>,
    pub cull_tol: Option<f64>,
    pub t_samples: Option<usize>,
    pub x_samples: Option<usize>,
    pub term_cap: Option<usize>,
    /// Smoothness orders reported by build jobs (default [0, 1, 2]).
    pub hs_orders: Option<Vec<u32>>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Job {
    pub name: String,
    pub kind: JobKind,
    /// Required jobs gate the exit code on inconclusive verdicts.
    #[serde(default)]
    pub required: bool,
    pub family: Family,
    pub n: usize,
    pub m: Option<u32>,
    pub seed: Option<u64>,
    pub c: Option<f64>,
    pub direction: Option<Vec<f64>>,
    pub term_cap: Option<usize>,

    // Build jobs.
    pub r: Option<f64>,
    pub hs_orders: Option<Vec<u32>>,
    #[serde(default)]
    pub write_terms: bool,

    // Scan jobs.
    pub resolutions: Option<Vec<f64>>,
    pub p: Option<Exponent>,
    pub q: Option<Exponent>,
    pub alpha: Option<f64>,
    pub s: Option<u32>,
    /// Window policy: "late-focus" or "early-spread" (default per family).
    pub region: Option<String>,
    pub t_samples: Option<usize>,
    pub x_samples: Option<usize>,
    pub cull_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Build,
    Scan,
}

impl JobKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JobKind::Build => "build",
            JobKind::Scan => "scan",
        }
    }
}

/// Lebesgue exponent in TOML: a number, or the string "inf".
#[derive(Debug, Clone, Copy)]
pub struct Exponent(pub f64);

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Text(s) if s == "inf" => Ok(Exponent(f64::INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

pub fn load(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    // toml reports line and column; semantic checks below name job and field.
    let cfg: RunConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        bail!(
            "schema-version {} is unsupported (this build reads {SCHEMA_VERSION})",
            cfg.schema_version
        );
    }
    let mut seen = BTreeSet::new();
    for job in &cfg.jobs {
        if job.name.is_empty() {
            bail!("job names must be nonempty");
        }
        if !seen.insert(job.name.as_str()) {
            bail!("duplicate job name \"{}\"", job.name);
        }
        match job.kind {
            JobKind::Build => {
                if job.r.is_none() {
                    bail!("job \"{}\": build jobs need field `r`", job.name);
                }
            }
            JobKind::Scan => {
                if job.resolutions.as_deref().is_none_or(<[f64]>::is_empty) {
                    bail!(
                        "job \"{}\": scan jobs need a nonempty `resolutions` list",
                        job.name
                    );
                }
                if job.p.is_none() || job.q.is_none() {
                    bail!("job \"{}\": scan jobs need fields `p` and `q`", job.name);
                }
            }
        }
    }
    Ok(cfg)
}

/// Jobs of one kind, or the single named job (which must be of that kind).
pub fn select<'a>(cfg: &'a RunConfig, kind: JobKind, name: Option<&str>) -> Result<Vec<&'a Job>> {
    match name {
        Some(wanted) => {
            let job = cfg.jobs.iter().find(|j| j.name == wanted).ok_or_else(|| {
                let known: Vec<&str> = cfg.jobs.iter().map(|j| j.name.as_str()).collect();
                anyhow::anyhow!("unknown job \"{wanted}\" (config has: {})", known.join(", "))
            })?;
            if job.kind != kind {
                bail!("job \"{wanted}\" is a {} job, not {}", job.kind.as_str(), kind.as_str());
            }
            Ok(vec![job])
        }
        None => Ok(cfg.jobs.iter().filter(|j| j.kind == kind).collect()),
    }
}

/// Family parameters for one job at scale `r`, defaults layered in, core
/// validation applied so range errors surface with their field names.
pub fn family_spec(
    cfg: &RunConfig,
    job: &Job,
    r: f64,
    seed_override: Option<u64>,
) -> Result<FamilySpec> {
    let mut spec = FamilySpec::new(job.family, job.n, r);
    if let Some(c) = job.c.or(cfg.defaults.c) {
        spec.c = c;
    }
    if let Some(m) = job.m {
        spec = spec.with_m(m);
    }
    if let Some(cap) = job.term_cap.or(cfg.defaults.term_cap) {
        spec.term_cap = cap;
    }
    spec = spec.with_seed(seed_override.or(job.seed).unwrap_or(0));
    if let Some(dir) = &job.direction {
        spec.direction = Some(dir.clone());
    }
    spec.validate().with_context(|| format!("job \"{}\"", job.name))?;
    Ok(spec)
}

pub fn scan_spec(cfg: &RunConfig, job: &Job, seed_override: Option<u64>) -> Result<ScanSpec> {
    let rs = job.resolutions.clone().expect("validated in load");
    let family = family_spec(cfg, job, rs[0], seed_override)?;
    let (p, q) = (job.p.expect("validated").0, job.q.expect("validated").0);
    let mut spec = ScanSpec::new(family, rs, p, q);
    if let Some(alpha) = job.alpha {
        spec.alpha = alpha;
    }
    if let Some(s) = job.s {
        spec.s = s;
    }
    if let Some(region) = &job.region {
        spec.region = match region.as_str() {
            "late-focus" => RegionPolicy::LateFocus,
            "early-spread" => RegionPolicy::EarlySpread,
            other => bail!(
                "job \"{}\": unknown region \"{other}\" (expected \"late-focus\" or \"early-spread\")",
                job.name
            ),
        };
    }
    if let Some(v) = job.t_samples.or(cfg.defaults.t_samples) {
        spec.t_samples = v;
    }
    if let Some(v) = job.x_samples.or(cfg.defaults.x_samples) {
        spec.x_samples = v;
    }
    if let Some(v) = job.cull_tol.or(cfg.defaults.cull_tol) {
        spec.cull_tol = v;
    }
    Ok(spec)
}
