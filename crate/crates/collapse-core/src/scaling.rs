//! Scale sweeps: build a family at a ladder of scales R, compare the
//! space-time mixed norm against the H^s mass of the initial data, and
//! classify the log-log slope of the ratio.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{Family, FamilySpec, build_family};
use crate::mixed::mixed_norm;
use crate::region::{FracDerivSpec, MixedNormSpec, RegionSpec};
use crate::sobolev::hs_norm_exact;

/// Confidence half-width for verdicts, in standard errors.
const VERDICT_Z: f64 = 2.0;

/// Fitted slopes confidently below this count as bounded growth.
const FLAT_SLOPE: f64 = 0.05;

/// How the space-time window is chosen at each scale of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionPolicy {
    /// Focusing window: t near R, a fixed O(1) box around the origin.
    LateFocus,
    /// Spreading window: t in [0, 1], a box filling the ball of radius R^m.
    EarlySpread,
    /// One fixed region reused at every scale.
    Custom(RegionSpec),
}

impl RegionPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            RegionPolicy::LateFocus => "late-focus",
            RegionPolicy::EarlySpread => "early-spread",
            RegionPolicy::Custom(_) => "custom",
        }
    }

    /// Concrete region for scale `r`. `n` is the block dimension, `m` the
    /// ball exponent (needed by the spreading window only).
    pub fn build(
        &self,
        r: f64,
        n: usize,
        m: Option<u32>,
        t_samples: usize,
        x_samples: usize,
    ) -> Result<RegionSpec> {
        match self {
            RegionPolicy::LateFocus => RegionSpec::late_focus(r, n, t_samples, x_samples),
            RegionPolicy::EarlySpread => {
                let m = m.ok_or_else(|| {
                    Error::config("m", "the spreading window needs the ball exponent m")
                })?;
                RegionSpec::early_spread(r, n, m, t_samples, x_samples)
            }
            RegionPolicy::Custom(region) => {
                region.validate()?;
                Ok(region.clone())
            }
        }
    }
}

fn default_t_samples() -> usize {
    12
}

fn default_x_samples() -> usize {
    8
}

fn default_cull_tol() -> f64 {
    1e-8
}

/// Recipe for one sweep. The `family.r` field is a placeholder; each entry
/// of `r_list` replaces it in turn.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanSpec {
    pub family: FamilySpec,
    pub r_list: Vec<f64>,
    /// Outer (time) exponent; `f64::INFINITY` takes the sup in t.
    #[serde(with = "extended_float")]
    pub p: f64,
    /// Inner (space) exponent; `f64::INFINITY` takes the sup in x.
    #[serde(with = "extended_float")]
    pub q: f64,
    /// Order of the |∇|^α multiplier applied before the space norm.
    #[serde(default)]
    pub alpha: f64,
    /// Smoothness of the reference norm on the right-hand side.
    #[serde(default)]
    pub s: u32,
    pub region: RegionPolicy,
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    #[serde(default = "default_x_samples")]
    pub x_samples: usize,
    #[serde(default = "default_cull_tol")]
    pub cull_tol: f64,
}

impl ScanSpec {
    /// Sweep with the default window for the family (focusing for
    /// p-families, spreading for q-families), alpha = 0, s = 0.
    pub fn new(family: FamilySpec, r_list: Vec<f64>, p: f64, q: f64) -> Self {
        let region = if family.family.is_q() {
            RegionPolicy::EarlySpread
        } else {
            RegionPolicy::LateFocus
        };
        ScanSpec {
            family,
            r_list,
            p,
            q,
            alpha: 0.0,
            s: 0,
            region,
            t_samples: default_t_samples(),
            x_samples: default_x_samples(),
            cull_tol: default_cull_tol(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_s(mut self, s: u32) -> Self {
        self.s = s;
        self
    }

    pub fn with_region(mut self, region: RegionPolicy) -> Self {
        self.region = region;
        self
    }

    pub fn with_samples(mut self, t_samples: usize, x_samples: usize) -> Self {
        self.t_samples = t_samples;
        self.x_samples = x_samples;
        self
    }
}

/// One scale of a sweep: both sides of the would-be estimate and their
/// ratio, with per-side convergence flags.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanRecord {
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub lhs_converged: bool,
    pub rhs_converged: bool,
}

/// Least-squares line through (ln R, ln value).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate.
    pub stderr: f64,
    pub points: usize,
}

/// What the fitted slope says about the would-be estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Ratio grows with R beyond doubt: the estimate cannot hold.
    BlowUpConsistent,
    /// Ratio is flat or decays: nothing here contradicts the estimate.
    BoundedConsistent,
    /// Not converged, or the confidence band straddles flatness.
    Inconclusive,
}

impl Verdict {
    /// Classification rule: unconverged data is never conclusive; a slope
    /// more than two standard errors above zero means growth; one
    /// confidently below FLAT_SLOPE means bounded; anything else is open.
    pub fn from_fit(fit: &SlopeFit, all_converged: bool) -> Verdict {
        if !all_converged {
            return Verdict::Inconclusive;
        }
        if fit.slope - VERDICT_Z * fit.stderr > 0.0 {
            Verdict::BlowUpConsistent
        } else if fit.slope + VERDICT_Z * fit.stderr < FLAT_SLOPE {
            Verdict::BoundedConsistent
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BlowUpConsistent => "blow-up-consistent",
            Verdict::BoundedConsistent => "bounded-consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Full result of one sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScalingReport {
    pub family: Family,
    pub n: usize,
    pub m: Option<u32>,
    #[serde(with = "extended_float")]
    pub p: f64,
    #[serde(with = "extended_float")]
    pub q: f64,
    pub alpha: f64,
    pub s: u32,
    /// Window policy label ("late-focus", "early-spread", "custom").
    pub region: String,
    pub t_samples: usize,
    pub x_samples: usize,
    pub records: Vec<ScanRecord>,
    pub fitted: SlopeFit,
    pub predicted_slope: f64,
    pub verdict: Verdict,
    pub all_converged: bool,
}

/// Ordinary least squares on (ln r, ln value). Needs at least three
/// strictly positive points; `stderr` is the textbook slope standard
/// error sqrt(RSS / (N-2) / Sxx).
pub fn fit_log_slope(rs: &[f64], values: &[f64]) -> Result<SlopeFit> {
    if rs.len() != values.len() {
        return Err(Error::DimensionMismatch {
            context: "fit_log_slope",
            expected: rs.len(),
            got: values.len(),
        });
    }
    let n = rs.len();
    if n < 3 {
        return Err(Error::contract(format!(
            "slope fit needs at least 3 points, got {n}"
        )));
    }
    for (&r, &v) in rs.iter().zip(values) {
        if !(r > 0.0) || !r.is_finite() || !(v > 0.0) || !v.is_finite() {
            return Err(Error::contract(format!(
                "slope fit needs finite positive data, got ({r}, {v})"
            )));
        }
    }
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx <= 0.0 {
        return Err(Error::contract("slope fit needs at least two distinct scales"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let stderr = (rss / (n - 2) as f64 / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

/// Slope the ratio must exhibit if the family saturates its bound:
/// p-stressing families scale like R^{1/(2p) - 1/4} regardless of block
/// count; q-stressing families like R^{mn/q - mn/2} times R^{-n/4} for
/// two blocks or R^{-n/2} for three.
pub fn predicted_slope(family: Family, n: usize, m: Option<u32>, p: f64, q: f64) -> Result<f64> {
    let nf = n as f64;
    match family {
        Family::LambdaP | Family::GammaP | Family::GP => Ok(0.5 / p - 0.25),
        Family::LambdaQ | Family::GammaQ | Family::GQ => {
            let m = m.ok_or_else(|| {
                Error::config("m", "q-family slope prediction needs the ball exponent m")
            })? as f64;
            let base = m * nf / q - m * nf / 2.0;
            let defect = if family == Family::GQ { nf / 2.0 } else { nf / 4.0 };
            Ok(base - defect)
        }
    }
}

/// Runs the sweep: builds the family at every scale, evaluates both sides,
/// fits the ratio slope, and classifies it.
pub fn run_scan(spec: &ScanSpec) -> Result<ScalingReport> {
    if spec.r_list.len() < 3 {
        return Err(Error::config(
            "r-list",
            format!("need at least 3 scales for a fit, got {}", spec.r_list.len()),
        ));
    }
    if spec.r_list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config(
            "r-list",
            "scales must be strictly increasing",
        ));
    }
    let deriv = (spec.alpha > 0.0).then(|| FracDerivSpec::new(spec.alpha));
    let mut records = Vec::with_capacity(spec.r_list.len());
    for &r in &spec.r_list {
        let mut fam = spec.family.clone();
        fam.r = r;
        let sum = build_family(&fam)?;
        let region = spec
            .region
            .build(r, fam.n, fam.m, spec.t_samples, spec.x_samples)?;
        let mut mspec = MixedNormSpec::new(spec.p, spec.q, region)?;
        mspec.cull_tol = spec.cull_tol;
        mspec.validate()?;
        let lhs = mixed_norm(&sum, &mspec, deriv.as_ref())?;
        let rhs = hs_norm_exact(&sum, spec.s)?;
        if !(rhs > 0.0) || !rhs.is_finite() {
            return Err(Error::contract(format!(
                "reference norm must be finite and positive, got {rhs} at R = {r}"
            )));
        }
        records.push(ScanRecord {
            r,
            lhs: lhs.value,
            rhs,
            ratio: lhs.value / rhs,
            lhs_converged: lhs.convergence.converged,
            rhs_converged: true,
        });
    }
    let rs: Vec<f64> = records.iter().map(|rec| rec.r).collect();
    let ratios: Vec<f64> = records.iter().map(|rec| rec.ratio).collect();
    let fitted = fit_log_slope(&rs, &ratios)?;
    let predicted = predicted_slope(spec.family.family, spec.family.n, spec.family.m, spec.p, spec.q)?;
    let all_converged = records
        .iter()
        .all(|rec| rec.lhs_converged && rec.rhs_converged);
    let verdict = Verdict::from_fit(&fitted, all_converged);
    Ok(ScalingReport {
        family: spec.family.family,
        n: spec.family.n,
        m: spec.family.m,
        p: spec.p,
        q: spec.q,
        alpha: spec.alpha,
        s: spec.s,
        region: spec.region.label().to_string(),
        t_samples: spec.t_samples,
        x_samples: spec.x_samples,
        records,
        fitted,
        predicted_slope: predicted,
        verdict,
        all_converged,
    })
}

/// One line of the cross-sweep verdict matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SummaryRow {
    pub family: Family,
    pub n: usize,
    pub m: Option<u32>,
    #[serde(with = "extended_float")]
    pub p: f64,
    #[serde(with = "extended_float")]
    pub q: f64,
    pub alpha: f64,
    pub s: u32,
    pub fitted_slope: f64,
    pub stderr: f64,
    pub predicted_slope: f64,
    pub verdict: Verdict,
}

/// Overall outcome of a batch of sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    /// Every sub-(2,2) sweep shows growth; nothing is open.
    Pass,
    /// No contradiction, but at least one sweep is inconclusive.
    Partial,
    /// Some sweep with p < 2 or q < 2 looks bounded.
    Fail,
}

impl SuiteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteStatus::Pass => "pass",
            SuiteStatus::Partial => "partial",
            SuiteStatus::Fail => "fail",
        }
    }
}

impl fmt::Display for SuiteStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerdictSummary {
    pub rows: Vec<SummaryRow>,
    pub status: SuiteStatus,
    pub conclusion: String,
}

/// Folds sweep reports into a verdict matrix. An exponent pair is
/// sub-critical when p < 2 or q < 2; a bounded verdict there contradicts
/// the expected growth and fails the suite.
pub fn verdict_summary(reports: &[ScalingReport]) -> Result<VerdictSummary> {
    if reports.is_empty() {
        return Err(Error::contract("verdict summary needs at least one report"));
    }
    let mut rows = Vec::with_capacity(reports.len());
    let mut any_sub_bounded = false;
    let mut any_inconclusive = false;
    for rep in reports {
        let sub_critical = rep.p < 2.0 || rep.q < 2.0;
        match rep.verdict {
            Verdict::BoundedConsistent if sub_critical => any_sub_bounded = true,
            Verdict::Inconclusive => any_inconclusive = true,
            _ => {}
        }
        rows.push(SummaryRow {
            family: rep.family,
            n: rep.n,
            m: rep.m,
            p: rep.p,
            q: rep.q,
            alpha: rep.alpha,
            s: rep.s,
            fitted_slope: rep.fitted.slope,
            stderr: rep.fitted.stderr,
            predicted_slope: rep.predicted_slope,
            verdict: rep.verdict,
        });
    }
    let (status, conclusion) = if any_sub_bounded {
        (
            SuiteStatus::Fail,
            "at least one sweep below the (2, 2) exponent pair looks bounded, \
             contradicting the expected growth"
                .to_string(),
        )
    } else if any_inconclusive {
        (
            SuiteStatus::Partial,
            "no bounded sub-(2, 2) sweep, but some verdicts are inconclusive".to_string(),
        )
    } else {
        (
            SuiteStatus::Pass,
            "every sweep with p < 2 or q < 2 is consistent with blow-up; \
             no such estimate can hold"
                .to_string(),
        )
    };
    Ok(VerdictSummary {
        rows,
        status,
        conclusion,
    })
}

/// Serialize/deserialize an exponent that may be infinite. JSON has no
/// infinity literal, so infinite values travel as the string "inf".
mod extended_float {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            ser.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            ser.serialize_f64(*v)
        }
    }

    struct ExtVisitor;

    impl Visitor<'_> for ExtVisitor {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or the string \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => other
                    .parse()
                    .map_err(|_| E::custom(format!("cannot parse {other:?} as an exponent"))),
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        de.deserialize_any(ExtVisitor)
    }
}
