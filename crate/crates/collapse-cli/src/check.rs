//! `check`: built-in fixtures comparing independent computation routes.
//! Each check reports the bounded residual plus the two disagreeing values
//! at the worst probe. `--inject-fault` corrupts the path under test (never
//! the reference) so the suite's ability to fail is itself testable.

use std::path::Path;

use anyhow::Result;
use num_complex::Complex64;
use serde::Serialize;

use collapse_core::{
    build_family, eval_diagonal, evolve_eval, fit_log_slope, gram_l2_norm,
    grid_l2_norm, hs_norm, hs_norm_exact, inner_product, quad_inner_product, sample_term,
    spectral_evolve, BlockSign, BlockSignature, DiagonalEvaluator, Family, FamilySpec,
    GaussianTerm, GridSpec, QuadratureSpec, WavepacketSum,
};

use crate::config::SCHEMA_VERSION;
use crate::output;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Evolve the closed form with every block sign forced positive.
    BranchSign,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct CheckRecord {
    name: &'static str,
    /// Path under test, evaluated at the most-disagreeing probe.
    lhs: f64,
    /// Independent reference at the same probe.
    rhs: f64,
    /// The bounded quantity (relative unless noted in the name).
    residual: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct CheckReport {
    schema_version: u32,
    fault: Option<&'static str>,
    total: usize,
    passed: usize,
    checks: Vec<CheckRecord>,
}

type CheckFn = fn(Option<Fault>) -> Result<CheckRecord>;

const CHECKS: &[(&str, CheckFn)] = &[
    ("evolution-oracle-pair-plus", oracle_pair_plus),
    ("evolution-oracle-pair-mixed", oracle_pair_mixed),
    ("evolution-oracle-triple", oracle_triple),
    ("inner-product-quadrature", inner_product_quadrature),
    ("plancherel-closed-form", plancherel_closed_form),
    ("plancherel-quadrature", plancherel_quadrature),
    ("unitarity-spectral", unitarity_spectral),
    ("time-zero-identity", time_zero_identity),
    ("hermitian-diagonal", hermitian_diagonal),
    ("culling", culling),
    ("slope-fit", slope_fit),
    ("determinism-rebuild", determinism_rebuild),
];

pub fn run(only: Option<&str>, fault: Option<Fault>, out: &Path) -> Result<bool> {
    let selected: Vec<&(&str, CheckFn)> = CHECKS
        .iter()
        .filter(|(name, _)| only.is_none_or(|f| name.contains(f)))
        .collect();
    if selected.is_empty() {
        eprintln!("warning: 0 checks selected");
    }
    let mut checks = Vec::with_capacity(selected.len());
    for &&(name, f) in &selected {
        let record = f(fault)?;
        if record.pass {
            println!(
                "check {name}: pass (residual {:.3e}, tol {:.1e})",
                record.residual, record.tol
            );
        } else {
            println!(
                "check {name}: FAIL (residual {:.3e}, tol {:.1e}; under test {:.6e} vs reference {:.6e})",
                record.residual, record.tol, record.lhs, record.rhs
            );
        }
        checks.push(record);
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        fault: fault.map(|Fault::BranchSign| "branch-sign"),
        total: checks.len(),
        passed,
        checks,
    };
    let ok = passed == report.total;
    println!("checks: {passed}/{} passed", report.total);
    let json = serde_json::to_string_pretty(&report)? + "\n";
    output::write_atomic(&out.join("check.report.json"), json.as_bytes())?;
    Ok(ok)
}

/// Deterministic draws for probe placement.
struct Rng(u64);

impl Rng {
    fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }
}

fn reference_family(family: Family) -> Result<WavepacketSum> {
    let mut spec = FamilySpec::new(family, 1, 8.0);
    spec.c = 4.0;
    Ok(build_family(&spec)?)
}

fn all_plus(sig: &BlockSignature) -> BlockSignature {
    let blocks = sig.blocks().iter().map(|&(n, _)| (n, BlockSign::Plus)).collect();
    BlockSignature::new(blocks).expect("same block layout")
}

/// Closed-form evolution against the spectral propagator on one grid.
/// Residual: max pointwise difference over the peak reference magnitude.
fn oracle_fixture(
    name: &'static str,
    family: Family,
    grid: &GridSpec,
    fault: Option<Fault>,
) -> Result<CheckRecord> {
    let sum = reference_family(family)?;
    let term = &sum.terms()[0];
    let truth = sum.signature();
    let tested = match fault {
        Some(Fault::BranchSign) => all_plus(truth),
        None => truth.clone(),
    };
    let t = 4.0;
    let samples = sample_term(term, grid)?;
    let reference = spectral_evolve(&samples, truth, t, grid)?;
    let mut point = vec![0.0f64; grid.dim()];
    let mut peak = 0.0f64;
    let (mut worst, mut lhs, mut rhs) = (0.0f64, 0.0f64, 0.0f64);
    for (idx, r) in reference.iter().enumerate() {
        grid.node(idx, &mut point);
        let c = evolve_eval(term, &tested, t, &point)?;
        peak = peak.max(r.norm());
        let diff = (c - r).norm();
        if diff > worst {
            (worst, lhs, rhs) = (diff, c.norm(), r.norm());
        }
    }
    let residual = worst / peak;
    let tol = 1e-6;
    Ok(CheckRecord { name, lhs, rhs, residual, tol, pass: residual <= tol })
}

fn oracle_pair_plus(fault: Option<Fault>) -> Result<CheckRecord> {
    let grid = GridSpec::new(56.0, 256, 2)?;
    oracle_fixture("evolution-oracle-pair-plus", Family::LambdaP, &grid, fault)
}

fn oracle_pair_mixed(fault: Option<Fault>) -> Result<CheckRecord> {
    let grid = GridSpec::new(56.0, 256, 2)?;
    oracle_fixture("evolution-oracle-pair-mixed", Family::GammaP, &grid, fault)
}

fn oracle_triple(fault: Option<Fault>) -> Result<CheckRecord> {
    let grid = GridSpec::new(56.0, 128, 3)?;
    oracle_fixture("evolution-oracle-triple", Family::GP, &grid, fault)
}

/// Closed-form pair integral against grid quadrature.
fn inner_product_quadrature(_fault: Option<Fault>) -> Result<CheckRecord> {
    let w = 6.0;
    let a = GaussianTerm::new(Complex64::new(0.9, -0.5), vec![1.2, -0.8], vec![0.9, -1.1], w)?;
    let b = GaussianTerm::new(Complex64::new(-0.4, 0.7), vec![0.1, 0.9], vec![1.3, -0.6], w)?;
    let grid = GridSpec::new(24.0, 256, 2)?;
    let closed = inner_product(&a, &b)?;
    let quad = quad_inner_product(&a, &b, &grid)?;
    let residual = (closed - quad).norm() / closed.norm();
    let tol = 1e-8;
    Ok(CheckRecord {
        name: "inner-product-quadrature",
        lhs: closed.norm(),
        rhs: quad.norm(),
        residual,
        tol,
        pass: residual <= tol,
    })
}

/// Position-side Gram norm against the frequency-side closed form at s = 0.
fn plancherel_closed_form(_fault: Option<Fault>) -> Result<CheckRecord> {
    let sum = build_family(&FamilySpec::new(Family::LambdaP, 1, 64.0))?;
    let lhs = hs_norm_exact(&sum, 0)?;
    let rhs = gram_l2_norm(&sum);
    let residual = (lhs - rhs).abs() / rhs;
    let tol = 1e-6;
    Ok(CheckRecord { name: "plancherel-closed-form", lhs, rhs, residual, tol, pass: residual <= tol })
}

/// Position-side Gram norm against frequency-side tensor quadrature.
fn plancherel_quadrature(_fault: Option<Fault>) -> Result<CheckRecord> {
    let sum = build_family(&FamilySpec::new(Family::LambdaP, 1, 16.0))?;
    let lhs = hs_norm(&sum, 0.0, &QuadratureSpec::default())?;
    let rhs = gram_l2_norm(&sum);
    let residual = (lhs - rhs).abs() / rhs;
    let tol = 1e-6;
    Ok(CheckRecord { name: "plancherel-quadrature", lhs, rhs, residual, tol, pass: residual <= tol })
}

/// The spectral propagator preserves the grid L2 norm.
fn unitarity_spectral(_fault: Option<Fault>) -> Result<CheckRecord> {
    let grid = GridSpec::new(40.0, 128, 2)?;
    let term =
        GaussianTerm::new(Complex64::new(0.8, -0.4), vec![1.0, -2.0], vec![0.7, 0.3], 5.0)?;
    let samples = sample_term(&term, &grid)?;
    let rhs = grid_l2_norm(&samples, &grid);
    let out = spectral_evolve(&samples, &BlockSignature::pair_mixed(1), 3.0, &grid)?;
    let lhs = grid_l2_norm(&out, &grid);
    let residual = (lhs - rhs).abs() / rhs;
    let tol = 1e-6;
    Ok(CheckRecord { name: "unitarity-spectral", lhs, rhs, residual, tol, pass: residual <= tol })
}

/// Evolution at t = 0 reproduces the initial datum pointwise.
fn time_zero_identity(_fault: Option<Fault>) -> Result<CheckRecord> {
    let sum = reference_family(Family::GammaP)?;
    let term = &sum.terms()[0];
    let mut rng = Rng(0x5eed_0001);
    let (mut worst, mut lhs, mut rhs) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..64 {
        let point: Vec<f64> = (0..2).map(|_| 8.0 * rng.symmetric()).collect();
        let evolved = evolve_eval(term, sum.signature(), 0.0, &point)?;
        let initial = term.value_at(&point)?;
        let rel = (evolved - initial).norm() / initial.norm().max(1e-300);
        if rel > worst {
            (worst, lhs, rhs) = (rel, evolved.norm(), initial.norm());
        }
    }
    let tol = 1e-12;
    Ok(CheckRecord { name: "time-zero-identity", lhs, rhs, residual: worst, tol, pass: worst <= tol })
}

/// Kernels equal to their conjugate transpose keep a real diagonal under
/// the mixed-sign evolution; terms are drawn in adjoint pairs.
fn hermitian_diagonal(_fault: Option<Fault>) -> Result<CheckRecord> {
    let mut rng = Rng(0x5eed_0002);
    let w = 3.0;
    let mut terms = Vec::new();
    for _ in 0..3 {
        let amp = Complex64::new(rng.symmetric(), rng.symmetric());
        let (a, b) = (rng.symmetric(), rng.symmetric());
        let (mu, nu) = (1.5 * rng.symmetric(), 1.5 * rng.symmetric());
        terms.push(GaussianTerm::new(amp, vec![a, b], vec![mu, nu], w)?);
        terms.push(GaussianTerm::new(amp.conj(), vec![b, a], vec![-nu, -mu], w)?);
    }
    let sum = WavepacketSum::new(BlockSignature::pair_mixed(1), terms)?;
    let (mut worst, mut lhs, mut rhs) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let t = 2.0 * rng.uniform();
        let x = 2.0 * rng.symmetric();
        let v = eval_diagonal(&sum, t, &[x], 1e-12)?;
        if v.norm() < 1e-2 {
            continue;
        }
        let rel = v.im.abs() / v.norm();
        if rel > worst {
            (worst, lhs, rhs) = (rel, v.im, 0.0);
        }
    }
    let tol = 1e-10;
    Ok(CheckRecord { name: "hermitian-diagonal", lhs, rhs, residual: worst, tol, pass: worst <= tol })
}

/// Culled diagonal evaluation against the full summation.
fn culling(_fault: Option<Fault>) -> Result<CheckRecord> {
    let sum = build_family(&FamilySpec::new(Family::LambdaQ, 1, 64.0).with_m(1))?;
    let t = 0.5;
    let culled = DiagonalEvaluator::new(&sum, t, 1e-8)?;
    let full = DiagonalEvaluator::unculled(&sum, t)?;
    let mut rng = Rng(0x5eed_0003);
    let mut probes = Vec::with_capacity(100);
    let mut peak = 0.0f64;
    for _ in 0..100 {
        let x = 63.0 * rng.symmetric();
        let a = culled.eval(&[x])?;
        let b = full.eval(&[x])?;
        peak = peak.max(b.norm());
        probes.push((a, b));
    }
    let (mut worst, mut lhs, mut rhs) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in probes {
        let rel = (a - b).norm() / peak;
        if rel > worst {
            (worst, lhs, rhs) = (rel, a.norm(), b.norm());
        }
    }
    let tol = 1e-8;
    Ok(CheckRecord { name: "culling", lhs, rhs, residual: worst, tol, pass: worst <= tol })
}

/// The log-log fit recovers synthetic power laws exactly.
fn slope_fit(_fault: Option<Fault>) -> Result<CheckRecord> {
    let rs = [16.0, 32.0, 64.0, 128.0, 256.0];
    let sigma = 0.75;
    let vals: Vec<f64> = rs.iter().map(|r: &f64| 1.7 * r.powf(sigma)).collect();
    let fit = fit_log_slope(&rs, &vals)?;
    let residual = (fit.slope - sigma).abs().max(fit.stderr);
    let tol = 1e-10;
    Ok(CheckRecord {
        name: "slope-fit",
        lhs: fit.slope,
        rhs: sigma,
        residual,
        tol,
        pass: residual <= tol,
    })
}

/// Rebuilding any family yields bit-identical terms; the residual is the
/// number of differing words.
fn determinism_rebuild(_fault: Option<Fault>) -> Result<CheckRecord> {
    let mut differing = 0usize;
    let mut total = 0usize;
    for family in Family::ALL {
        let mut spec = FamilySpec::new(family, 1, 64.0).with_seed(11);
        if family.is_q() {
            spec = spec.with_m(1);
        }
        let a = term_bits(&build_family(&spec)?);
        let b = term_bits(&build_family(&spec)?);
        total += a.len();
        differing += a.iter().zip(&b).filter(|(x, y)| x != y).count();
        differing += a.len().abs_diff(b.len());
    }
    Ok(CheckRecord {
        name: "determinism-rebuild",
        lhs: differing as f64,
        rhs: 0.0,
        residual: differing as f64,
        tol: 0.0,
        pass: differing == 0 && total > 0,
    })
}

fn term_bits(sum: &WavepacketSum) -> Vec<u64> {
    let mut out = Vec::new();
    for t in sum.terms() {
        out.push(t.amplitude().re.to_bits());
        out.push(t.amplitude().im.to_bits());
        out.extend(t.center().iter().map(|v| v.to_bits()));
        out.extend(t.modulation().iter().map(|v| v.to_bits()));
        out.push(t.width().to_bits());
    }
    out
}
