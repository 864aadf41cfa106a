//! Closed-form evolution of a Gaussian term under a multi-block flow
//! exp(i t Σ_j s_j Δ_j / 2), and its restriction to the diagonal.

use num_complex::Complex64;

use crate::cgauss::ComplexGaussian;
use crate::error::{Error, Result};
use crate::packet::GaussianTerm;
use crate::signature::BlockSignature;

/// Value of the evolved term at (t, point):
///
///   amplitude · e^{-i t Q(μ)/2} · e^{i point·μ}
///     · Π_j (1 + s_j i t / w)^{-n_j/2}
///     · Π_j exp(-|point_j - c_j - s_j t μ_j|² / (2 (w + s_j i t)))
///
/// with Q(μ) = Σ_j s_j |μ_j|². Each power uses the principal branch; the
/// base 1 + s_j i t / w has real part 1, so it never crosses the negative
/// real axis and the value is continuous in t.
pub fn evolve_eval(
    term: &GaussianTerm,
    sig: &BlockSignature,
    t: f64,
    point: &[f64],
) -> Result<Complex64> {
    let d = sig.ambient_dim();
    if term.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "evolve_eval (term vs signature)",
            expected: d,
            got: term.dim(),
        });
    }
    if point.len() != d {
        return Err(Error::DimensionMismatch {
            context: "evolve_eval (point vs signature)",
            expected: d,
            got: point.len(),
        });
    }
    if !t.is_finite() {
        return Err(Error::contract(format!("time must be finite, got {t}")));
    }
    // t = 0: every evolution factor is identically 1.
    if t == 0.0 {
        return term.value_at(point);
    }

    let w = term.width();
    let mu = term.modulation();
    let c = term.center();
    let q = sig.signed_quadratic(mu)?;
    let phase: f64 = point.iter().zip(mu).map(|(p, m)| p * m).sum();

    let mut exponent = Complex64::new(0.0, phase - 0.5 * t * q);
    let mut prefactor = Complex64::ONE;
    let mut off = 0;
    for &(nj, sign) in sig.blocks() {
        let st = sign.as_f64() * t;
        prefactor *= Complex64::new(1.0, st / w).powf(-(nj as f64) / 2.0);
        let mut dist2 = 0.0;
        for k in off..off + nj {
            let dk = point[k] - c[k] - st * mu[k];
            dist2 += dk * dk;
        }
        exponent += Complex64::new(-0.5 * dist2, 0.0) * Complex64::new(w, st).finv();
        off += nj;
    }
    Ok(term.amplitude() * prefactor * exponent.exp())
}

/// The evolved term restricted to the diagonal (x, x, …, x), x ∈ R^n, as a
/// complex Gaussian in n variables. With α_j = 1/(w + s_j i t) and drifted
/// centers d_j = c_j + s_j t μ_j:
///
///   α = Σ_j α_j,
///   β = i Σ_j μ_j + Σ_j α_j d_j,
///   log γ = Ln(amplitude) - i t Q(μ)/2
///           - Σ_j (n/2) Ln(1 + s_j i t / w) - Σ_j α_j |d_j|²/2.
///
/// Requires all blocks to share one dimension n. Re α = Σ_j w/(w² + t²) > 0
/// always, so the result is a valid complex Gaussian.
pub fn diagonal_restrict(
    term: &GaussianTerm,
    sig: &BlockSignature,
    t: f64,
) -> Result<ComplexGaussian> {
    let d = sig.ambient_dim();
    if term.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "diagonal_restrict (term vs signature)",
            expected: d,
            got: term.dim(),
        });
    }
    if !t.is_finite() {
        return Err(Error::contract(format!("time must be finite, got {t}")));
    }
    let n = sig.uniform_block_dim()?;
    let w = term.width();
    let mu = term.modulation();
    let c = term.center();
    let q = sig.signed_quadratic(mu)?;

    let mut alpha = Complex64::ZERO;
    let mut beta = vec![Complex64::ZERO; n];
    let mut log_gamma = term.amplitude().ln() + Complex64::new(0.0, -0.5 * t * q);
    let mut off = 0;
    for &(nj, sign) in sig.blocks() {
        debug_assert_eq!(nj, n);
        let st = sign.as_f64() * t;
        let aj = Complex64::new(w, st).finv();
        alpha += aj;
        log_gamma += Complex64::new(1.0, st / w).ln() * (-(n as f64) / 2.0);
        let mut d2 = 0.0;
        for k in 0..n {
            let dk = c[off + k] + st * mu[off + k];
            beta[k] += Complex64::new(0.0, mu[off + k]) + aj * dk;
            d2 += dk * dk;
        }
        log_gamma -= aj * (0.5 * d2);
        off += nj;
    }
    ComplexGaussian::new(log_gamma, alpha, beta)
}
