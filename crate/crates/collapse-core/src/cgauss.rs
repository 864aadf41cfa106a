//! Complex Gaussians: the closed-form image of diagonal restriction and of
//! the Fourier transform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::GaussianTerm;

/// A function R^n → C of the form
///
///   g(x) = γ · exp(-(α/2)|x|² + β·x),   Re α > 0, β ∈ C^n,
///
/// stored with the prefactor as a complex logarithm. The log form matters:
/// built families put centers as far as R^m from the origin, where the
/// literal γ = exp(-Σ|c_j|²/(2w) + …) underflows to zero even though values
/// near the center are O(1). All evaluation combines exponents before
/// exponentiating once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexGaussian {
    log_gamma: Complex64,
    alpha: Complex64,
    beta: Vec<Complex64>,
}

impl ComplexGaussian {
    pub fn new(log_gamma: Complex64, alpha: Complex64, beta: Vec<Complex64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::contract("complex Gaussian dimension must be >= 1"));
        }
        if !(alpha.re > 0.0) {
            return Err(Error::contract(format!(
                "complex Gaussian needs Re(alpha) > 0, got {}",
                alpha.re
            )));
        }
        Ok(ComplexGaussian {
            log_gamma,
            alpha,
            beta,
        })
    }

    /// A wavepacket term viewed as a complex Gaussian:
    /// α = 1/w, β = c/w + iμ, log γ = Ln(amplitude) - |c|²/(2w).
    pub fn from_term(term: &GaussianTerm) -> Self {
        let w = term.width();
        let c2: f64 = term.center().iter().map(|c| c * c).sum();
        let beta = term
            .center()
            .iter()
            .zip(term.modulation())
            .map(|(&c, &m)| Complex64::new(c / w, m))
            .collect();
        ComplexGaussian {
            log_gamma: term.amplitude().ln() - Complex64::new(c2 / (2.0 * w), 0.0),
            alpha: Complex64::new(1.0 / w, 0.0),
            beta,
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn log_gamma(&self) -> Complex64 {
        self.log_gamma
    }

    /// The literal prefactor γ = exp(log γ). May underflow for far-flung
    /// centers; prefer `log_gamma` in computations.
    pub fn gamma(&self) -> Complex64 {
        self.log_gamma.exp()
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    /// g(x), evaluated with a single exponential.
    pub fn value_at(&self, x: &[f64]) -> Result<Complex64> {
        Ok(self.exponent_at(x)?.exp())
    }

    /// The combined exponent log γ - (α/2)|x|² + β·x.
    pub fn exponent_at(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "ComplexGaussian::value_at",
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut norm2 = 0.0;
        let mut bx = Complex64::ZERO;
        for (j, &xj) in x.iter().enumerate() {
            norm2 += xj * xj;
            bx += self.beta[j] * xj;
        }
        Ok(self.log_gamma - self.alpha * (0.5 * norm2) + bx)
    }

    /// sup_x |g(x)| = exp(Re log γ + |Re β|²/(2 Re α)).
    pub fn peak_magnitude(&self) -> f64 {
        let a = self.alpha.re;
        let b2: f64 = self.beta.iter().map(|b| b.re * b.re).sum();
        (self.log_gamma.re + b2 / (2.0 * a)).exp()
    }

    /// ‖g‖_{L²} in closed form:
    /// |γ|² (π/Re α)^{n/2} exp(|Re β|²/Re α), square-rooted.
    pub fn l2_norm(&self) -> f64 {
        let a = self.alpha.re;
        let b2: f64 = self.beta.iter().map(|b| b.re * b.re).sum();
        let n = self.dim() as f64;
        let log_sq =
            2.0 * self.log_gamma.re + 0.5 * n * (std::f64::consts::PI / a).ln() + b2 / a;
        (0.5 * log_sq).exp()
    }

    /// Forward transform ĝ(ω) = ∫ g(x) e^{-i x·ω} dx, again a complex
    /// Gaussian: α̂ = 1/α, β̂ = -iβ/α,
    /// log γ̂ = log γ + (n/2)(ln 2π - Ln α) + (β·β)/(2α),
    /// where β·β = Σ β_j² is the complex (bilinear) square.
    pub fn fourier_transform(&self) -> ComplexGaussian {
        let n = self.dim() as f64;
        let bb: Complex64 = self.beta.iter().map(|b| b * b).sum();
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        ComplexGaussian {
            log_gamma: self.log_gamma + (Complex64::new(ln_2pi, 0.0) - self.alpha.ln()) * (n / 2.0)
                + bb / (2.0 * self.alpha),
            alpha: self.alpha.finv(),
            beta: self
                .beta
                .iter()
                .map(|b| -Complex64::I * b / self.alpha)
                .collect(),
        }
    }

    /// Inverse transform ǧ(x) = (2π)^{-n} ∫ g(ω) e^{+i x·ω} dω:
    /// α' = 1/α, β' = +iβ/α,
    /// log γ' = log γ - (n/2)(ln 2π + Ln α) + (β·β)/(2α).
    pub fn inverse_fourier_transform(&self) -> ComplexGaussian {
        let n = self.dim() as f64;
        let bb: Complex64 = self.beta.iter().map(|b| b * b).sum();
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        ComplexGaussian {
            log_gamma: self.log_gamma - (Complex64::new(ln_2pi, 0.0) + self.alpha.ln()) * (n / 2.0)
                + bb / (2.0 * self.alpha),
            alpha: self.alpha.finv(),
            beta: self
                .beta
                .iter()
                .map(|b| Complex64::I * b / self.alpha)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(ComplexGaussian::new(C::ZERO, C::new(-1.0, 0.0), vec![C::ZERO]).is_err());
        assert!(ComplexGaussian::new(C::ZERO, C::new(0.0, 1.0), vec![C::ZERO]).is_err());
    }

    #[test]
    fn standard_gaussian_transform() {
        // g(x) = e^{-x²/2}  =>  ĝ(ω) = √(2π) e^{-ω²/2}.
        let g = ComplexGaussian::new(C::ZERO, C::ONE, vec![C::ZERO]).unwrap();
        let gh = g.fourier_transform();
        let v = gh.value_at(&[0.7]).unwrap();
        let want = (2.0 * std::f64::consts::PI).sqrt() * (-0.7f64 * 0.7 / 2.0).exp();
        assert!(close(v, C::new(want, 0.0), 1e-14));
    }

    #[test]
    fn modulation_shifts_the_transform() {
        // g(x) = e^{iμx} e^{-x²/2}  =>  |ĝ(ω)| peaks at ω = μ.
        let mu = 1.7;
        let g = ComplexGaussian::new(C::ZERO, C::ONE, vec![C::new(0.0, mu)]).unwrap();
        let gh = g.fourier_transform();
        let at = |w: f64| gh.value_at(&[w]).unwrap().norm();
        assert!(at(mu) > at(mu + 0.3));
        assert!(at(mu) > at(mu - 0.3));
        let want = (2.0 * std::f64::consts::PI).sqrt();
        assert!((at(mu) - want).abs() < 1e-12);
    }

    #[test]
    fn transform_matches_direct_quadrature() {
        // Oracle: Riemann sum of ∫ g(x) e^{-ixω} dx on a wide fine grid.
        let g = ComplexGaussian::new(
            C::new(0.2, -0.4),
            C::new(0.8, 0.3),
            vec![C::new(0.5, 1.2)],
        )
        .unwrap();
        let gh = g.fourier_transform();
        for omega in [0.0, 0.9, -1.8] {
            let (l, nn) = (30.0, 60_000);
            let h = 2.0 * l / nn as f64;
            let mut acc = C::ZERO;
            for i in 0..nn {
                let x = -l + (i as f64 + 0.5) * h;
                acc += g.value_at(&[x]).unwrap() * C::new(0.0, -x * omega).exp();
            }
            acc *= h;
            let want = gh.value_at(&[omega]).unwrap();
            assert!(close(acc, want, 1e-8), "omega={omega}: {acc} vs {want}");
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let g = ComplexGaussian::new(
            C::new(-0.3, 1.1),
            C::new(0.6, -0.2),
            vec![C::new(0.4, -0.9), C::new(-1.0, 0.25)],
        )
        .unwrap();
        let back = g.fourier_transform().inverse_fourier_transform();
        assert!((back.alpha() - g.alpha()).norm() < 1e-12);
        for j in 0..2 {
            assert!((back.beta()[j] - g.beta()[j]).norm() < 1e-12);
        }
        assert!((back.log_gamma() - g.log_gamma()).norm() < 1e-12);
        for x in [[0.0, 0.0], [1.0, -0.5], [-2.0, 0.7]] {
            let a = g.value_at(&x).unwrap();
            let b = back.value_at(&x).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn l2_norm_closed_form_matches_quadrature() {
        let g = ComplexGaussian::new(
            C::new(0.1, 0.2),
            C::new(0.5, 0.4),
            vec![C::new(0.3, -0.7)],
        )
        .unwrap();
        let (l, nn) = (40.0, 80_000);
        let h = 2.0 * l / nn as f64;
        let mut acc = 0.0;
        for i in 0..nn {
            let x = -l + (i as f64 + 0.5) * h;
            acc += g.value_at(&[x]).unwrap().norm_sqr();
        }
        let want = (acc * h).sqrt();
        assert!((g.l2_norm() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn log_prefactor_survives_far_centers() {
        // Center so far out that the literal prefactor underflows.
        let t = GaussianTerm::new(C::ONE, vec![70_000.0], vec![1.0], 2048.0).unwrap();
        let g = ComplexGaussian::from_term(&t);
        assert_eq!(g.gamma(), C::ZERO); // the literal γ underflows...
        let v = g.value_at(&[70_000.0]).unwrap(); // ...but values are fine
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}
