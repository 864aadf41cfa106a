//! Evaluation of the evolved sum's diagonal trace, plainly and under a
//! fractional derivative |∇|^α applied on the frequency side.

use num_complex::Complex64;

use crate::cgauss::ComplexGaussian;
use crate::error::{Error, Result};
use crate::evolve::diagonal_restrict;
use crate::packet::WavepacketSum;
use crate::quad::Rule1D;
use crate::reduce::tree_sum_fn_c;
use crate::region::FracDerivSpec;

/// Target phase advance per quadrature panel for oscillatory factors.
const PHASE_BUDGET: f64 = 5.0;
/// Panel width in units of the sharpest Gaussian envelope scale.
const ENVELOPE_PANEL: f64 = 1.2;
/// Nodes per Gauss-Legendre panel in the frequency quadrature.
const POINTS_PER_PANEL: usize = 16;
/// Hard cap on total frequency nodes.
const MAX_FREQ_NODES: u128 = 100_000_000;
/// Truncating the frequency box must lose at most this relative mass.
const FREQ_TAIL_BUDGET: f64 = 1e-10;

fn validate_cull_tol(cull_tol: f64) -> Result<()> {
    if !(cull_tol > 0.0 && cull_tol <= 1e-6) {
        return Err(Error::config(
            "cull_tol",
            format!("culling tolerance must lie in (0, 1e-6], got {cull_tol}"),
        ));
    }
    Ok(())
}

/// Evaluates Σ_k (evolved term k)(t, x, …, x) at one fixed time, with the
/// per-term diagonal Gaussians precomputed once.
///
/// Terms whose magnitude at x falls below cull_tol · S / count, where S is
/// the largest peak magnitude among the terms, are skipped; the absolute
/// error of a culled evaluation is at most cull_tol · S.
pub struct DiagonalEvaluator {
    gaussians: Vec<ComplexGaussian>,
    /// Re-exponent threshold below which a term is culled;
    /// -inf disables culling.
    log_threshold: f64,
    dim: usize,
}

impl DiagonalEvaluator {
    pub fn new(sum: &WavepacketSum, t: f64, cull_tol: f64) -> Result<Self> {
        validate_cull_tol(cull_tol)?;
        Self::build(sum, t, Some(cull_tol))
    }

    /// Full summation with no culling; the oracle against which culled
    /// evaluation is checked.
    pub fn unculled(sum: &WavepacketSum, t: f64) -> Result<Self> {
        Self::build(sum, t, None)
    }

    fn build(sum: &WavepacketSum, t: f64, cull_tol: Option<f64>) -> Result<Self> {
        let sig = sum.signature();
        let dim = sig.uniform_block_dim()?;
        let gaussians: Vec<ComplexGaussian> = sum
            .terms()
            .iter()
            .map(|term| diagonal_restrict(term, sig, t))
            .collect::<Result<_>>()?;
        let log_threshold = match cull_tol {
            None => f64::NEG_INFINITY,
            Some(tol) => {
                // log of the peak magnitude, computed in log form because
                // the literal peak can underflow for far-flung centers.
                let max_log_peak = gaussians
                    .iter()
                    .map(|g| {
                        let b2: f64 = g.beta().iter().map(|b| b.re * b.re).sum();
                        g.log_gamma().re + b2 / (2.0 * g.alpha().re)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                max_log_peak + tol.ln() - (gaussians.len() as f64).ln()
            }
        };
        Ok(DiagonalEvaluator {
            gaussians,
            log_threshold,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn term_count(&self) -> usize {
        self.gaussians.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "DiagonalEvaluator::eval",
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.eval_point(x))
    }

    pub(crate) fn eval_point(&self, x: &[f64]) -> Complex64 {
        tree_sum_fn_c(self.gaussians.len(), &|k| {
            let e = self.gaussians[k]
                .exponent_at(x)
                .expect("dims fixed at build");
            if e.re < self.log_threshold {
                Complex64::ZERO
            } else {
                e.exp()
            }
        })
    }
}

/// One-shot diagonal trace: Λ(t, x) = Σ_k (evolved term k)(t, x, …, x).
pub fn eval_diagonal(sum: &WavepacketSum, t: f64, x: &[f64], cull_tol: f64) -> Result<Complex64> {
    DiagonalEvaluator::new(sum, t, cull_tol)?.eval(x)
}

/// Evaluates |∇|^α of the diagonal trace at one fixed time:
///
///   (2π)^{-n} ∫ |ω|^α F̂_t(ω) e^{i x·ω} dω,
///
/// where F̂_t is the Fourier transform of the diagonal trace x ↦ Λ(t, x).
/// The transform of each diagonal Gaussian is again a Gaussian, so the
/// integrand is smooth and concentrated; it is integrated over a padded
/// box with composite Gauss-Legendre panels sized to both the envelope
/// scale and the phase rate of e^{i x·ω}.
pub(crate) struct FracDiagEvaluator {
    /// Flattened nodes, chunked by dimension.
    nodes: Vec<f64>,
    /// Per-node weight · |ω|^α · F̂_t(ω) · (2π)^{-n}.
    coeffs: Vec<Complex64>,
    dim: usize,
}

impl FracDiagEvaluator {
    /// `max_abs_x` bounds |x_j| over the points this evaluator will see;
    /// it sets the phase-resolution of the frequency rule.
    pub(crate) fn new(
        sum: &WavepacketSum,
        t: f64,
        spec: &FracDerivSpec,
        max_abs_x: &[f64],
    ) -> Result<Self> {
        spec.validate()?;
        let sig = sum.signature();
        let n = sig.uniform_block_dim()?;
        if max_abs_x.len() != n {
            return Err(Error::DimensionMismatch {
                context: "FracDiagEvaluator::new (max_abs_x)",
                expected: n,
                got: max_abs_x.len(),
            });
        }
        // Two tails per axis, each bounded by exp(-pad²/2) relative to the
        // term's own mass.
        let pad = spec.freq_box_padding;
        let tail = 2.0 * n as f64 * (-0.5 * pad * pad).exp();
        if tail > FREQ_TAIL_BUDGET {
            return Err(Error::config(
                "freq_box_padding",
                format!(
                    "padding {pad} leaves relative tail {tail:.2e} above the {FREQ_TAIL_BUDGET:.0e} budget"
                ),
            ));
        }

        let transforms: Vec<ComplexGaussian> = sum
            .terms()
            .iter()
            .map(|term| Ok(diagonal_restrict(term, sig, t)?.fourier_transform()))
            .collect::<Result<_>>()?;

        // Padded bounding box of every transform's magnitude envelope, and
        // the per-axis oscillation rates of the integrand.
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        let mut rate = max_abs_x.to_vec();
        let mut sharpest = 0.0f64;
        for g in &transforms {
            let a = g.alpha().re;
            let sigma = (1.0 / a).sqrt();
            sharpest = sharpest.max(a);
            for j in 0..n {
                let center = g.beta()[j].re / a;
                lo[j] = lo[j].min(center - pad * sigma);
                hi[j] = hi[j].max(center + pad * sigma);
                rate[j] = rate[j].max(max_abs_x[j] + g.beta()[j].im.abs());
            }
        }

        // Per-axis composite Gauss-Legendre rules.
        let mut rules: Vec<Rule1D> = Vec::with_capacity(n);
        let mut total: u128 = 1;
        for j in 0..n {
            let side = hi[j] - lo[j];
            let by_phase = (side * rate[j] / PHASE_BUDGET).ceil() as usize;
            let by_envelope = (side * sharpest.sqrt() / ENVELOPE_PANEL).ceil() as usize;
            let min_panels = spec.freq_samples.div_ceil(POINTS_PER_PANEL);
            let panels = by_phase.max(by_envelope).max(min_panels).max(1);
            let rule = Rule1D::composite_gauss(lo[j], hi[j], POINTS_PER_PANEL, panels)?;
            total = total.saturating_mul(rule.len() as u128);
            rules.push(rule);
        }
        if total > MAX_FREQ_NODES {
            return Err(Error::ResourceCap {
                needed: total.min(usize::MAX as u128) as usize,
                cap: MAX_FREQ_NODES as usize,
            });
        }
        let total = total as usize;

        let norm = (2.0 * std::f64::consts::PI).powi(-(n as i32));
        let mut nodes = Vec::with_capacity(total * n);
        let mut coeffs = Vec::with_capacity(total);
        let mut omega = vec![0.0; n];
        for flat in 0..total {
            let mut rem = flat;
            let mut weight = norm;
            let mut norm2 = 0.0;
            for j in (0..n).rev() {
                let i = rem % rules[j].len();
                rem /= rules[j].len();
                omega[j] = rules[j].nodes[i];
                weight *= rules[j].weights[i];
                norm2 += omega[j] * omega[j];
            }
            let symbol = norm2.sqrt().powf(spec.alpha);
            let ft = tree_sum_fn_c(transforms.len(), &|k| {
                transforms[k].value_at(&omega).expect("dims fixed above")
            });
            nodes.extend_from_slice(&omega);
            coeffs.push(ft * (weight * symbol));
        }
        Ok(FracDiagEvaluator { nodes, coeffs, dim: n })
    }

    pub(crate) fn eval_point(&self, x: &[f64]) -> Complex64 {
        tree_sum_fn_c(self.coeffs.len(), &|i| {
            let omega = &self.nodes[i * self.dim..(i + 1) * self.dim];
            let phase: f64 = omega.iter().zip(x).map(|(w, xj)| w * xj).sum();
            self.coeffs[i] * Complex64::new(0.0, phase).exp()
        })
    }

    #[cfg(test)]
    pub(crate) fn node_count(&self) -> usize {
        self.coeffs.len()
    }
}

/// One-shot fractional derivative of the diagonal trace at (t, x).
pub fn frac_deriv_diagonal(
    sum: &WavepacketSum,
    t: f64,
    x: &[f64],
    spec: &FracDerivSpec,
) -> Result<Complex64> {
    let max_abs_x: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let ev = FracDiagEvaluator::new(sum, t, spec, &max_abs_x)?;
    if x.len() != ev.dim {
        return Err(Error::DimensionMismatch {
            context: "frac_deriv_diagonal",
            expected: ev.dim,
            got: x.len(),
        });
    }
    Ok(ev.eval_point(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{build_family, Family, FamilySpec};
    use crate::packet::GaussianTerm;
    use crate::signature::BlockSignature;
    use num_complex::Complex64 as C;

    fn lambda_q(r: f64) -> WavepacketSum {
        build_family(&FamilySpec::new(Family::LambdaQ, 1, r).with_m(1)).unwrap()
    }

    #[test]
    fn matches_term_by_term_summation() {
        let sum = lambda_q(16.0);
        let ev = DiagonalEvaluator::new(&sum, 0.7, 1e-8).unwrap();
        for x in [-10.0, -3.3, 0.0, 5.9, 16.0] {
            let got = ev.eval(&[x]).unwrap();
            let want = sum.evolve_at(0.7, &[x, x]).unwrap();
            assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-30));
        }
    }

    #[test]
    fn culling_error_stays_within_budget() {
        // Spread lattice: most terms are negligible at any given x, so
        // culling really fires; the result must stay within cull_tol · S
        // of the full sum.
        let sum = build_family(&FamilySpec::new(Family::LambdaQ, 1, 64.0).with_m(2)).unwrap();
        let full = DiagonalEvaluator::unculled(&sum, 0.5).unwrap();
        let tol = 1e-8;
        let culled = DiagonalEvaluator::new(&sum, 0.5, tol).unwrap();
        let peak = 1.0; // unit amplitudes at their own centers
        for x in [-4000.0, -123.4, 0.0, 87.2, 4095.0] {
            let a = full.eval(&[x]).unwrap();
            let b = culled.eval(&[x]).unwrap();
            assert!((a - b).norm() <= tol * peak, "x={x}: {:?}", (a, b));
        }
    }

    #[test]
    fn rejects_out_of_range_cull_tolerance() {
        let sum = lambda_q(16.0);
        assert!(DiagonalEvaluator::new(&sum, 0.0, 0.0).is_err());
        assert!(DiagonalEvaluator::new(&sum, 0.0, 1e-5).is_err());
        assert!(eval_diagonal(&sum, 0.0, &[0.0], 2e-6).is_err());
        assert!(eval_diagonal(&sum, 0.0, &[0.0], 2e-7).is_ok());
    }

    #[test]
    fn zero_order_matches_plain_diagonal() {
        let sum = lambda_q(16.0);
        let spec = FracDerivSpec::new(0.0);
        for (t, x) in [(0.0, 0.0), (0.5, -8.0), (1.0, 13.5)] {
            let plain = eval_diagonal(&sum, t, &[x], 1e-10).unwrap();
            let frac = frac_deriv_diagonal(&sum, t, &[x], &spec).unwrap();
            assert!(
                (plain - frac).norm() <= 1e-6 * plain.norm().max(1e-12),
                "t={t} x={x}: {plain} vs {frac}"
            );
        }
    }

    #[test]
    fn second_order_matches_negative_laplacian() {
        // Single unmodulated packet whose diagonal trace is e^{-x²/2}:
        // |∇|² applies -d²/dx², giving (1 - x²) e^{-x²/2}.
        let sig = BlockSignature::pair_plus(1);
        let term = GaussianTerm::new(C::ONE, vec![0.0, 0.0], vec![0.0, 0.0], 2.0).unwrap();
        let sum = WavepacketSum::new(sig, vec![term]).unwrap();
        let spec = FracDerivSpec::new(2.0);
        for x in [0.0, 0.7, -1.3] {
            let got = frac_deriv_diagonal(&sum, 0.0, &[x], &spec).unwrap();
            let want = (1.0 - x * x) * (-0.5 * x * x).exp();
            assert!((got - C::new(want, 0.0)).norm() < 1e-8, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn fractional_order_scales_by_the_carrier_frequency() {
        // All terms share modulation (ξ, ξ) with ξ = 1, so the diagonal
        // trace oscillates at frequency 2 and |∇|^α ≈ 2^α pointwise near
        // the lattice centers.
        let sum = lambda_q(16.0);
        for alpha in [0.5, 1.0, 1.5] {
            let spec = FracDerivSpec::new(alpha);
            let x = [-4.0];
            let plain = eval_diagonal(&sum, 0.3, &x, 1e-10).unwrap();
            let frac = frac_deriv_diagonal(&sum, 0.3, &x, &spec).unwrap();
            let ratio = frac.norm() / plain.norm();
            assert!(
                (ratio - 2f64.powf(alpha)).abs() < 0.05 * 2f64.powf(alpha),
                "alpha={alpha}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn doubling_frequency_nodes_is_stable() {
        let sum = lambda_q(16.0);
        let mut spec = FracDerivSpec::new(1.0);
        let coarse = FracDiagEvaluator::new(&sum, 0.8, &spec, &[2.5]).unwrap();
        let a = coarse.eval_point(&[2.5]);
        spec.freq_samples *= 2;
        let fine = FracDiagEvaluator::new(&sum, 0.8, &spec, &[2.5]).unwrap();
        let b = fine.eval_point(&[2.5]);
        assert!(fine.node_count() >= coarse.node_count());
        assert!((a - b).norm() <= 1e-8 * b.norm().max(1e-12));
    }

    #[test]
    fn rejects_thin_padding() {
        let sum = lambda_q(16.0);
        let mut spec = FracDerivSpec::new(1.0);
        spec.freq_box_padding = 5.0;
        match frac_deriv_diagonal(&sum, 0.0, &[0.0], &spec) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "freq_box_padding"),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
