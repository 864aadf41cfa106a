//! Exact pairwise L² inner products of Gaussian terms and the Gram norm of a
//! wavepacket sum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::packet::{GaussianTerm, WavepacketSum};
use crate::reduce::{par_map_ordered, tree_sum, tree_sum_fn};

/// Pairs whose closed-form magnitude sits this many e-folds below the
/// diagonal scale contribute nothing at f64 precision and are skipped.
/// The skip rule depends only on the pair data, so results stay
/// deterministic.
const CULL_LOG: f64 = 120.0;

/// (πw)^{d/2} computed exactly for integer and half-integer exponents.
pub(crate) fn half_power(base: f64, d: usize) -> f64 {
    let int_part = base.powi((d / 2) as i32);
    if d.is_multiple_of(2) {
        int_part
    } else {
        int_part * base.sqrt()
    }
}

/// ⟨a, b⟩ = ∫ conj(a(x)) b(x) dx for two terms sharing one width w:
///
///   conj(A_a) A_b (πw)^{d/2}
///     · exp(-|Δc|²/(4w)) · exp(i c̄·δ) · exp(-w|δ|²/4),
///
/// with Δc = c_a - c_b, c̄ = (c_a + c_b)/2, δ = μ_b - μ_a. The first
/// argument is conjugated.
pub fn inner_product(a: &GaussianTerm, b: &GaussianTerm) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context: "inner_product",
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if a.width() != b.width() {
        return Err(Error::contract(format!(
            "inner_product needs equal widths, got {} and {}",
            a.width(),
            b.width()
        )));
    }
    let w = a.width();
    let d = a.dim();
    let mut dc2 = 0.0;
    let mut delta2 = 0.0;
    let mut cross = 0.0;
    for j in 0..d {
        let dc = a.center()[j] - b.center()[j];
        let cbar = 0.5 * (a.center()[j] + b.center()[j]);
        let del = b.modulation()[j] - a.modulation()[j];
        dc2 += dc * dc;
        delta2 += del * del;
        cross += cbar * del;
    }
    let scale = half_power(std::f64::consts::PI * w, d);
    let expo = Complex64::new(-dc2 / (4.0 * w) - 0.25 * w * delta2, cross);
    Ok(a.amplitude().conj() * b.amplitude() * scale * expo.exp())
}

/// Exponential decay rate of |⟨a, b⟩| relative to the diagonal scale:
/// |Δc|²/(4w) + w|δ|²/4. Used for deterministic pair culling.
fn pair_decay(a: &GaussianTerm, b: &GaussianTerm) -> f64 {
    let w = a.width();
    let mut dc2 = 0.0;
    let mut delta2 = 0.0;
    for j in 0..a.dim() {
        let dc = a.center()[j] - b.center()[j];
        let del = b.modulation()[j] - a.modulation()[j];
        dc2 += dc * dc;
        delta2 += del * del;
    }
    dc2 / (4.0 * w) + 0.25 * w * delta2
}

/// ‖Σ_k g_k‖_{L²} = sqrt(Σ_{k,l} ⟨g_k, g_l⟩), computed from the exact
/// pairwise closed form. The double sum is assembled as
/// Σ_k ⟨k,k⟩ + 2 Re Σ_{k<l} ⟨k,l⟩ with fixed-tree reductions; rows are
/// processed in parallel but combined in index order, so the result is
/// bit-identical for any thread count.
pub fn gram_l2_norm(sum: &WavepacketSum) -> f64 {
    let terms = sum.terms();
    let k = terms.len();
    let max_ln_amp = terms
        .iter()
        .map(|t| t.amplitude().norm_sqr().ln() * 0.5)
        .fold(f64::NEG_INFINITY, f64::max);

    let diag = tree_sum_fn(k, &|i| {
        inner_product(&terms[i], &terms[i])
            .expect("same term: contracts hold")
            .re
    });

    let rows = par_map_ordered(k, &|i| {
        let ti = &terms[i];
        let ln_ai = ti.amplitude().norm_sqr().ln() * 0.5;
        tree_sum_fn(k - i - 1, &|off| {
            let tj = &terms[i + 1 + off];
            let ln_aj = tj.amplitude().norm_sqr().ln() * 0.5;
            if ln_ai + ln_aj - pair_decay(ti, tj) < 2.0 * max_ln_amp - CULL_LOG {
                return 0.0;
            }
            inner_product(ti, tj).expect("widths checked at construction").re
        })
    });
    let off_diag = tree_sum(&rows);

    (diag + 2.0 * off_diag).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::BlockSignature;
    use num_complex::Complex64 as C;
    use std::f64::consts::PI;

    fn term(c: &[f64], m: &[f64], w: f64) -> GaussianTerm {
        GaussianTerm::new(C::ONE, c.to_vec(), m.to_vec(), w).unwrap()
    }

    #[test]
    fn identical_terms_give_pi_w_to_the_half_d_exactly() {
        // d = 2, w = 4: ⟨g, g⟩ = (πw)^{2/2} = 4π, exact.
        let a = term(&[1.0, -2.0], &[0.0, 0.0], 4.0);
        let v = inner_product(&a, &a).unwrap();
        assert_eq!(v.re, PI * 4.0);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn separated_centers_decay_like_gaussian_of_quarter_width() {
        // |Δc|² = 4w: value = (πw)^{d/2} e^{-1}; w = 4, d = 2, Δc = (4, 0).
        let a = term(&[2.0, 0.0], &[0.0, 0.0], 4.0);
        let b = term(&[-2.0, 0.0], &[0.0, 0.0], 4.0);
        let v = inner_product(&a, &b).unwrap();
        let want = 4.0 * PI * (-1.0f64).exp();
        assert!((v.re - want).abs() < 1e-14 * want);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn conjugate_symmetry() {
        let a = GaussianTerm::new(C::new(0.8, 0.3), vec![1.0, 0.5], vec![0.2, -0.4], 6.0).unwrap();
        let b = GaussianTerm::new(C::new(-0.1, 1.1), vec![-0.7, 2.0], vec![1.0, 0.6], 6.0).unwrap();
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14 * ab.norm());
    }

    #[test]
    fn modulation_separation_decays_with_width() {
        // |δ|² weight is w/4: large widths kill modulation-separated pairs.
        let a = term(&[0.0, 0.0], &[1.0, 0.0], 100.0);
        let b = term(&[0.0, 0.0], &[0.0, 0.0], 100.0);
        let v = inner_product(&a, &b).unwrap();
        let want = (PI * 100.0) * (-100.0 / 4.0f64).exp();
        assert!((v.norm() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn rejects_width_and_dim_mismatch() {
        let a = term(&[0.0], &[0.0], 4.0);
        let b = term(&[0.0], &[0.0], 8.0);
        assert!(inner_product(&a, &b).is_err());
        let c = term(&[0.0, 0.0], &[0.0, 0.0], 4.0);
        assert!(inner_product(&a, &c).is_err());
    }

    #[test]
    fn single_term_gram_is_sqrt_pi_w_to_half_d() {
        // w = 4, d = 2: ‖g‖ = sqrt(4π).
        let sig = BlockSignature::pair_plus(1);
        let sum = WavepacketSum::new(sig, vec![term(&[0.0, 0.0], &[0.0, 0.0], 4.0)]).unwrap();
        let got = gram_l2_norm(&sum);
        assert!((got - (4.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn well_separated_terms_add_in_quadrature() {
        let sig = BlockSignature::pair_plus(1);
        let w = 4.0;
        let terms: Vec<GaussianTerm> = (0..5)
            .map(|k| term(&[300.0 * k as f64, 0.0], &[0.0, 0.0], w))
            .collect();
        let sum = WavepacketSum::new(sig, terms).unwrap();
        let got = gram_l2_norm(&sum);
        let want = (5.0 * 4.0 * PI).sqrt();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn gram_matches_brute_force_on_overlapping_cluster() {
        let sig = BlockSignature::pair_plus(1);
        let w = 9.0;
        let terms: Vec<GaussianTerm> = (0..7)
            .map(|k| {
                GaussianTerm::new(
                    C::new(1.0, 0.1 * k as f64),
                    vec![0.9 * k as f64, -0.4 * k as f64],
                    vec![(k as f64 * 0.33).sin(), (k as f64 * 0.21).cos()],
                    w,
                )
                .unwrap()
            })
            .collect();
        let sum = WavepacketSum::new(sig, terms.clone()).unwrap();
        let mut acc = C::ZERO;
        for a in &terms {
            for b in &terms {
                acc += inner_product(a, b).unwrap();
            }
        }
        assert!(acc.im.abs() < 1e-12 * acc.re);
        let got = gram_l2_norm(&sum);
        assert!((got - acc.re.sqrt()).abs() < 1e-12 * got);
    }

    #[test]
    fn gram_squared_matches_plain_quadrature() {
        // Dual route: 2-D Riemann sum of |Σ g_k|² against the closed form.
        let sig = BlockSignature::pair_plus(1);
        let w = 2.0;
        let terms = vec![
            term(&[0.0, 0.0], &[0.5, -0.3], w),
            term(&[1.5, -1.0], &[0.0, 0.8], w),
            term(&[-1.0, 2.0], &[1.0, 0.0], w),
        ];
        let sum = WavepacketSum::new(sig, terms).unwrap();
        let (l, nn) = (14.0, 560usize);
        let h = 2.0 * l / nn as f64;
        let mut acc = 0.0;
        for i in 0..nn {
            for j in 0..nn {
                let p = [-l + (i as f64 + 0.5) * h, -l + (j as f64 + 0.5) * h];
                acc += sum.value_at(&p).unwrap().norm_sqr();
            }
        }
        let quad = (acc * h * h).sqrt();
        let closed = gram_l2_norm(&sum);
        assert!(
            (quad - closed).abs() < 1e-8 * closed,
            "quad {quad} vs closed {closed}"
        );
    }

    #[test]
    fn determinism_same_input_same_bits() {
        let sig = BlockSignature::pair_plus(1);
        let terms: Vec<GaussianTerm> = (0..64)
            .map(|k| {
                term(
                    &[(k as f64 * 1.7).sin() * 20.0, (k as f64 * 0.9).cos() * 20.0],
                    &[(k as f64 * 0.11).sin(), (k as f64 * 0.13).cos()],
                    16.0,
                )
            })
            .collect();
        let sum = WavepacketSum::new(sig, terms).unwrap();
        let a = gram_l2_norm(&sum);
        let b = gram_l2_norm(&sum);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
