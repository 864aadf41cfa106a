//! Frequency-side functionals of a wavepacket sum at time zero: weighted
//! Sobolev norms and low/high frequency mass splits.
//!
//! Two independent routes are provided. `hs_norm` integrates
//! ⟨ζ⟩^{2s} |ŵ(ζ)|² on a composite Gauss-Legendre grid whose panel count
//! tracks the phase oscillation rate of the transform; it works for any
//! real s ≥ 0 but its grid grows with the largest position center, so it
//! is only practical for moderately sized inputs. `hs_norm_exact` evaluates
//! the same integral in closed form for integer s by expanding the pairwise
//! products into polynomial-times-Gaussian moments; it costs O(K²) pair
//! work regardless of center size and is the route used by scaling scans.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::cgauss::ComplexGaussian;
use crate::error::{Error, Result};
use crate::packet::WavepacketSum;
use crate::quad::Rule1D;
use crate::reduce::{par_map_ordered, par_tree_sum_fn, par_tree_sum_fn_c, tree_sum, tree_sum_fn};

/// Pairs further than this many e-folds below the diagonal scale are
/// skipped in the exact route; see `gram` for the same rule.
const CULL_LOG: f64 = 120.0;

/// Phase swing per quadrature panel, in radians. 16-point panels resolve a
/// 5 rad swing to well below 1e-12 relative error.
const PHASE_BUDGET: f64 = 5.0;

/// Panel width in units of the transform's Gaussian scale 1/sqrt(w).
const ENVELOPE_PANEL: f64 = 1.2;

/// Controls for frequency-domain quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points per panel.
    pub points_per_panel: usize,
    /// Lower bound on panels along each axis.
    pub min_panels_per_axis: usize,
    /// Half-width added around the modulation bounding box, in units of
    /// the transform scale 1/sqrt(w). Must be at least 12 so the truncated
    /// tail is below e^{-72} of the total mass.
    pub padding_sigmas: f64,
    /// Hard cap on the total node count of the tensor grid.
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points_per_panel: 16,
            min_panels_per_axis: 4,
            padding_sigmas: 12.0,
            max_nodes: 100_000_000,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.points_per_panel < 4 {
            return Err(Error::config(
                "points_per_panel",
                "need at least 4 points per panel",
            ));
        }
        if self.min_panels_per_axis == 0 {
            return Err(Error::config(
                "min_panels_per_axis",
                "need at least one panel",
            ));
        }
        if !(self.padding_sigmas >= 12.0) {
            return Err(Error::config(
                "padding_sigmas",
                format!(
                    "padding of {} scales truncates visible mass; need >= 12",
                    self.padding_sigmas
                ),
            ));
        }
        Ok(())
    }
}

/// Frequency-domain L² masses on either side of a radial cutoff.
/// Masses are squared L² norms; `low_mass + high_mass == total_mass`
/// exactly by construction.
#[derive(Debug, Clone, Copy)]
pub struct LpSplit {
    pub low_mass: f64,
    pub high_mass: f64,
    pub total_mass: f64,
}

/// Flattened per-term transform data for fast node evaluation.
struct FreqEval {
    dim: usize,
    width: f64,
    log_re: Vec<f64>,
    log_im: Vec<f64>,
    // Row-major K x d blocks of Re/Im of the transform's linear coefficient.
    lin_re: Vec<f64>,
    lin_im: Vec<f64>,
}

impl FreqEval {
    fn new(sum: &WavepacketSum) -> Self {
        let d = sum.ambient_dim();
        let k = sum.term_count();
        let mut log_re = Vec::with_capacity(k);
        let mut log_im = Vec::with_capacity(k);
        let mut lin_re = Vec::with_capacity(k * d);
        let mut lin_im = Vec::with_capacity(k * d);
        for t in sum.terms() {
            let hat = ComplexGaussian::from_term(t).fourier_transform();
            log_re.push(hat.log_gamma().re);
            log_im.push(hat.log_gamma().im);
            for b in hat.beta() {
                lin_re.push(b.re);
                lin_im.push(b.im);
            }
        }
        FreqEval {
            dim: d,
            width: sum.width(),
            log_re,
            log_im,
            lin_re,
            lin_im,
        }
    }

    /// |ŵ(ζ)|² at one node.
    fn intensity(&self, zeta: &[f64]) -> f64 {
        let quad = 0.5 * self.width * zeta.iter().map(|z| z * z).sum::<f64>();
        let mut sr = 0.0;
        let mut si = 0.0;
        for k in 0..self.log_re.len() {
            let row = k * self.dim;
            let mut re = self.log_re[k] - quad;
            let mut im = self.log_im[k];
            for (j, z) in zeta.iter().enumerate() {
                re += self.lin_re[row + j] * z;
                im += self.lin_im[row + j] * z;
            }
            let mag = re.exp();
            let (s, c) = im.sin_cos();
            sr += mag * c;
            si += mag * s;
        }
        sr * sr + si * si
    }
}

/// Tensor grid over the frequency box of `sum`, one composite rule per axis.
struct FreqGrid {
    rules: Vec<Rule1D>,
    strides: Vec<usize>,
    total: usize,
}

impl FreqGrid {
    fn build(sum: &WavepacketSum, quad: &QuadratureSpec) -> Result<FreqGrid> {
        let d = sum.ambient_dim();
        let w = sum.width();
        let sigma = w.sqrt().recip();
        let pad = quad.padding_sigmas * sigma;
        let mut rules = Vec::with_capacity(d);
        let mut total: u128 = 1;
        for j in 0..d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut rate: f64 = 0.0;
            for t in sum.terms() {
                lo = lo.min(t.modulation()[j]);
                hi = hi.max(t.modulation()[j]);
                // |ŵ|² carries beat frequencies up to the largest
                // difference of two per-term phase rates c_k.
                rate = rate.max(2.0 * t.center()[j].abs());
            }
            let (lo, hi) = (lo - pad, hi + pad);
            let side = hi - lo;
            let by_phase = (side * rate / PHASE_BUDGET).ceil() as usize;
            let by_envelope = (side / (ENVELOPE_PANEL * sigma)).ceil() as usize;
            let panels = quad.min_panels_per_axis.max(by_phase).max(by_envelope);
            total = total.saturating_mul((panels * quad.points_per_panel) as u128);
            rules.push(Rule1D::composite_gauss(lo, hi, quad.points_per_panel, panels)?);
        }
        if total > quad.max_nodes as u128 {
            return Err(Error::ResourceCap {
                needed: total.min(usize::MAX as u128) as usize,
                cap: quad.max_nodes,
            });
        }
        let total = total as usize;
        let mut strides = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * rules[j + 1].len();
        }
        Ok(FreqGrid {
            rules,
            strides,
            total,
        })
    }

    /// Node coordinates and combined weight for a flat index.
    fn node(&self, idx: usize, zeta: &mut [f64]) -> f64 {
        let mut wgt = 1.0;
        for (j, rule) in self.rules.iter().enumerate() {
            let i = (idx / self.strides[j]) % rule.len();
            zeta[j] = rule.nodes[i];
            wgt *= rule.weights[i];
        }
        wgt
    }
}

const PAR_GRAIN: usize = 4096;
const MAX_AXES: usize = 12;

fn check_dim(d: usize) -> Result<()> {
    if d > MAX_AXES {
        return Err(Error::contract(format!(
            "frequency-side routines support ambient dimension <= {MAX_AXES}, got {d}"
        )));
    }
    Ok(())
}

/// ‖w₀‖_{H^s} = ((2π)^{-d} ∫ ⟨ζ⟩^{2s} |ŵ₀(ζ)|² dζ)^{1/2} by composite
/// Gauss-Legendre quadrature. Any real s ≥ 0. The normalization makes
/// s = 0 coincide with the L² norm.
pub fn hs_norm(sum: &WavepacketSum, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::config("s", format!("order must be >= 0, got {s}")));
    }
    quad.validate()?;
    let d = sum.ambient_dim();
    check_dim(d)?;
    let grid = FreqGrid::build(sum, quad)?;
    let eval = FreqEval::new(sum);
    let acc = par_tree_sum_fn(grid.total, PAR_GRAIN, &|idx| {
        let mut zeta = [0.0f64; MAX_AXES];
        let wgt = grid.node(idx, &mut zeta[..d]);
        let z2: f64 = zeta[..d].iter().map(|z| z * z).sum();
        wgt * (1.0 + z2).powf(s) * eval.intensity(&zeta[..d])
    });
    Ok(((2.0 * PI).powi(-(d as i32)) * acc).sqrt())
}

/// Splits the frequency-side L² mass of `sum` at the radius `cutoff`:
/// nodes with |ζ| ≤ cutoff count as low. Same grid and normalization as
/// `hs_norm` with s = 0, so `total_mass` reproduces the squared L² norm.
pub fn lp_split(sum: &WavepacketSum, cutoff: f64, quad: &QuadratureSpec) -> Result<LpSplit> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::config(
            "cutoff",
            format!("cutoff must be positive, got {cutoff}"),
        ));
    }
    quad.validate()?;
    let d = sum.ambient_dim();
    check_dim(d)?;
    let grid = FreqGrid::build(sum, quad)?;
    let eval = FreqEval::new(sum);
    let cut2 = cutoff * cutoff;
    // Low and high accumulate through one pass, packed as re/im of one
    // complex number so the shared fixed-tree reduction applies.
    let acc = par_tree_sum_fn_c(grid.total, PAR_GRAIN, &|idx| {
        let mut zeta = [0.0f64; MAX_AXES];
        let wgt = grid.node(idx, &mut zeta[..d]);
        let z2: f64 = zeta[..d].iter().map(|z| z * z).sum();
        let v = wgt * eval.intensity(&zeta[..d]);
        if z2 <= cut2 {
            Complex64::new(v, 0.0)
        } else {
            Complex64::new(0.0, v)
        }
    });
    let norm = (2.0 * PI).powi(-(d as i32));
    let low = norm * acc.re;
    let high = norm * acc.im;
    Ok(LpSplit {
        low_mass: low,
        high_mass: high,
        total_mass: low + high,
    })
}

/// Largest integer order accepted by the closed-form route. Keeps the
/// polynomial expansion size bounded; quadrature covers anything larger.
const MAX_EXACT_ORDER: u32 = 32;

/// Closed-form ‖w₀‖_{H^s} for integer s, exact up to f64 rounding.
///
/// Pairwise, ∫ ⟨ζ⟩^{2s} ĝ_k conj(ĝ_l) dζ completes the square at a complex
/// center z and reduces to ∫ (1 + Σ_j (z_j + u_j)²)^s e^{-w|u|²} du, a
/// polynomial against a centered Gaussian, evaluated via even moments.
pub fn hs_norm_exact(sum: &WavepacketSum, s: u32) -> Result<f64> {
    if s > MAX_EXACT_ORDER {
        return Err(Error::config(
            "s",
            format!("closed-form route supports s <= {MAX_EXACT_ORDER}, got {s}"),
        ));
    }
    let d = sum.ambient_dim();
    check_dim(d)?;
    let w = sum.width();
    let terms = sum.terms();
    let k = terms.len();
    let max_ln_amp = terms
        .iter()
        .map(|t| t.amplitude().norm_sqr().ln() * 0.5)
        .fold(f64::NEG_INFINITY, f64::max);

    let tables = MomentTables::new(w, s);
    let base = d as f64 * (2.0 * PI * w).ln() - d as f64 * (2.0 * PI).ln();

    let pair_value = |a: usize, b: usize| -> Complex64 {
        let (ta, tb) = (&terms[a], &terms[b]);
        let mut mu2 = 0.0;
        let mut mu_cross = Complex64::ZERO;
        let mut zz = Complex64::ZERO;
        let mut z = [Complex64::ZERO; MAX_AXES];
        #[allow(clippy::needless_range_loop)] // j walks four parallel arrays
        for j in 0..d {
            let (ma, mb) = (ta.modulation()[j], tb.modulation()[j]);
            let (ca, cb) = (ta.center()[j], tb.center()[j]);
            mu2 += ma * ma + mb * mb;
            mu_cross += Complex64::new(0.0, cb * mb - ca * ma);
            // v_j = w(μ_a + μ_b) + i(c_a - c_b); the square is completed
            // at z = v / (2w).
            let zj = Complex64::new(0.5 * (ma + mb), (ca - cb) / (2.0 * w));
            z[j] = zj;
            zz += zj * zj;
        }
        let exponent = Complex64::new(base - 0.5 * w * mu2, 0.0) + mu_cross + w * zz;
        let poly = poly_gauss_integral(&z[..d], &tables);
        ta.amplitude().conj() * tb.amplitude() * exponent.exp() * poly
    };

    let pair_decay = |a: usize, b: usize| -> f64 {
        let (ta, tb) = (&terms[a], &terms[b]);
        let mut dmu2 = 0.0;
        let mut dc2 = 0.0;
        for j in 0..d {
            let dm = ta.modulation()[j] - tb.modulation()[j];
            let dc = ta.center()[j] - tb.center()[j];
            dmu2 += dm * dm;
            dc2 += dc * dc;
        }
        0.25 * w * dmu2 + dc2 / (4.0 * w)
    };

    let diag = tree_sum_fn(k, &|i| pair_value(i, i).re);
    let rows = par_map_ordered(k, &|i| {
        let ln_ai = terms[i].amplitude().norm_sqr().ln() * 0.5;
        tree_sum_fn(k - i - 1, &|off| {
            let j = i + 1 + off;
            let ln_aj = terms[j].amplitude().norm_sqr().ln() * 0.5;
            if ln_ai + ln_aj - pair_decay(i, j) < 2.0 * max_ln_amp - CULL_LOG {
                return 0.0;
            }
            pair_value(i, j).re
        })
    });
    Ok((diag + 2.0 * tree_sum(&rows)).sqrt())
}

/// Precomputed combinatorics shared across all pairs of one evaluation:
/// centered Gaussian moments, binomials, factorials.
struct MomentTables {
    s: usize,
    /// m[i] = ∫ u^{2i} e^{-w u²} du = sqrt(π/w) (2i-1)!! / (2w)^i.
    moments: Vec<f64>,
    /// Pascal rows up to 2s.
    binom: Vec<Vec<f64>>,
    factorial: Vec<f64>,
}

impl MomentTables {
    fn new(w: f64, s: u32) -> Self {
        let s = s as usize;
        let mut moments = vec![0.0; s + 1];
        moments[0] = (PI / w).sqrt();
        for i in 1..=s {
            moments[i] = moments[i - 1] * (2 * i - 1) as f64 / (2.0 * w);
        }
        let rows = 2 * s + 1;
        let mut binom = vec![vec![0.0f64; rows]; rows];
        for n in 0..rows {
            binom[n][0] = 1.0;
            for r in 1..=n {
                binom[n][r] = binom[n - 1][r - 1] + if r < n { binom[n - 1][r] } else { 0.0 };
            }
        }
        let mut factorial = vec![1.0f64; s + 1];
        for n in 1..=s {
            factorial[n] = factorial[n - 1] * n as f64;
        }
        MomentTables {
            s,
            moments,
            binom,
            factorial,
        }
    }
}

/// ∫ (1 + Σ_j (z_j + u_j)²)^s e^{-w|u|²} du for a complex center z.
///
/// Expand (1 + Q)^s binomially in Q = Σ_j (z_j + u_j)² and factor each
/// multinomial term across axes. A generating-series product collects the
/// multinomial weights: with E_j(r) = ∫ (z_j + u)^{2r} e^{-w u²} du, the
/// degree-r coefficient of Π_j Σ_r E_j(r) x^r / r! times r! is exactly
/// Σ_{|r⃗|=r} multinomial(r; r⃗) Π_j E_j(r_j).
fn poly_gauss_integral(z: &[Complex64], tables: &MomentTables) -> Complex64 {
    let s = tables.s;
    if s == 0 {
        return Complex64::new(z.iter().map(|_| tables.moments[0]).product(), 0.0);
    }
    let mut series = vec![Complex64::ZERO; s + 1];
    series[0] = Complex64::ONE;
    let mut next = vec![Complex64::ZERO; s + 1];
    for &zj in z {
        // E_j(r) = Σ_{i=0..r} C(2r, 2i) z_j^{2(r-i)} m_i.
        let z2 = zj * zj;
        let mut axis = vec![Complex64::ZERO; s + 1];
        for (r, a) in axis.iter_mut().enumerate() {
            let mut zpow = Complex64::ONE;
            let mut acc = Complex64::ZERO;
            // i runs downward so z-powers build up multiplicatively.
            for i in (0..=r).rev() {
                acc += tables.binom[2 * r][2 * i] * tables.moments[i] * zpow;
                zpow *= z2;
            }
            *a = acc / tables.factorial[r];
        }
        for c in next.iter_mut() {
            *c = Complex64::ZERO;
        }
        for (p, &sp) in series.iter().enumerate() {
            if sp == Complex64::ZERO {
                continue;
            }
            for (q, &aq) in axis.iter().enumerate().take(s + 1 - p) {
                next[p + q] += sp * aq;
            }
        }
        std::mem::swap(&mut series, &mut next);
    }
    let mut total = Complex64::ZERO;
    for (r, &sr) in series.iter().enumerate() {
        total += tables.binom[s][r] * tables.factorial[r] * sr;
    }
    total
}
