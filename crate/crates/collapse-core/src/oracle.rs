//! Spectral reference implementation: evolve sampled fields by FFT,
//! multiply by the exact symbol, transform back. Slow and memory-hungry,
//! but makes no use of the closed forms it is used to check.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::packet::GaussianTerm;
use crate::reduce::{tree_sum_fn, tree_sum_fn_c};
use crate::signature::BlockSignature;

/// Periodic sampling box [-L, L)^d with N uniform points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points_per_axis: usize,
    dim: usize,
}

/// Samples on the boundary faces may carry at most this fraction of the
/// peak magnitude; beyond it, periodization error would pollute the FFT.
const BOUNDARY_BUDGET: f64 = 1e-12;

/// Drifted centers must keep this many Gaussian widths of clearance.
const DRIFT_CLEARANCE: f64 = 6.0;

const MAX_GRID_ELEMENTS: u128 = 1 << 24;

impl GridSpec {
    pub fn new(half_width: f64, points_per_axis: usize, dim: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Grid(format!(
                "half-width must be finite and > 0, got {half_width}"
            )));
        }
        if points_per_axis < 64 || !points_per_axis.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis must be a power of two >= 64, got {points_per_axis}"
            )));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::Grid(format!("grid dimension must be 1..=3, got {dim}")));
        }
        let total = (points_per_axis as u128).pow(dim as u32);
        if total > MAX_GRID_ELEMENTS {
            return Err(Error::ResourceCap {
                needed: total as usize,
                cap: MAX_GRID_ELEMENTS as usize,
            });
        }
        Ok(GridSpec {
            half_width,
            points_per_axis,
            dim,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Uniform spacing h = 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Coordinates of the flat index (row-major), written into `out`.
    pub fn node(&self, flat: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut rem = flat;
        for j in (0..self.dim).rev() {
            out[j] = self.axis_coord(rem % self.points_per_axis);
            rem /= self.points_per_axis;
        }
    }

    /// True if any axis index lies on the first or last grid line.
    fn on_boundary(&self, flat: usize) -> bool {
        let mut rem = flat;
        for _ in 0..self.dim {
            let i = rem % self.points_per_axis;
            if i == 0 || i == self.points_per_axis - 1 {
                return true;
            }
            rem /= self.points_per_axis;
        }
        false
    }
}

/// Samples the (un-evolved) term on the grid. Errors if the field has not
/// decayed to BOUNDARY_BUDGET · peak on the boundary faces, which would
/// break the periodic spectral evolution.
pub fn sample_term(term: &GaussianTerm, grid: &GridSpec) -> Result<Vec<Complex64>> {
    if term.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            context: "sample_term",
            expected: grid.dim(),
            got: term.dim(),
        });
    }
    let mut samples = Vec::with_capacity(grid.len());
    let mut x = vec![0.0; grid.dim()];
    let mut peak = 0.0f64;
    let mut boundary_peak = 0.0f64;
    for flat in 0..grid.len() {
        grid.node(flat, &mut x);
        let v = term.value_at(&x).expect("dims checked above");
        let mag = v.norm();
        peak = peak.max(mag);
        if grid.on_boundary(flat) {
            boundary_peak = boundary_peak.max(mag);
        }
        samples.push(v);
    }
    if boundary_peak > BOUNDARY_BUDGET * peak {
        return Err(Error::Grid(format!(
            "boundary magnitude {boundary_peak:.3e} exceeds {BOUNDARY_BUDGET:.0e} of peak {peak:.3e}; enlarge the grid"
        )));
    }
    Ok(samples)
}

/// Evolves grid samples under exp(i t Σ_j s_j Δ_j / 2) spectrally:
/// forward FFT along every axis, multiplication by the separable symbol
/// exp(-i t s_axis ω²/2) with ω = π k / L, inverse FFT, normalization.
/// Unitary on the grid to rounding.
pub fn spectral_evolve(
    samples: &[Complex64],
    sig: &BlockSignature,
    t: f64,
    grid: &GridSpec,
) -> Result<Vec<Complex64>> {
    if sig.ambient_dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            context: "spectral_evolve (signature vs grid)",
            expected: grid.dim(),
            got: sig.ambient_dim(),
        });
    }
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            context: "spectral_evolve (samples vs grid)",
            expected: grid.len(),
            got: samples.len(),
        });
    }
    if !t.is_finite() {
        return Err(Error::contract(format!("time must be finite, got {t}")));
    }
    let n = grid.points_per_axis();
    let d = grid.dim();
    let mut data = samples.to_vec();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    // Per-axis block sign: axis j belongs to the block covering offset j.
    let mut axis_sign = Vec::with_capacity(d);
    for &(nj, s) in sig.blocks() {
        axis_sign.extend(std::iter::repeat_n(s.as_f64(), nj));
    }

    // Per-axis symbol tables over the signed frequency index.
    let tables: Vec<Vec<Complex64>> = (0..d)
        .map(|axis| {
            (0..n)
                .map(|i| {
                    let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                    let omega = std::f64::consts::PI * k / grid.half_width();
                    Complex64::new(0.0, -0.5 * t * axis_sign[axis] * omega * omega).exp()
                })
                .collect()
        })
        .collect();

    fft_all_axes(&mut data, n, d, forward.as_ref());
    let mut rem_idx = vec![0usize; d];
    for (flat, v) in data.iter_mut().enumerate() {
        let mut rem = flat;
        for j in (0..d).rev() {
            rem_idx[j] = rem % n;
            rem /= n;
        }
        let mut factor = Complex64::ONE;
        for (table, &i) in tables.iter().zip(&rem_idx) {
            factor *= table[i];
        }
        *v *= factor;
    }
    fft_all_axes(&mut data, n, d, inverse.as_ref());
    let norm = 1.0 / (n as f64).powi(d as i32);
    for v in &mut data {
        *v *= norm;
    }
    Ok(data)
}

/// In-place FFT along every axis of a row-major N^d array.
fn fft_all_axes(data: &mut [Complex64], n: usize, d: usize, fft: &dyn rustfft::Fft<f64>) {
    let mut scratch = vec![Complex64::ZERO; n];
    for axis in 0..d {
        // stride between consecutive entries along `axis`
        let stride = n.pow((d - 1 - axis) as u32);
        // number of contiguous groups and lines per group
        let lines = data.len() / n;
        for line in 0..lines {
            // Decompose: indices above the axis pick a block, below pick
            // the offset inside it.
            let block = line / stride;
            let offset = line % stride;
            let base = block * stride * n + offset;
            for j in 0..n {
                scratch[j] = data[base + j * stride];
            }
            fft.process(&mut scratch);
            for j in 0..n {
                data[base + j * stride] = scratch[j];
            }
        }
    }
}

/// Samples the term and evolves it spectrally, first checking that every
/// drifted center keeps DRIFT_CLEARANCE·sqrt(w) clearance from the
/// boundary so the evolved field still fits the box.
pub fn evolve_term_on_grid(
    term: &GaussianTerm,
    sig: &BlockSignature,
    t: f64,
    grid: &GridSpec,
) -> Result<Vec<Complex64>> {
    let margin = DRIFT_CLEARANCE * term.width().sqrt();
    let mut off = 0;
    for &(nj, s) in sig.blocks() {
        for k in off..off + nj {
            let drifted = term.center()[k] + s.as_f64() * t * term.modulation()[k];
            if drifted.abs() > grid.half_width() - margin {
                return Err(Error::Grid(format!(
                    "drifted center coordinate {drifted:.3} leaves less than {margin:.3} clearance in a box of half-width {}",
                    grid.half_width()
                )));
            }
        }
        off += nj;
    }
    let samples = sample_term(term, grid)?;
    spectral_evolve(&samples, sig, t, grid)
}

/// Riemann inner product ⟨a, b⟩ = Σ conj(a(x)) b(x) h^d over the grid
/// (the first argument is conjugated). For fields vanishing at the
/// boundary this is the periodic trapezoid rule, spectrally accurate.
pub fn quad_inner_product(
    a: &GaussianTerm,
    b: &GaussianTerm,
    grid: &GridSpec,
) -> Result<Complex64> {
    let fa = sample_term(a, grid)?;
    let fb = sample_term(b, grid)?;
    let hd = grid.spacing().powi(grid.dim() as i32);
    let acc = tree_sum_fn_c(grid.len(), &|i| fa[i].conj() * fb[i]);
    Ok(acc * hd)
}

/// Discrete L² norm sqrt(Σ |v|² h^d) of grid samples.
pub fn grid_l2_norm(samples: &[Complex64], grid: &GridSpec) -> f64 {
    let hd = grid.spacing().powi(grid.dim() as i32);
    (tree_sum_fn(samples.len(), &|i| samples[i].norm_sqr()) * hd).sqrt()
}

/// Peak-normalized disagreement between the spectral evolution and the
/// closed form: max_x |spectral - closed| / max_x |closed|.
pub fn oracle_rel_error(
    term: &GaussianTerm,
    sig: &BlockSignature,
    t: f64,
    grid: &GridSpec,
) -> Result<f64> {
    let spectral = evolve_term_on_grid(term, sig, t, grid)?;
    let mut x = vec![0.0; grid.dim()];
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for (flat, s) in spectral.iter().enumerate() {
        grid.node(flat, &mut x);
        let closed = crate::evolve::evolve_eval(term, sig, t, &x)?;
        worst = worst.max((s - closed).norm());
        peak = peak.max(closed.norm());
    }
    Ok(worst / peak)
}
