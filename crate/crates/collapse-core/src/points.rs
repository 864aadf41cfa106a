//! Separated point sets on spheres, equal-norm surfaces, cones, and
//! lattices. These anchor the packet centers and modulations of the
//! counterexample families.
//!
//! All constructions are deterministic in (R, n, seed): low-discrepancy
//! draws feed a greedy thinning pass that enforces the sqrt(R) spacing,
//! so rebuilding with the same inputs reproduces identical bits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fraction of the target count below which construction is reported as
/// failed rather than silently thinned.
const MIN_COUNT_FRACTION: f64 = 1.0 / 20.0;

/// Candidate draws allowed per accepted point before giving up.
const DRAW_BUDGET_PER_POINT: usize = 64;
const DRAW_BUDGET_FLOOR: usize = 4096;

/// Default hard cap on lattice sizes; exceeding it is an error that names
/// the cap actually needed.
pub const DEFAULT_LATTICE_CAP: usize = 1 << 20;

/// Which surface the points were sampled from; `verify` re-checks
/// membership after construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbientConstraint {
    /// |p| = radius in the full ambient dimension.
    Sphere { radius: f64 },
    /// p = (x, y) with |x| = |y| and |x| in [lo, hi]; blocks have dim n.
    EqualNorms { n: usize, lo: f64, hi: f64 },
    /// p = (x, y, z) with |x|^2 + |y|^2 = |z|^2 and |x|, |y| in [lo, hi].
    Cone { n: usize, lo: f64, hi: f64 },
    /// |p| <= radius (lattice inside a closed ball).
    Ball { radius: f64 },
}

/// A finite separated point set together with its guaranteed spacing and
/// the surface it lives on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec<f64>>,
    /// Every pair is at least this far apart (up to relative rounding slack).
    pub min_spacing: f64,
    pub ambient: AmbientConstraint,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Re-checks the spacing and ambient-membership invariants.
    /// `rel_tol` absorbs rounding in trigonometric constructions; exact
    /// lattices pass with `rel_tol = 0`.
    pub fn verify(&self, rel_tol: f64) -> Result<()> {
        let d = self.dim();
        for p in &self.points {
            if p.len() != d {
                return Err(Error::contract("point cloud has mixed dimensions"));
            }
        }
        let min2 = self.min_spacing * self.min_spacing * (1.0 - rel_tol);
        for i in 0..self.points.len() {
            for j in (i + 1)..self.points.len() {
                if dist2(&self.points[i], &self.points[j]) < min2 {
                    return Err(Error::contract(format!(
                        "points {i} and {j} are closer than the spacing {}",
                        self.min_spacing
                    )));
                }
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            self.check_membership(p, rel_tol.max(1e-9))
                .map_err(|_| Error::contract(format!("point {i} violates the ambient constraint")))?;
        }
        Ok(())
    }

    fn check_membership(&self, p: &[f64], tol: f64) -> Result<()> {
        let norm = |s: &[f64]| s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ok = match self.ambient {
            AmbientConstraint::Sphere { radius } => (norm(p) - radius).abs() <= tol * radius,
            AmbientConstraint::EqualNorms { n, lo, hi } => {
                let (x, y) = (norm(&p[..n]), norm(&p[n..]));
                (x - y).abs() <= tol * hi && x >= lo - tol * hi && x <= hi + tol * hi
            }
            AmbientConstraint::Cone { n, lo, hi } => {
                let (x, y, z) = (norm(&p[..n]), norm(&p[n..2 * n]), norm(&p[2 * n..]));
                let xy = (x * x + y * y).sqrt();
                (xy - z).abs() <= tol * hi
                    && x >= lo - tol * hi
                    && x <= hi + tol * hi
                    && y >= lo - tol * hi
                    && y <= hi + tol * hi
            }
            AmbientConstraint::Ball { radius } => norm(p) <= radius * (1.0 + tol),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::contract("ambient constraint violated"))
        }
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Spacing-respecting maximum count on a scale-R surface of effective
/// dimension exponent `e`: ceil(R^e).
fn count_cap(r: f64, e: f64) -> usize {
    r.powf(e).ceil() as usize
}

fn min_count(cap: usize) -> usize {
    ((cap as f64 * MIN_COUNT_FRACTION).floor() as usize).max(1)
}

/// Points on the sphere |p| = R in dimension 2n, pairwise at least
/// sqrt(R) apart, at most ceil(R^(n - 1/2)) of them. With `coordinate_floor`
/// set, every coordinate of the scaled point p/R stays >= 1/(10n), which
/// keeps the later modulations strictly inside the positive orthant.
pub fn sphere_points(r: f64, n: usize, seed: u64, coordinate_floor: bool) -> Result<PointCloud> {
    check_scale(r, n)?;
    let d = 2 * n;
    let cap = count_cap(r, n as f64 - 0.5);
    let spacing = r.sqrt();
    let points = if n == 1 {
        circle_points(r, cap, spacing, coordinate_floor)
    } else {
        let floor = r / (10.0 * n as f64);
        let accept = move |p: &[f64]| !coordinate_floor || p.iter().all(|&v| v >= floor);
        let mut stream = GaussStream::new(seed, d);
        draw_separated(cap, spacing, accept, || {
            let mut p = stream.next_gaussians();
            to_sphere(&mut p, r, coordinate_floor);
            p
        })
    };
    finish(points, spacing, AmbientConstraint::Sphere { radius: r }, cap)
}

/// Points (x, y) in R^n x R^n with |x| = |y| in [R/2, R], spacing sqrt(R),
/// count capped at ceil(R^(n - 1/2)). The floor keeps x strictly inside
/// the positive orthant and y inside the negative one.
pub fn separation_points(
    r: f64,
    n: usize,
    seed: u64,
    coordinate_floor: bool,
) -> Result<PointCloud> {
    check_scale(r, n)?;
    let cap = count_cap(r, n as f64 - 0.5);
    let spacing = r.sqrt();
    let ambient = AmbientConstraint::EqualNorms { n, lo: r / 2.0, hi: r };
    let points = if n == 1 {
        // Radial grid along the branch (x, -x): Euclidean spacing is
        // sqrt(2) times the radial step.
        let step = (r / 2.0).sqrt();
        let count = (((r / 2.0) / step).floor() as usize + 1).min(cap);
        (0..count)
            .map(|i| {
                let rad = r / 2.0 + i as f64 * step;
                vec![rad, -rad]
            })
            .collect()
    } else {
        // The floor applies to the modulation blocks x/R and -y/R, so the
        // y block must sit inside the negative orthant.
        let floor = r / (10.0 * n as f64);
        let accept = move |p: &[f64]| {
            !coordinate_floor
                || (p[..n].iter().all(|&v| v >= floor) && p[n..].iter().all(|&v| -v >= floor))
        };
        let mut radius = Halton::new(seed, 1);
        let mut xs = GaussStream::new(seed ^ 0x9e37_79b9_7f4a_7c15, n);
        let mut ys = GaussStream::new(seed ^ 0x1657_6677_39a1_bb37, n);
        draw_separated(cap, spacing, accept, || {
            let rad = r / 2.0 + radius.next_point()[0] * (r / 2.0);
            let mut x = xs.next_gaussians();
            let mut y = ys.next_gaussians();
            to_sphere(&mut x, rad, coordinate_floor);
            to_sphere(&mut y, rad, coordinate_floor);
            for v in &mut y {
                *v = -*v;
            }
            x.extend_from_slice(&y);
            x
        })
    };
    finish(points, spacing, ambient, cap)
}

/// Points (x, y, z) in R^(3n) on the cone |x|^2 + |y|^2 = |z|^2 with
/// |x|, |y| in [R/2, R], spacing sqrt(R), count capped at
/// ceil(R^((3n-1)/2)).
pub fn cone_points(r: f64, n: usize, seed: u64, coordinate_floor: bool) -> Result<PointCloud> {
    check_scale(r, n)?;
    let cap = count_cap(r, (3.0 * n as f64 - 1.0) / 2.0);
    let spacing = r.sqrt();
    let ambient = AmbientConstraint::Cone { n, lo: r / 2.0, hi: r };
    let points = if n == 1 {
        // Two radial grids with step sqrt(R); the z coordinate follows.
        let step = r.sqrt();
        let per_axis = ((r / 2.0) / step).floor() as usize + 1;
        let mut pts = Vec::new();
        'outer: for i in 0..per_axis {
            for j in 0..per_axis {
                if pts.len() == cap {
                    break 'outer;
                }
                let (x, y) = (r / 2.0 + i as f64 * step, r / 2.0 + j as f64 * step);
                pts.push(vec![x, y, x.hypot(y)]);
            }
        }
        pts
    } else {
        let floor = r / (10.0 * n as f64);
        let accept = move |p: &[f64]| !coordinate_floor || p.iter().all(|&v| v >= floor);
        let mut radii = Halton::new(seed, 2);
        let mut xs = GaussStream::new(seed ^ 0x9e37_79b9_7f4a_7c15, n);
        let mut ys = GaussStream::new(seed ^ 0x1657_6677_39a1_bb37, n);
        let mut zs = GaussStream::new(seed ^ 0x60be_e2be_e120_fc15, n);
        draw_separated(cap, spacing, accept, || {
            let rads = radii.next_point();
            let rx = r / 2.0 + rads[0] * (r / 2.0);
            let ry = r / 2.0 + rads[1] * (r / 2.0);
            let mut x = xs.next_gaussians();
            let mut y = ys.next_gaussians();
            let mut z = zs.next_gaussians();
            to_sphere(&mut x, rx, coordinate_floor);
            to_sphere(&mut y, ry, coordinate_floor);
            to_sphere(&mut z, rx.hypot(ry), coordinate_floor);
            x.extend_from_slice(&y);
            x.extend_from_slice(&z);
            x
        })
    };
    finish(points, spacing, ambient, cap)
}

/// The lattice sqrt(R)·Z^n intersected with the closed ball of radius
/// R^m, in lexicographic order. Errs with the needed size if the count
/// would exceed `cap`.
pub fn ball_lattice_points(r: f64, m: u32, n: usize, cap: usize) -> Result<PointCloud> {
    check_scale(r, n)?;
    if m < 1 {
        return Err(Error::config("m", "ball exponent must be >= 1"));
    }
    let step = r.sqrt();
    let radius = r.powi(m as i32);
    let k_max = (radius / step).floor() as i64;
    let inside = |k: &[i64]| {
        let norm2: f64 = k.iter().map(|&v| (v as f64) * (v as f64)).sum();
        norm2 * r <= radius * radius
    };

    // Counting pass first so oversize requests fail with the true need.
    let mut needed: usize = 0;
    let mut idx = vec![-k_max; n];
    loop {
        if inside(&idx) {
            needed += 1;
        }
        if !advance(&mut idx, k_max) {
            break;
        }
    }
    if needed > cap {
        return Err(Error::ResourceCap { needed, cap });
    }

    let mut points = Vec::with_capacity(needed);
    let mut idx = vec![-k_max; n];
    loop {
        if inside(&idx) {
            points.push(idx.iter().map(|&k| k as f64 * step).collect());
        }
        if !advance(&mut idx, k_max) {
            break;
        }
    }
    Ok(PointCloud {
        points,
        min_spacing: step,
        ambient: AmbientConstraint::Ball { radius },
    })
}

/// Lexicographic odometer over [-k_max, k_max]^n; false once exhausted.
fn advance(idx: &mut [i64], k_max: i64) -> bool {
    for v in idx.iter_mut().rev() {
        if *v < k_max {
            *v += 1;
            return true;
        }
        *v = -k_max;
    }
    false
}

fn check_scale(r: f64, n: usize) -> Result<()> {
    if !(r >= 4.0) || !r.is_finite() {
        return Err(Error::config("R", format!("scale must be >= 4, got {r}")));
    }
    if n == 0 {
        return Err(Error::config("n", "block dimension must be >= 1"));
    }
    Ok(())
}

/// Normalizes `p` to radius `rad`; with `fold` set, first folds into the
/// positive orthant so coordinate floors are met with high probability.
fn to_sphere(p: &mut [f64], rad: f64, fold: bool) {
    if fold {
        for v in p.iter_mut() {
            *v = v.abs();
        }
    }
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for v in p.iter_mut() {
        *v *= rad / norm;
    }
}

/// Greedy thinning: accept a candidate only if it passes `accept` and
/// clears every previously accepted point by `spacing`, until `cap`
/// points are accepted or the draw budget runs out. Sequential by
/// construction, hence deterministic.
fn draw_separated(
    cap: usize,
    spacing: f64,
    accept: impl Fn(&[f64]) -> bool,
    mut candidate: impl FnMut() -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let budget = cap.saturating_mul(DRAW_BUDGET_PER_POINT) + DRAW_BUDGET_FLOOR;
    let mut grid = SpacingGrid::new(spacing);
    let mut accepted: Vec<Vec<f64>> = Vec::new();
    for _ in 0..budget {
        if accepted.len() == cap {
            break;
        }
        let p = candidate();
        if !accept(&p) {
            continue;
        }
        if grid.clears(&p, &accepted) {
            grid.insert(&p, accepted.len());
            accepted.push(p);
        }
    }
    accepted
}

fn finish(
    points: Vec<Vec<f64>>,
    spacing: f64,
    ambient: AmbientConstraint,
    cap: usize,
) -> Result<PointCloud> {
    let need = min_count(cap);
    if points.len() < need {
        return Err(Error::Construction(format!(
            "separated sampling produced {} points where at least {} of {} were required",
            points.len(),
            need,
            cap
        )));
    }
    Ok(PointCloud {
        points,
        min_spacing: spacing,
        ambient,
    })
}

/// Evenly spaced points on the circle of radius R whose chord step is
/// exactly sqrt(R). With the floor, the arc is restricted to the part of
/// the first quadrant where both scaled coordinates stay >= 1/10.
fn circle_points(r: f64, cap: usize, spacing: f64, coordinate_floor: bool) -> Vec<Vec<f64>> {
    let step = 2.0 * (spacing / (2.0 * r)).asin();
    let (theta0, arc) = if coordinate_floor {
        let lo = 0.1f64.asin();
        (lo, 0.1f64.acos() - lo)
    } else {
        (0.0, 2.0 * std::f64::consts::PI - step)
    };
    let count = ((arc / step).floor() as usize + 1).min(cap);
    (0..count)
        .map(|i| {
            let th = theta0 + i as f64 * step;
            vec![r * th.cos(), r * th.sin()]
        })
        .collect()
}

/// Cell-hash index used by the greedy thinning pass: cells of side
/// `spacing`, so any conflicting point lives in a 3^d neighborhood.
struct SpacingGrid {
    cell: f64,
    spacing2: f64,
    bits: u32,
    map: HashMap<u128, Vec<u32>>,
}

impl SpacingGrid {
    fn new(spacing: f64) -> Self {
        SpacingGrid {
            cell: spacing,
            spacing2: spacing * spacing,
            bits: 0,
            map: HashMap::new(),
        }
    }

    /// Offset-binary cell coordinates packed into one u128. Axis width
    /// shrinks with dimension; at the 9 axes of the widest family there
    /// are still 14 bits per axis, enough for scales up to ~1e7.
    fn key(&self, p: &[f64]) -> u128 {
        let half = 1i64 << (self.bits - 1);
        let mut key: u128 = 0;
        for &v in p {
            let cell = (v / self.cell).floor() as i64 + half;
            debug_assert!(cell >= 0 && cell < 2 * half, "cell index out of key range");
            key = (key << self.bits) | (cell as u128 & ((1 << self.bits) - 1));
        }
        key
    }

    fn neighbors(&self, p: &[f64]) -> Vec<u128> {
        let d = p.len();
        let mut keys = Vec::with_capacity(3usize.pow(d as u32));
        let mut shifted = vec![0.0; d];
        let mut offsets = vec![-1i32; d];
        loop {
            for (i, &off) in offsets.iter().enumerate() {
                shifted[i] = p[i] + off as f64 * self.cell;
            }
            keys.push(self.key(&shifted));
            let mut carry = true;
            for o in offsets.iter_mut().rev() {
                if *o < 1 {
                    *o += 1;
                    carry = false;
                    break;
                }
                *o = -1;
            }
            if carry {
                break;
            }
        }
        keys
    }

    fn clears(&mut self, p: &[f64], accepted: &[Vec<f64>]) -> bool {
        if self.bits == 0 {
            assert!(p.len() <= 10, "spacing index supports at most 10 axes");
            self.bits = (128 / p.len() as u32).min(21);
        }
        for key in self.neighbors(p) {
            if let Some(bucket) = self.map.get(&key) {
                for &i in bucket {
                    if dist2(p, &accepted[i as usize]) < self.spacing2 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: &[f64], index: usize) {
        self.map.entry(self.key(p)).or_default().push(index as u32);
    }
}

/// Low-discrepancy Halton sequence over the first `dim` prime bases,
/// started at a seed-dependent offset.
struct Halton {
    index: u64,
    bases: Vec<u64>,
    out: Vec<f64>,
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

impl Halton {
    fn new(seed: u64, dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "too many Halton dimensions");
        Halton {
            index: 64 + seed.wrapping_mul(2654435761) % 100_000,
            bases: PRIMES[..dim].to_vec(),
            out: vec![0.0; dim],
        }
    }

    fn next_point(&mut self) -> &[f64] {
        for (slot, &b) in self.out.iter_mut().zip(&self.bases) {
            *slot = radical_inverse(self.index, b);
        }
        self.index += 1;
        &self.out
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut scale) = (0.0, inv);
    while i > 0 {
        f += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    f
}

/// Halton points pushed through the inverse normal CDF: a deterministic
/// stream of standard-normal vectors.
struct GaussStream {
    halton: Halton,
}

impl GaussStream {
    fn new(seed: u64, dim: usize) -> Self {
        GaussStream {
            halton: Halton::new(seed, dim),
        }
    }

    fn next_gaussians(&mut self) -> Vec<f64> {
        self.halton
            .next_point()
            .iter()
            .map(|&u| inv_norm_cdf(u.clamp(1e-12, 1.0 - 1e-12)))
            .collect()
    }
}

/// Acklam's rational approximation to the standard normal quantile,
/// accurate to ~1e-9 absolute; ample for sampling directions.
#[allow(clippy::excessive_precision)] // published coefficients, kept verbatim
fn inv_norm_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inv_norm_cdf(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_chord_spacing_is_exact_to_rounding() {
        for &(r, floor) in &[(16.0, true), (64.0, true), (256.0, false)] {
            let cloud = sphere_points(r, 1, 0, floor).unwrap();
            cloud.verify(1e-12).unwrap();
            // Adjacent chords equal sqrt(R) by construction.
            let d = dist2(&cloud.points[0], &cloud.points[1]).sqrt();
            assert!((d - r.sqrt()).abs() <= 1e-9 * r.sqrt(), "r={r} d={d}");
        }
    }

    #[test]
    fn circle_counts_track_the_cap() {
        // Without the floor the full circle supports ~2π·sqrt(R) chords,
        // so the cap ceil(sqrt(R)) binds.
        let cloud = sphere_points(256.0, 1, 0, false).unwrap();
        assert_eq!(cloud.len(), 16);
        // With the floor the admissible arc (~1.37 rad) still holds more
        // than the cap at this scale.
        let cloud = sphere_points(256.0, 1, 0, true).unwrap();
        assert_eq!(cloud.len(), 16);
    }

    #[test]
    fn circle_floor_keeps_scaled_coordinates_large() {
        let cloud = sphere_points(64.0, 1, 7, true).unwrap();
        for p in &cloud.points {
            for &v in p {
                assert!(v / 64.0 >= 0.1 - 1e-12, "coordinate {v} under floor");
            }
        }
    }

    #[test]
    fn sphere_n2_respects_spacing_floor_and_envelope() {
        let r = 16.0;
        let cloud = sphere_points(r, 2, 3, true).unwrap();
        cloud.verify(1e-12).unwrap();
        let cap = count_cap(r, 1.5); // 64
        assert!(cloud.len() <= cap);
        assert!(cloud.len() >= min_count(cap), "got {}", cloud.len());
        for p in &cloud.points {
            for &v in p {
                assert!(v >= r / 20.0 - 1e-12);
            }
        }
    }

    #[test]
    fn sphere_unfloored_covers_all_orthants_eventually() {
        let cloud = sphere_points(16.0, 2, 1, false).unwrap();
        assert!(cloud.points.iter().any(|p| p.iter().any(|&v| v < 0.0)));
    }

    #[test]
    fn separation_grid_lies_on_the_antidiagonal_branch() {
        let cloud = separation_points(256.0, 1, 0, true).unwrap();
        cloud.verify(1e-12).unwrap();
        assert_eq!(cloud.len(), 12);
        for p in &cloud.points {
            assert!((p[0] + p[1]).abs() < 1e-12); // y = -x
            assert!(p[0] >= 128.0 && p[0] <= 256.0);
        }
        // Euclidean spacing between consecutive radii is sqrt(R).
        let d = dist2(&cloud.points[0], &cloud.points[1]).sqrt();
        assert!((d - 16.0).abs() < 1e-9);
    }

    #[test]
    fn separation_n2_keeps_equal_norms() {
        let cloud = separation_points(16.0, 2, 5, true).unwrap();
        cloud.verify(1e-12).unwrap();
        for p in &cloud.points {
            let x: f64 = p[..2].iter().map(|v| v * v).sum::<f64>().sqrt();
            let y: f64 = p[2..].iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((x - y).abs() <= 1e-9 * 16.0);
            assert!(p[..2].iter().all(|&v| v > 0.0));
            assert!(p[2..].iter().all(|&v| v < 0.0));
        }
    }

    #[test]
    fn cone_grid_count_and_membership() {
        let cloud = cone_points(256.0, 1, 0, true).unwrap();
        cloud.verify(1e-12).unwrap();
        assert_eq!(cloud.len(), 81); // (sqrt(R)/2 + 1)^2
        for p in &cloud.points {
            assert!((p[0] * p[0] + p[1] * p[1] - p[2] * p[2]).abs() <= 1e-6);
        }
    }

    #[test]
    fn cone_n2_respects_cap_and_cone_constraint() {
        let cloud = cone_points(16.0, 2, 2, true).unwrap();
        cloud.verify(1e-12).unwrap();
        assert!(cloud.len() <= count_cap(16.0, 2.5));
    }

    #[test]
    fn lattice_counts_match_closed_forms() {
        // n=1, m=1, R=16: lattice 4Z in [-16, 16] has 9 points.
        let cloud = ball_lattice_points(16.0, 1, 1, 1 << 20).unwrap();
        assert_eq!(cloud.len(), 9);
        cloud.verify(0.0).unwrap();
        // n=1, m=2, R=64: 8Z in [-4096, 4096] has 1025 points.
        let cloud = ball_lattice_points(64.0, 2, 1, 1 << 20).unwrap();
        assert_eq!(cloud.len(), 1025);
        // Envelope: within the 2·R^(mn - n/2) + 1 bound.
        assert!(cloud.len() as f64 <= 2.0 * 64.0f64.powf(1.5) + 1.0);
    }

    #[test]
    fn lattice_is_lexicographic_and_exact() {
        let cloud = ball_lattice_points(16.0, 1, 2, 1 << 20).unwrap();
        cloud.verify(0.0).unwrap();
        let pts = &cloud.points;
        for w in pts.windows(2) {
            assert!(w[0][0] < w[1][0] || (w[0][0] == w[1][0] && w[0][1] < w[1][1]));
        }
    }

    #[test]
    fn lattice_cap_errors_name_the_need() {
        let err = ball_lattice_points(64.0, 2, 1, 100).unwrap_err();
        match err {
            Error::ResourceCap { needed, cap } => {
                assert_eq!(needed, 1025);
                assert_eq!(cap, 100);
            }
            other => panic!("expected resource cap error, got {other}"),
        }
    }

    #[test]
    fn rejects_tiny_scales() {
        assert!(sphere_points(2.0, 1, 0, true).is_err());
        assert!(ball_lattice_points(3.0, 1, 1, 100).is_err());
    }

    #[test]
    fn rebuilds_are_bit_identical() {
        let a = sphere_points(64.0, 2, 9, true).unwrap();
        let b = sphere_points(64.0, 2, 9, true).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            for (x, y) in p.iter().zip(q) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn different_seeds_give_different_clouds() {
        let a = sphere_points(64.0, 2, 1, false).unwrap();
        let b = sphere_points(64.0, 2, 2, false).unwrap();
        assert!(a.points != b.points);
    }

    #[test]
    fn quantile_matches_known_values() {
        // Φ^{-1}(0.975) = 1.959964...
        assert!((inv_norm_cdf(0.975) - 1.959964).abs() < 1e-5);
        assert!((inv_norm_cdf(0.5)).abs() < 1e-12);
        assert!((inv_norm_cdf(0.025) + 1.959964).abs() < 1e-5);
    }
}
