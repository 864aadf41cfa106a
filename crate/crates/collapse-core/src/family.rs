//! The six counterexample families: three concentration ("p") families
//! built on curved surfaces and three spreading ("q") families built on
//! ball lattices, for each of the three block signatures.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::{GaussianTerm, PacketMeta, WavepacketSum};
use crate::points::{
    ball_lattice_points, cone_points, separation_points, sphere_points, PointCloud,
    DEFAULT_LATTICE_CAP,
};
use crate::signature::BlockSignature;

/// Family tags. The letter names the signature (Lambda two-plus, Gamma
/// plus-minus, G plus-plus-minus); the suffix names the regime the family
/// stresses (p: time exponent, q: space exponent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "lambda-p")]
    LambdaP,
    #[serde(rename = "lambda-q")]
    LambdaQ,
    #[serde(rename = "gamma-p")]
    GammaP,
    #[serde(rename = "gamma-q")]
    GammaQ,
    #[serde(rename = "g-p")]
    GP,
    #[serde(rename = "g-q")]
    GQ,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::LambdaP,
        Family::LambdaQ,
        Family::GammaP,
        Family::GammaQ,
        Family::GP,
        Family::GQ,
    ];

    pub fn is_q(self) -> bool {
        matches!(self, Family::LambdaQ | Family::GammaQ | Family::GQ)
    }

    pub fn signature(self, n: usize) -> BlockSignature {
        match self {
            Family::LambdaP | Family::LambdaQ => BlockSignature::pair_plus(n),
            Family::GammaP | Family::GammaQ => BlockSignature::pair_mixed(n),
            Family::GP | Family::GQ => BlockSignature::triple(n),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::LambdaP => "lambda-p",
            Family::LambdaQ => "lambda-q",
            Family::GammaP => "gamma-p",
            Family::GammaQ => "gamma-q",
            Family::GP => "g-p",
            Family::GQ => "g-q",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| {
                Error::config(
                    "family",
                    format!(
                        "unknown family {s:?}; expected one of lambda-p, lambda-q, gamma-p, \
                         gamma-q, g-p, g-q"
                    ),
                )
            })
    }
}

/// Default tube constant: wide enough that the diagonal of the evolved
/// two-block (and three-block) kernel keeps a positive real part across
/// the whole tube |x| <= sqrt(R), 0 <= t <= R. The phase of each diagonal
/// factor is bounded by atan(t/w) + |drift|²·t/(2w²) peaks; C = 4(n+1)
/// keeps the total strictly under pi/3, uniformly in R.
pub fn tube_constant(n: usize) -> f64 {
    4.0 * (n as f64 + 1.0)
}

/// Full recipe for building one family instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilySpecDe")]
pub struct FamilySpec {
    pub family: Family,
    /// Block dimension (each signature block is n-dimensional).
    pub n: usize,
    /// Scale parameter; packets concentrate at spatial scale ~R.
    pub r: f64,
    /// Tube constant; the shared packet width is C·R.
    pub c: f64,
    /// Ball exponent (q-families only): lattice fills the ball of radius R^m.
    pub m: Option<u32>,
    /// Unit modulation direction (q-families only); defaults to e_1.
    pub direction: Option<Vec<f64>>,
    /// Keep every scaled coordinate >= 1/(10n) (p-families).
    pub coordinate_floor: bool,
    pub seed: u64,
    /// Hard cap on lattice term counts.
    pub term_cap: usize,
}

/// Wire shape for deserialization: optional fields get their defaults
/// here, then the full validation runs.
#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FamilySpecDe {
    family: Family,
    n: usize,
    r: f64,
    c: Option<f64>,
    m: Option<u32>,
    direction: Option<Vec<f64>>,
    coordinate_floor: Option<bool>,
    seed: Option<u64>,
    term_cap: Option<usize>,
}

impl TryFrom<FamilySpecDe> for FamilySpec {
    type Error = Error;

    fn try_from(de: FamilySpecDe) -> Result<Self> {
        let spec = FamilySpec {
            family: de.family,
            n: de.n,
            r: de.r,
            c: de.c.unwrap_or_else(|| tube_constant(de.n)),
            m: de.m,
            direction: de.direction,
            coordinate_floor: de.coordinate_floor.unwrap_or(true),
            seed: de.seed.unwrap_or(0),
            term_cap: de.term_cap.unwrap_or(DEFAULT_LATTICE_CAP),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FamilySpec {
    /// Spec with the default tube constant, floor on, seed 0.
    pub fn new(family: Family, n: usize, r: f64) -> Self {
        FamilySpec {
            family,
            n,
            r,
            c: tube_constant(n),
            m: None,
            direction: None,
            coordinate_floor: true,
            seed: 0,
            term_cap: DEFAULT_LATTICE_CAP,
        }
    }

    pub fn with_m(mut self, m: u32) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Packet width shared by every term: w = C·R.
    pub fn width(&self) -> f64 {
        self.c * self.r
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "block dimension must be >= 1"));
        }
        if !(self.r >= 4.0) || !self.r.is_finite() {
            return Err(Error::config(
                "R",
                format!("scale must be >= 4, got {}", self.r),
            ));
        }
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(Error::config(
                "C",
                format!("tube constant must be >= 1, got {}", self.c),
            ));
        }
        if self.family.is_q() {
            match self.m {
                Some(m) if m >= 1 => {}
                Some(_) => {
                    return Err(Error::config("m", "ball exponent must be >= 1"));
                }
                None => {
                    return Err(Error::config(
                        "m",
                        format!("required for q-family {}", self.family),
                    ));
                }
            }
            if let Some(dir) = &self.direction {
                if dir.len() != self.n {
                    return Err(Error::DimensionMismatch {
                        context: "FamilySpec direction",
                        expected: self.n,
                        got: dir.len(),
                    });
                }
                let norm: f64 = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(Error::config(
                        "direction",
                        format!("must be a unit vector to 1e-12, |xi| = {norm}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Effective modulation direction for q-families.
    fn unit_direction(&self) -> Vec<f64> {
        self.direction.clone().unwrap_or_else(|| {
            let mut e1 = vec![0.0; self.n];
            e1[0] = 1.0;
            e1
        })
    }
}

/// Builds the family described by `spec`. Deterministic: identical specs
/// (including seed) produce bit-identical sums.
pub fn build_family(spec: &FamilySpec) -> Result<WavepacketSum> {
    spec.validate()?;
    match spec.family {
        Family::LambdaP => build_lambda_p(spec),
        Family::GammaP => build_gamma_p(spec),
        Family::GP => build_g_p(spec),
        Family::LambdaQ | Family::GammaQ | Family::GQ => build_q_family(spec),
    }
}

fn assemble(
    spec: &FamilySpec,
    cloud: &PointCloud,
    mut term_of: impl FnMut(&[f64]) -> Result<GaussianTerm>,
) -> Result<WavepacketSum> {
    let terms: Vec<GaussianTerm> = cloud
        .points
        .iter()
        .map(|p| term_of(p))
        .collect::<Result<_>>()?;
    let meta = PacketMeta {
        family: spec.family,
        n: spec.n,
        r: spec.r,
        c: spec.c,
        m: spec.m,
        seed: spec.seed,
        min_spacing: cloud.min_spacing,
    };
    WavepacketSum::with_meta(spec.family.signature(spec.n), terms, Some(meta))
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sphere family: packets centered at -p_k for p_k on the sphere |p| = R,
/// each modulated along its own outward direction p_k/R.
fn build_lambda_p(spec: &FamilySpec) -> Result<WavepacketSum> {
    let cloud = sphere_points(spec.r, spec.n, spec.seed, spec.coordinate_floor)?;
    let w = spec.width();
    assemble(spec, &cloud, |p| {
        let center = p.iter().map(|&v| -v).collect();
        let modulation = p.iter().map(|&v| v / spec.r).collect();
        GaussianTerm::new(ONE, center, modulation, w)
    })
}

/// Equal-norm family: points (x_k, y_k) with |x_k| = |y_k|; the
/// modulation (x_k/R, -y_k/R) makes the signed quadratic vanish.
fn build_gamma_p(spec: &FamilySpec) -> Result<WavepacketSum> {
    let cloud = separation_points(spec.r, spec.n, spec.seed, spec.coordinate_floor)?;
    let w = spec.width();
    let n = spec.n;
    assemble(spec, &cloud, |p| {
        let center = p.iter().map(|&v| -v).collect();
        let modulation = p
            .iter()
            .enumerate()
            .map(|(j, &v)| if j < n { v / spec.r } else { -v / spec.r })
            .collect();
        GaussianTerm::new(ONE, center, modulation, w)
    })
}

/// Cone family: points (x_k, y_k, z_k) with |x|² + |y|² = |z|²; the
/// modulation (x/R, y/R, -z/R) again kills the signed quadratic.
fn build_g_p(spec: &FamilySpec) -> Result<WavepacketSum> {
    let cloud = cone_points(spec.r, spec.n, spec.seed, spec.coordinate_floor)?;
    let w = spec.width();
    let n = spec.n;
    assemble(spec, &cloud, |p| {
        let center = p.iter().map(|&v| -v).collect();
        let modulation = p
            .iter()
            .enumerate()
            .map(|(j, &v)| if j < 2 * n { v / spec.r } else { -v / spec.r })
            .collect();
        GaussianTerm::new(ONE, center, modulation, w)
    })
}

/// Lattice families: centers replicate one lattice point across every
/// block; all terms share a single modulation built from the direction.
fn build_q_family(spec: &FamilySpec) -> Result<WavepacketSum> {
    let m = spec.m.expect("validated: q-families carry m");
    let cloud = ball_lattice_points(spec.r, m, spec.n, spec.term_cap)?;
    let w = spec.width();
    let xi = spec.unit_direction();
    let zero = vec![0.0; spec.n];
    let neg_xi: Vec<f64> = xi.iter().map(|&v| -v).collect();
    let blocks: Vec<&[f64]> = match spec.family {
        Family::LambdaQ => vec![&xi, &xi],
        Family::GammaQ => vec![&xi, &zero],
        Family::GQ => vec![&xi, &xi, &neg_xi],
        _ => unreachable!("p-families dispatch elsewhere"),
    };
    let modulation: Vec<f64> = blocks.into_iter().flatten().copied().collect();
    let num_blocks = spec.family.signature(spec.n).num_blocks();
    assemble(spec, &cloud, |x| {
        let mut center = Vec::with_capacity(num_blocks * spec.n);
        for _ in 0..num_blocks {
            center.extend(x.iter().map(|&v| -v));
        }
        GaussianTerm::new(ONE, center, modulation.clone(), w)
    })
}
