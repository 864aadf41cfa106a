//! Gaussian wavepacket terms and sums of terms sharing one width.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::Family;
use crate::reduce::tree_sum_fn_c;
use crate::signature::BlockSignature;

/// One modulated Gaussian wavepacket
///
///   g(x) = amplitude · exp(i x·modulation) · exp(-|x - center|² / (2 width)),
///
/// with real center and modulation vectors of the ambient dimension and a
/// strictly positive shared width w = C·R. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    amplitude: Complex64,
    center: Vec<f64>,
    modulation: Vec<f64>,
    width: f64,
}

impl GaussianTerm {
    pub fn new(
        amplitude: Complex64,
        center: Vec<f64>,
        modulation: Vec<f64>,
        width: f64,
    ) -> Result<Self> {
        if center.len() != modulation.len() {
            return Err(Error::DimensionMismatch {
                context: "GaussianTerm::new (modulation vs center)",
                expected: center.len(),
                got: modulation.len(),
            });
        }
        if center.is_empty() {
            return Err(Error::contract("term dimension must be >= 1"));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::contract(format!(
                "term width must be finite and > 0, got {width}"
            )));
        }
        Ok(GaussianTerm {
            amplitude,
            center,
            modulation,
            width,
        })
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn modulation(&self) -> &[f64] {
        &self.modulation
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Value of the (un-evolved) term at an ambient point.
    pub fn value_at(&self, point: &[f64]) -> Result<Complex64> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "GaussianTerm::value_at",
                expected: self.dim(),
                got: point.len(),
            });
        }
        let mut phase = 0.0;
        let mut dist2 = 0.0;
        for ((&x, &mu), &c) in point.iter().zip(&self.modulation).zip(&self.center) {
            phase += x * mu;
            let d = x - c;
            dist2 += d * d;
        }
        Ok(self.amplitude * Complex64::new(-dist2 / (2.0 * self.width), phase).exp())
    }
}

/// Provenance carried by a built family; absent for hand-assembled sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketMeta {
    pub family: Family,
    pub n: usize,
    pub r: f64,
    pub c: f64,
    pub m: Option<u32>,
    pub seed: u64,
    /// Minimum pairwise spacing guaranteed by the point construction.
    pub min_spacing: f64,
}

/// A finite sum of Gaussian terms sharing one signature and one width.
/// Immutable once built; every operation takes `&self` and returns new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSum {
    signature: BlockSignature,
    terms: Vec<GaussianTerm>,
    meta: Option<PacketMeta>,
}

impl WavepacketSum {
    /// Build from parts, enforcing the shared-width and dimension contracts.
    pub fn new(signature: BlockSignature, terms: Vec<GaussianTerm>) -> Result<Self> {
        Self::with_meta(signature, terms, None)
    }

    pub fn with_meta(
        signature: BlockSignature,
        terms: Vec<GaussianTerm>,
        meta: Option<PacketMeta>,
    ) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::contract("wavepacket sum needs at least one term"));
        }
        let d = signature.ambient_dim();
        for (i, t) in terms.iter().enumerate() {
            if t.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "WavepacketSum::new (term dim vs signature)",
                    expected: d,
                    got: terms[i].dim(),
                });
            }
        }
        let w0 = terms[0].width();
        if terms.iter().any(|t| t.width() != w0) {
            return Err(Error::contract("all terms in a sum must share one width"));
        }
        Ok(WavepacketSum {
            signature,
            terms,
            meta,
        })
    }

    pub fn signature(&self) -> &BlockSignature {
        &self.signature
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn width(&self) -> f64 {
        self.terms[0].width()
    }

    pub fn ambient_dim(&self) -> usize {
        self.signature.ambient_dim()
    }

    pub fn meta(&self) -> Option<&PacketMeta> {
        self.meta.as_ref()
    }

    /// Σ_k g_k(point) at t = 0, pairwise-tree summed.
    pub fn value_at(&self, point: &[f64]) -> Result<Complex64> {
        if point.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "WavepacketSum::value_at",
                expected: self.ambient_dim(),
                got: point.len(),
            });
        }
        Ok(tree_sum_fn_c(self.terms.len(), &|k| {
            self.terms[k].value_at(point).expect("dims checked above")
        }))
    }

    /// Value of the evolved sum at (t, point), pairwise-tree summed.
    pub fn evolve_at(&self, t: f64, point: &[f64]) -> Result<Complex64> {
        if point.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "WavepacketSum::evolve_at",
                expected: self.ambient_dim(),
                got: point.len(),
            });
        }
        Ok(tree_sum_fn_c(self.terms.len(), &|k| {
            crate::evolve::evolve_eval(&self.terms[k], &self.signature, t, point)
                .expect("dims checked above")
        }))
    }

    /// Hermitian symmetrization for two-block signatures of equal block
    /// dimension: appends, for every term, its swap-conjugate partner
    /// (amplitude conjugated, blocks of the center swapped, modulation blocks
    /// swapped and negated). The symmetrized kernel satisfies
    /// K(x, y) = conj(K(y, x)), and the property is preserved by the mixed
    /// two-block flow, which forces a real diagonal trace.
    pub fn hermitian_symmetrized(&self) -> Result<WavepacketSum> {
        if self.signature.num_blocks() != 2 {
            return Err(Error::contract(
                "hermitian symmetrization needs a two-block signature",
            ));
        }
        let n = self.signature.uniform_block_dim()?;
        let mut terms = self.terms.clone();
        for t in &self.terms {
            let (c1, c2) = t.center().split_at(n);
            let (m1, m2) = t.modulation().split_at(n);
            let center = [c2, c1].concat();
            let modulation: Vec<f64> = m2.iter().chain(m1.iter()).map(|x| -x).collect();
            terms.push(GaussianTerm::new(
                t.amplitude().conj(),
                center,
                modulation,
                t.width(),
            )?);
        }
        WavepacketSum::new(self.signature.clone(), terms)
    }
}
