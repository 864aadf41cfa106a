//! Block signatures: how the ambient coordinates split into blocks and which
//! sign of the half-Laplacian drives each block.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the generator on one block: the block evolves under
/// exp(i t s Δ/2) with s = +1 (`Plus`) or s = -1 (`Minus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockSign {
    Plus,
    Minus,
}

impl BlockSign {
    pub fn as_f64(self) -> f64 {
        match self {
            BlockSign::Plus => 1.0,
            BlockSign::Minus => -1.0,
        }
    }
}

/// An ordered list of (dimension, sign) blocks. The ambient dimension is the
/// sum of block dimensions. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSignature {
    blocks: Vec<(usize, BlockSign)>,
}

impl BlockSignature {
    /// Build from explicit blocks. Errors if empty or if any block has
    /// dimension zero.
    pub fn new(blocks: Vec<(usize, BlockSign)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::contract("signature needs at least one block"));
        }
        if blocks.iter().any(|&(d, _)| d == 0) {
            return Err(Error::contract("signature blocks must have dimension >= 1"));
        }
        Ok(BlockSignature { blocks })
    }

    /// Two n-dimensional blocks, both with positive sign:
    /// exp(i t (Δ_x + Δ_y)/2).
    pub fn pair_plus(n: usize) -> Self {
        BlockSignature::new(vec![(n, BlockSign::Plus), (n, BlockSign::Plus)])
            .expect("n >= 1 checked by caller")
    }

    /// Two n-dimensional blocks with opposite signs:
    /// exp(i t (Δ_x - Δ_y)/2).
    pub fn pair_mixed(n: usize) -> Self {
        BlockSignature::new(vec![(n, BlockSign::Plus), (n, BlockSign::Minus)])
            .expect("n >= 1 checked by caller")
    }

    /// Three n-dimensional blocks, signs (+, +, -):
    /// exp(i t (Δ_x + Δ_y - Δ_z)/2).
    pub fn triple(n: usize) -> Self {
        BlockSignature::new(vec![
            (n, BlockSign::Plus),
            (n, BlockSign::Plus),
            (n, BlockSign::Minus),
        ])
        .expect("n >= 1 checked by caller")
    }

    pub fn blocks(&self) -> &[(usize, BlockSign)] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total ambient dimension d = Σ block dims.
    pub fn ambient_dim(&self) -> usize {
        self.blocks.iter().map(|&(d, _)| d).sum()
    }

    /// Offset of block `j` within an ambient vector.
    pub fn block_offset(&self, j: usize) -> usize {
        self.blocks[..j].iter().map(|&(d, _)| d).sum()
    }

    /// All blocks share one dimension n (required for diagonal restriction);
    /// returns n or an error.
    pub fn uniform_block_dim(&self) -> Result<usize> {
        let n = self.blocks[0].0;
        if self.blocks.iter().any(|&(d, _)| d != n) {
            return Err(Error::contract(
                "diagonal restriction needs equal block dimensions",
            ));
        }
        Ok(n)
    }

    /// Σ_j s_j |v_j|² over blocks of an ambient vector.
    pub fn signed_quadratic(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                context: "signed_quadratic",
                expected: self.ambient_dim(),
                got: v.len(),
            });
        }
        let mut q = 0.0;
        let mut off = 0;
        for &(d, s) in &self.blocks {
            let norm2: f64 = v[off..off + d].iter().map(|x| x * x).sum();
            q += s.as_f64() * norm2;
            off += d;
        }
        Ok(q)
    }
}
