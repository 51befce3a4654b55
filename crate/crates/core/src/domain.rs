//! Embedding domains: which coefficients carry bits, and in what order.
//!
//! Domain 1 uses all 64 positions of every block. Domains 2..=6 restrict to
//! the counter-diagonals `row + col` in `{n-1, ..., 7}` — dropping the
//! lowest-frequency diagonals one at a time while never reaching past the
//! block's anti-diagonal. Higher-numbered domains carry fewer bits but sit
//! in coefficients whose larger quantization steps survive recompression
//! better, which is exactly the retreat the adaptive embedder performs.
//!
//! Scan order is fixed everywhere: blocks in raster order, positions within
//! a block in zigzag order restricted to the domain. Embedder and extractor
//! only ever communicate through this order.

use crate::cost::DitherInfo;
use crate::error::Error;
use crate::jpeg::{CoeffImage, QuantTable, ZIGZAG};
use crate::Result;
use std::sync::OnceLock;

/// Largest DC / AC magnitudes the serializer can emit; flips are steered
/// away from the rim so an embedded image always stays encodable.
const DC_FLIP_LIMIT: i32 = 2047;
const AC_FLIP_LIMIT: i32 = 1023;

/// One of the six carrier sets, index 1..=6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct EmbeddingDomain(u8);

impl EmbeddingDomain {
    pub fn new(index: u8) -> Result<Self> {
        if (1..=6).contains(&index) {
            Ok(EmbeddingDomain(index))
        } else {
            Err(Error::InvalidDomainIndex(index))
        }
    }

    /// All six domains, widest first (the escalation order).
    pub fn all() -> [EmbeddingDomain; 6] {
        [1, 2, 3, 4, 5, 6].map(EmbeddingDomain)
    }

    pub fn index(&self) -> u8 {
        self.0
    }

    /// In-block positions (row-major indices) in scan order.
    pub fn positions(&self) -> &'static [usize] {
        static TABLES: OnceLock<[Vec<usize>; 6]> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            std::array::from_fn(|i| {
                let n = i + 1;
                ZIGZAG
                    .iter()
                    .copied()
                    .filter(|&m| {
                        let s = m / 8 + m % 8;
                        n == 1 || (s >= n - 1 && s <= 7)
                    })
                    .collect()
            })
        });
        &tables[(self.0 - 1) as usize]
    }

    /// Carrier positions per block.
    pub fn cardinality(&self) -> usize {
        self.positions().len()
    }
}

impl std::fmt::Display for EmbeddingDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 == 1 {
            write!(f, "E64")
        } else {
            write!(f, "E{}-8", self.0)
        }
    }
}

/// In-block positions of `domain` in scan order (free-function form).
pub fn domain_positions(domain: EmbeddingDomain) -> &'static [usize] {
    domain.positions()
}

/// How a flipped element chooses between the two adjacent intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionRule {
    /// Take the direction with the smaller flip price; ties go up.
    #[default]
    MinCost,
    /// Diagnostics: always move up / always move down (still bounded by the
    /// encodable coefficient range).
    AlwaysPlus,
    AlwaysMinus,
}

/// One carrier coefficient in scan order.
#[derive(Debug, Clone, Copy)]
pub struct CoverElement {
    /// Block index (raster order).
    pub block: usize,
    /// Row-major in-block position.
    pub pos: usize,
    /// Parity bit the unmodified element reads as.
    pub cover_bit: u8,
    /// Flip prices per direction.
    pub xi_plus: f64,
    pub xi_minus: f64,
    /// Dither distances per direction.
    pub d_plus: f64,
    pub d_minus: f64,
    /// Quantization interval index of the requantization reference.
    pub interval: i32,
}

/// The carrier in scan order, ready for the coding layers.
#[derive(Debug, Clone)]
pub struct CoverSequence {
    pub domain: EmbeddingDomain,
    pub elements: Vec<CoverElement>,
}

impl CoverSequence {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The parity bits of the unmodified cover, in scan order.
    pub fn cover_bits(&self) -> Vec<u8> {
        self.elements.iter().map(|e| e.cover_bit).collect()
    }

    /// Flip price of each element (cheaper direction).
    pub fn flip_costs(&self) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| e.xi_plus.min(e.xi_minus))
            .collect()
    }
}

/// Walks the cover in scan order and gathers the per-element dither
/// geometry into a [`CoverSequence`].
pub fn build_cover_sequence(
    cover: &CoeffImage,
    domain: EmbeddingDomain,
    dither: &DitherInfo,
) -> Result<CoverSequence> {
    let n = cover.n_blocks() * 64;
    if dither.cover_bit.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "dither info covers {} coefficients, image has {n}",
            dither.cover_bit.len()
        )));
    }
    let positions = domain.positions();
    let mut elements = Vec::with_capacity(cover.n_blocks() * positions.len());
    for block in 0..cover.n_blocks() {
        for &pos in positions {
            let i = block * 64 + pos;
            elements.push(CoverElement {
                block,
                pos,
                cover_bit: dither.cover_bit[i],
                xi_plus: dither.xi_plus[i],
                xi_minus: dither.xi_minus[i],
                d_plus: dither.d_plus[i],
                d_minus: dither.d_minus[i],
                interval: dither.interval[i],
            });
        }
    }
    Ok(CoverSequence { domain, elements })
}

/// Writes stego bits back into coefficients.
///
/// Elements whose stego bit equals the cover bit stay untouched — except in
/// the rare case where spatial rounding moved the requantization reference
/// into a different interval than the stored coefficient (their parities
/// disagree); such elements are re-quantized to the reference interval `k`
/// so that what a re-encoding decoder reads always matches the cover bit.
/// Flipped elements move to the center of an adjacent interval, `k+1` or
/// `k-1` per `rule`, steered inward at the rim of the encodable range (both
/// neighbors flip parity identically, so this never changes the bit).
pub fn apply_stego_sequence(
    cover: &CoeffImage,
    seq: &CoverSequence,
    stego_bits: &[u8],
    rule: DirectionRule,
) -> Result<CoeffImage> {
    if stego_bits.len() != seq.len() {
        return Err(Error::LengthMismatch(format!(
            "{} stego bits for {} carrier elements",
            stego_bits.len(),
            seq.len()
        )));
    }
    let mut stego = cover.clone();
    for (e, &bit) in seq.elements.iter().zip(stego_bits) {
        let stored = cover.coeff(e.block, e.pos) as i32;
        let new = if bit == e.cover_bit {
            if stored.rem_euclid(2) as u8 == e.cover_bit {
                stored
            } else {
                e.interval // re-quantize; parity of k is the cover bit
            }
        } else {
            let limit = if e.pos == 0 { DC_FLIP_LIMIT } else { AC_FLIP_LIMIT };
            let up = match rule {
                DirectionRule::MinCost => e.xi_plus <= e.xi_minus,
                DirectionRule::AlwaysPlus => true,
                DirectionRule::AlwaysMinus => false,
            };
            let up = if e.interval + 1 > limit {
                false
            } else if e.interval - 1 < -limit {
                true
            } else {
                up
            };
            if up {
                e.interval + 1
            } else {
                e.interval - 1
            }
        };
        stego.block_mut(e.block)[e.pos] = new as i16;
    }
    Ok(stego)
}

/// Reads carrier bits from a received image: de-quantize with the table the
/// image arrived with, then take the parity of the nearest interval under
/// the *cover* table. When the channel did not requantize, this reduces to
/// the parity of the stored coefficient.
pub fn read_stego_bits(
    received: &CoeffImage,
    domain: EmbeddingDomain,
    cover_table: &QuantTable,
) -> Vec<u8> {
    let positions = domain.positions();
    let mut bits = Vec::with_capacity(received.n_blocks() * positions.len());
    for block in 0..received.n_blocks() {
        for &pos in positions {
            let dequant = received.coeff(block, pos) as f64 * received.table().step(pos) as f64;
            let k = (dequant / cover_table.step(pos) as f64).round() as i64;
            bits.push(k.rem_euclid(2) as u8);
        }
    }
    bits
}
