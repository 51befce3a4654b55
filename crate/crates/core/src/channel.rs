//! The attack the embedding must survive: lossy recompression.
//!
//! [`recompress`] is a faithful simulation of "open the image and save it
//! again": decode to pixels (rounding and clamping included) and re-encode
//! at some quality factor. [`ChannelModel`] names the three situations the
//! embedder plans for — a known recompression quality, an unknown one
//! (approximated by the cover's own quality), and a channel that forwards
//! the file untouched.

use crate::jpeg::{compress_with_table, decompress, ijg_quant_table, CoeffImage};
use crate::Result;
use crate::error::Error;

/// What happens to the image between sender and receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    /// Recompression at a known quality factor.
    Quality(u8),
    /// Recompression at an unknown setting; the cover's own quality factor
    /// is the planning assumption.
    CoverQuality,
    /// The file passes through bit-exact.
    Lossless,
}

impl ChannelModel {
    /// Runs the channel on `image`. `None` means the image passes through
    /// unchanged (no copy is made for the lossless case).
    pub fn simulate(&self, image: &CoeffImage) -> Result<Option<CoeffImage>> {
        match *self {
            ChannelModel::Lossless => Ok(None),
            ChannelModel::Quality(qf) => Ok(Some(recompress(image, qf)?)),
            ChannelModel::CoverQuality => {
                let out = match image.quality() {
                    Some(qf) => recompress(image, qf)?,
                    // Non-standard table: re-encode with that same table.
                    None => compress_with_table(&decompress(image), image.table().clone())?,
                };
                Ok(Some(out))
            }
        }
    }
}

impl std::fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelModel::Quality(qf) => write!(f, "recompress(q={qf})"),
            ChannelModel::CoverQuality => write!(f, "recompress(q=cover)"),
            ChannelModel::Lossless => write!(f, "lossless"),
        }
    }
}

/// Decodes `image` to pixels and re-encodes at IJG quality `quality`.
/// Dimensions are preserved; the quantization table of the result is the
/// standard table for `quality`.
pub fn recompress(image: &CoeffImage, quality: u8) -> Result<CoeffImage> {
    compress_with_table(&decompress(image), ijg_quant_table(quality)?)
}

/// Number of coefficient positions where `after` disagrees with `before`
/// once `before` is aligned onto `after`'s quantization grid (de-quantize
/// with `before`'s table, re-quantize with `after`'s). With equal tables
/// this is a plain element-wise comparison.
pub fn coefficient_diff(before: &CoeffImage, after: &CoeffImage) -> Result<usize> {
    if before.width() != after.width()
        || before.height() != after.height()
    {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            before.width(),
            before.height(),
            after.width(),
            after.height()
        )));
    }
    let mut diff = 0usize;
    for b in 0..before.n_blocks() {
        for pos in 0..64 {
            let qa = before.table().step(pos) as f64;
            let qb = after.table().step(pos) as f64;
            let aligned = (before.coeff(b, pos) as f64 * qa / qb).round() as i32;
            if aligned != after.coeff(b, pos) as i32 {
                diff += 1;
            }
        }
    }
    Ok(diff)
}
