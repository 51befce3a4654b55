//! Baseline sequential grayscale JPEG at the quantized-coefficient level.
//!
//! The unit of exchange is [`CoeffImage`]: the quantized DCT coefficients of
//! every 8x8 block together with the quantization table, exactly as an
//! entropy decoder recovers them from a JFIF stream and without any of the
//! lossy steps applied. All embedding happens on this representation;
//! [`parse_jpeg`] and [`serialize_jpeg`] move it in and out of real files,
//! and [`compress`]/[`decompress`] move it to and from pixels.

mod dct;
mod decoder;
mod encoder;
mod huffman;
mod quant;

pub use decoder::parse_jpeg;
pub use encoder::serialize_jpeg;
pub use quant::{ijg_quant_table, QuantTable};

pub(crate) use dct::{basis_1d, fdct2, idct2};
pub(crate) use quant::ZIGZAG;

use crate::error::Error;
use crate::Result;

/// Largest DC magnitude the baseline entropy coder can represent.
pub(crate) const DC_LIMIT: i32 = 2047;
/// Largest AC magnitude the baseline entropy coder can represent.
pub(crate) const AC_LIMIT: i32 = 1023;

/// Quantized DCT coefficients of a grayscale image.
///
/// Blocks are stored in raster order, each as 64 row-major coefficients. DC
/// coefficients hold the absolute (post-prediction) value; the differential
/// coding of the stream format is handled entirely inside the codec. All
/// values fit 12 signed bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffImage {
    width: usize,
    height: usize,
    table: QuantTable,
    /// `blocks_w * blocks_h * 64` coefficients, block-major.
    coeffs: Vec<i16>,
}

impl CoeffImage {
    /// Builds a coefficient image, validating geometry and value range.
    pub fn new(width: usize, height: usize, table: QuantTable, coeffs: Vec<i16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionMismatch("zero image dimension".into()));
        }
        let bw = width.div_ceil(8);
        let bh = height.div_ceil(8);
        if coeffs.len() != bw * bh * 64 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} image needs {} coefficients, got {}",
                width,
                height,
                bw * bh * 64,
                coeffs.len()
            )));
        }
        if let Some((i, &v)) = coeffs
            .iter()
            .enumerate()
            .find(|&(_, &v)| !(-2048..=2047).contains(&(v as i32)))
        {
            return Err(Error::CoefficientOverflow {
                block: i / 64,
                position: i % 64,
                value: v as i32,
            });
        }
        Ok(CoeffImage {
            width,
            height,
            table,
            coeffs,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Block-grid width (`ceil(width / 8)`).
    pub fn blocks_w(&self) -> usize {
        self.width.div_ceil(8)
    }

    /// Block-grid height (`ceil(height / 8)`).
    pub fn blocks_h(&self) -> usize {
        self.height.div_ceil(8)
    }

    /// Total number of 8x8 blocks.
    pub fn n_blocks(&self) -> usize {
        self.blocks_w() * self.blocks_h()
    }

    pub fn table(&self) -> &QuantTable {
        &self.table
    }

    /// IJG quality factor, if the table matches one exactly.
    pub fn quality(&self) -> Option<u8> {
        self.table.detect_quality()
    }

    /// Coefficients of block `idx` (raster order), row-major.
    pub fn block(&self, idx: usize) -> &[i16] {
        &self.coeffs[idx * 64..(idx + 1) * 64]
    }

    pub fn block_mut(&mut self, idx: usize) -> &mut [i16] {
        &mut self.coeffs[idx * 64..(idx + 1) * 64]
    }

    /// Flat coefficient storage (block-major).
    pub fn coeffs(&self) -> &[i16] {
        &self.coeffs
    }

    /// Coefficient at block `b`, row-major in-block position `pos`.
    #[inline]
    pub fn coeff(&self, b: usize, pos: usize) -> i16 {
        self.coeffs[b * 64 + pos]
    }
}

/// An 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl SpatialImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} raster with {} pixels",
                width,
                height,
                pixels.len()
            )));
        }
        Ok(SpatialImage {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// Compresses a raster at IJG quality `qf`: per block, level shift by -128,
/// forward DCT, divide by the quantization step and round half away from
/// zero. Partial border blocks are filled by edge replication.
pub fn compress(image: &SpatialImage, qf: u8) -> Result<CoeffImage> {
    compress_with_table(image, ijg_quant_table(qf)?)
}

/// [`compress`] with an explicit table (used by the channel simulator, which
/// must honor whatever table a stream carries).
pub fn compress_with_table(image: &SpatialImage, table: QuantTable) -> Result<CoeffImage> {
    let bw = image.width.div_ceil(8);
    let bh = image.height.div_ceil(8);
    let mut coeffs = vec![0i16; bw * bh * 64];
    let mut spatial = [0f64; 64];
    for by in 0..bh {
        for bx in 0..bw {
            for y in 0..8 {
                let sy = (by * 8 + y).min(image.height - 1);
                for x in 0..8 {
                    let sx = (bx * 8 + x).min(image.width - 1);
                    spatial[y * 8 + x] = image.pixel(sx, sy) as f64 - 128.0;
                }
            }
            let freq = fdct2(&spatial);
            let block = &mut coeffs[(by * bw + bx) * 64..(by * bw + bx + 1) * 64];
            for (pos, (&f, q)) in freq.iter().zip(table.0.iter()).enumerate() {
                block[pos] = (f / *q as f64).round() as i16;
            }
        }
    }
    CoeffImage::new(image.width, image.height, table, coeffs)
}

/// Decompresses to pixels: dequantize, inverse DCT, shift by +128, round
/// half away from zero, clamp to `[0, 255]`. Padding introduced at
/// compression time is cropped away.
pub fn decompress(image: &CoeffImage) -> SpatialImage {
    let bw = image.blocks_w();
    let full = render_rounded(image);
    let mut pixels = vec![0u8; image.width * image.height];
    for y in 0..image.height {
        let row = &full[y * bw * 8..y * bw * 8 + image.width];
        pixels[y * image.width..(y + 1) * image.width].copy_from_slice(row);
    }
    SpatialImage {
        width: image.width,
        height: image.height,
        pixels,
    }
}

/// Rounded/clamped decompression over the full block grid (`8*blocks_w` by
/// `8*blocks_h`), including padding blocks.
pub(crate) fn render_rounded(image: &CoeffImage) -> Vec<u8> {
    render_real(image)
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Real-valued decompression over the full block grid: dequantize and
/// inverse DCT with no rounding or clamping. This is the linear inverse the
/// distortion model differentiates through.
pub(crate) fn render_real(image: &CoeffImage) -> Vec<f64> {
    let bw = image.blocks_w();
    let bh = image.blocks_h();
    let mut out = vec![0f64; bw * 8 * bh * 8];
    let mut freq = [0f64; 64];
    for b in 0..image.n_blocks() {
        let block = image.block(b);
        for pos in 0..64 {
            freq[pos] = block[pos] as f64 * image.table.0[pos] as f64;
        }
        let spatial = idct2(&freq);
        let (by, bx) = (b / bw, b % bw);
        for y in 0..8 {
            let row = (by * 8 + y) * bw * 8 + bx * 8;
            for x in 0..8 {
                out[row + x] = spatial[y * 8 + x] + 128.0;
            }
        }
    }
    out
}

/// Real-valued DCT coefficients of the rounded/clamped decompression of
/// `image`, block-major like [`CoeffImage::coeffs`]. This is the signal a
/// decoder actually stores when it re-encodes the image, and therefore the
/// reference point for dither modulation.
pub(crate) fn requantization_signal(image: &CoeffImage) -> Vec<f64> {
    let bw = image.blocks_w();
    let rounded = render_rounded(image);
    let mut out = vec![0f64; image.n_blocks() * 64];
    let mut spatial = [0f64; 64];
    for b in 0..image.n_blocks() {
        let (by, bx) = (b / bw, b % bw);
        for y in 0..8 {
            let row = (by * 8 + y) * bw * 8 + bx * 8;
            for x in 0..8 {
                spatial[y * 8 + x] = rounded[row + x] as f64 - 128.0;
            }
        }
        out[b * 64..(b + 1) * 64].copy_from_slice(&fdct2(&spatial));
    }
    out
}

/// Number of nonzero AC coefficients (the payload-rate denominator).
pub fn count_nzac(image: &CoeffImage) -> usize {
    (0..image.n_blocks())
        .map(|b| {
            image.block(b)[1..]
                .iter()
                .filter(|&&c| c != 0)
                .count()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gradient_image(w: usize, h: usize) -> SpatialImage {
        let pixels = (0..w * h)
            .map(|i| (((i % w) * 255 / w.max(2)) + (i / w) % 7) as u8)
            .collect();
        SpatialImage::new(w, h, pixels).unwrap()
    }

    #[test]
    fn uniform_midgray_compresses_to_all_zero() {
        let img = SpatialImage::new(16, 16, vec![128; 256]).unwrap();
        for qf in [10, 50, 75, 95] {
            let c = compress(&img, qf).unwrap();
            assert!(c.coeffs().iter().all(|&v| v == 0), "qf {qf}");
        }
    }

    #[test]
    fn dc_only_block_decompresses_to_constant_patch() {
        let table = ijg_quant_table(50).unwrap();
        let q = table.0[0] as i32; // 16
        let mut coeffs = vec![0i16; 64];
        coeffs[0] = 40;
        let img = CoeffImage::new(8, 8, table, coeffs).unwrap();
        let spatial = decompress(&img);
        let expect = ((40 * q) as f64 / 8.0 + 128.0).round().clamp(0.0, 255.0) as u8;
        assert!(spatial.pixels().iter().all(|&p| p == expect));
    }

    #[test]
    fn decompress_clamps_saturated_blocks() {
        let table = ijg_quant_table(50).unwrap();
        let mut coeffs = vec![0i16; 64];
        coeffs[0] = 1000; // DC alone pushes well past 255
        let img = CoeffImage::new(8, 8, table, coeffs).unwrap();
        assert!(decompress(&img).pixels().iter().all(|&p| p == 255));
    }

    #[test]
    fn higher_quality_keeps_more_ac_detail() {
        let img = gradient_image(64, 64);
        let low = count_nzac(&compress(&img, 50).unwrap());
        let high = count_nzac(&compress(&img, 90).unwrap());
        assert!(high > low, "nzac {high} at qf90 vs {low} at qf50");
    }

    #[test]
    fn non_multiple_of_eight_dimensions_round_trip_geometry() {
        let img = gradient_image(21, 13);
        let c = compress(&img, 75).unwrap();
        assert_eq!((c.blocks_w(), c.blocks_h()), (3, 2));
        let d = decompress(&c);
        assert_eq!((d.width(), d.height()), (21, 13));
    }

    #[test]
    fn recompression_at_same_quality_is_nearly_idempotent() {
        let img = gradient_image(64, 64);
        let c1 = compress(&img, 75).unwrap();
        let c2 = compress(&decompress(&c1), 75).unwrap();
        let diff1: usize = c1
            .coeffs()
            .iter()
            .zip(c2.coeffs())
            .filter(|(a, b)| a != b)
            .count();
        let c3 = compress(&decompress(&c2), 75).unwrap();
        let diff2: usize = c2
            .coeffs()
            .iter()
            .zip(c3.coeffs())
            .filter(|(a, b)| a != b)
            .count();
        assert!(diff2 <= diff1, "second pass changed {diff2} > {diff1}");
        assert!(diff1 < c1.coeffs().len() / 5, "first pass changed {diff1}");
    }

    #[test]
    fn count_nzac_ignores_dc() {
        let table = ijg_quant_table(50).unwrap();
        let mut coeffs = vec![0i16; 64 * 2];
        coeffs[0] = 5; // DC of block 0
        coeffs[3] = -2;
        coeffs[64] = -7; // DC of block 1
        let img = CoeffImage::new(16, 8, table, coeffs).unwrap();
        assert_eq!(count_nzac(&img), 1);
    }

    #[test]
    fn coefficient_range_is_validated() {
        let table = ijg_quant_table(50).unwrap();
        let mut coeffs = vec![0i16; 64];
        coeffs[5] = i16::MIN; // -32768, far outside 12 signed bits
        assert!(matches!(
            CoeffImage::new(8, 8, table, coeffs),
            Err(Error::CoefficientOverflow { position: 5, .. })
        ));
    }
}
