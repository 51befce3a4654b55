//! Quantization tables and the zigzag scan.

use crate::error::Error;
use crate::Result;

/// ITU-T T.81 Annex K luminance base table (table K.1), row-major.
pub(crate) const BASE_LUMA_QTABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Zigzag scan: `ZIGZAG[i]` is the row-major index of the i-th coefficient in
/// scan order.
pub(crate) const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, //
    17, 24, 32, 25, 18, 11, 4, 5, //
    12, 19, 26, 33, 40, 48, 41, 34, //
    27, 20, 13, 6, 7, 14, 21, 28, //
    35, 42, 49, 56, 57, 50, 43, 36, //
    29, 22, 15, 23, 30, 37, 44, 51, //
    58, 59, 52, 45, 38, 31, 39, 46, //
    53, 60, 61, 54, 47, 55, 62, 63,
];

/// An 8x8 quantization table, row-major, steps in `1..=255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantTable(pub [u16; 64]);

impl serde::Serialize for QuantTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> serde::Deserialize<'de> for QuantTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let steps = Vec::<u16>::deserialize(deserializer)?;
        let steps: [u16; 64] = steps
            .try_into()
            .map_err(|v: Vec<u16>| D::Error::invalid_length(v.len(), &"64 quantization steps"))?;
        QuantTable::new(steps).map_err(D::Error::custom)
    }
}

impl QuantTable {
    /// Validates the step range.
    pub fn new(steps: [u16; 64]) -> Result<Self> {
        if let Some(bad) = steps.iter().find(|&&s| s == 0 || s > 255) {
            return Err(Error::MalformedStream(format!(
                "quantization step {bad} outside 1..=255"
            )));
        }
        Ok(QuantTable(steps))
    }

    /// Step at row-major position `pos`.
    #[inline]
    pub fn step(&self, pos: usize) -> u16 {
        self.0[pos]
    }

    /// If this table equals `ijg_quant_table(qf)` for some quality factor,
    /// returns that factor.
    pub fn detect_quality(&self) -> Option<u8> {
        (1..=100).find(|&qf| ijg_quant_table(qf).expect("qf in range") == *self)
    }
}

/// Luminance quantization table for an IJG quality factor in `1..=100`.
///
/// Uses the libjpeg scaling convention: `scale = 5000/qf` below 50, else
/// `200 - 2*qf`, with each Annex K base entry mapped through
/// `clamp(floor((base*scale + 50)/100), 1, 255)`. Quality 50 reproduces the
/// base table exactly; quality 100 yields all-ones (lossless up to rounding).
pub fn ijg_quant_table(qf: u8) -> Result<QuantTable> {
    if qf == 0 || qf > 100 {
        return Err(Error::InvalidQuality(qf as i32));
    }
    let scale: u32 = if qf < 50 {
        5000 / qf as u32
    } else {
        200 - 2 * qf as u32
    };
    let mut steps = [0u16; 64];
    for (s, &base) in steps.iter_mut().zip(BASE_LUMA_QTABLE.iter()) {
        *s = ((base as u32 * scale + 50) / 100).clamp(1, 255) as u16;
    }
    Ok(QuantTable(steps))
}
