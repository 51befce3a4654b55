//! Bit-exact serialization of coefficients to a baseline JFIF stream.

use super::huffman::{
    BitWriter, HuffEncoder, STD_AC_BITS, STD_AC_VALUES, STD_DC_BITS, STD_DC_VALUES,
};
use super::quant::ZIGZAG;
use super::{CoeffImage, AC_LIMIT, DC_LIMIT};
use crate::error::Error;
use crate::Result;

/// Serializes a coefficient image to a baseline sequential grayscale JFIF
/// stream using the Annex K Huffman tables.
///
/// The emission order (SOI, APP0, DQT, SOF0, DHT, DHT, SOS, scan, EOI) and
/// every encoding choice are fixed, so equal inputs produce byte-identical
/// streams. Coefficients outside what the baseline entropy coder can carry
/// report [`Error::CoefficientOverflow`].
pub fn serialize_jpeg(image: &CoeffImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(&[0xFF, 0xD8]); // SOI

    // APP0: JFIF 1.1, no density information, no thumbnail.
    out.extend_from_slice(&[0xFF, 0xE0]);
    out.extend_from_slice(&16u16.to_be_bytes());
    out.extend_from_slice(b"JFIF\0");
    out.extend_from_slice(&[0x01, 0x01, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00]);

    // DQT: table 0, 8-bit precision, zigzag order.
    out.extend_from_slice(&[0xFF, 0xDB]);
    out.extend_from_slice(&67u16.to_be_bytes());
    out.push(0x00);
    for &zz in ZIGZAG.iter() {
        out.push(image.table().0[zz] as u8);
    }

    // SOF0: 8-bit, one component, 1x1 sampling, quantization table 0.
    out.extend_from_slice(&[0xFF, 0xC0]);
    out.extend_from_slice(&11u16.to_be_bytes());
    out.push(8);
    out.extend_from_slice(&(image.height() as u16).to_be_bytes());
    out.extend_from_slice(&(image.width() as u16).to_be_bytes());
    out.extend_from_slice(&[1, 1, 0x11, 0]);

    // DHT: standard luminance DC and AC tables.
    write_dht(&mut out, 0x00, &STD_DC_BITS, &STD_DC_VALUES);
    write_dht(&mut out, 0x10, &STD_AC_BITS, &STD_AC_VALUES);

    // SOS: one component, DC table 0, AC table 0, full spectral range.
    out.extend_from_slice(&[0xFF, 0xDA]);
    out.extend_from_slice(&8u16.to_be_bytes());
    out.extend_from_slice(&[1, 1, 0x00, 0, 63, 0]);

    out.extend_from_slice(&encode_scan(image)?);
    out.extend_from_slice(&[0xFF, 0xD9]); // EOI
    Ok(out)
}

fn write_dht(out: &mut Vec<u8>, class_id: u8, bits: &[u8; 16], values: &[u8]) {
    out.extend_from_slice(&[0xFF, 0xC4]);
    out.extend_from_slice(&((2 + 1 + 16 + values.len()) as u16).to_be_bytes());
    out.push(class_id);
    out.extend_from_slice(bits);
    out.extend_from_slice(values);
}

fn encode_scan(image: &CoeffImage) -> Result<Vec<u8>> {
    let dc = HuffEncoder::new(&STD_DC_BITS, &STD_DC_VALUES);
    let ac = HuffEncoder::new(&STD_AC_BITS, &STD_AC_VALUES);
    let mut w = BitWriter::new();
    let mut pred: i32 = 0;

    for b in 0..image.n_blocks() {
        let block = image.block(b);

        let dc_val = block[0] as i32;
        let diff = dc_val - pred;
        pred = dc_val;
        if dc_val.abs() > DC_LIMIT || diff.abs() > DC_LIMIT {
            return Err(Error::CoefficientOverflow {
                block: b,
                position: 0,
                value: dc_val,
            });
        }
        let s = magnitude_category(diff);
        let (code, len) = dc.code(s);
        w.write_bits(code as u32, len);
        w.write_bits(magnitude_bits(diff, s), s);

        let mut run = 0u8;
        for k in 1..64 {
            let v = block[ZIGZAG[k]] as i32;
            if v == 0 {
                run += 1;
                continue;
            }
            if v.abs() > AC_LIMIT {
                return Err(Error::CoefficientOverflow {
                    block: b,
                    position: ZIGZAG[k],
                    value: v,
                });
            }
            while run >= 16 {
                let (code, len) = ac.code(0xF0); // ZRL
                w.write_bits(code as u32, len);
                run -= 16;
            }
            let s = magnitude_category(v);
            let (code, len) = ac.code((run << 4) | s);
            w.write_bits(code as u32, len);
            w.write_bits(magnitude_bits(v, s), s);
            run = 0;
        }
        if run > 0 {
            let (code, len) = ac.code(0x00); // EOB
            w.write_bits(code as u32, len);
        }
    }
    Ok(w.finish())
}

/// Number of magnitude bits needed for `v` (the SSSS category).
#[inline]
fn magnitude_category(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

/// The `s` low bits encoding `v`: the value itself when positive, the
/// one's-complement form when negative.
#[inline]
fn magnitude_bits(v: i32, s: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1 << s) - 1) as u32
    }
}
