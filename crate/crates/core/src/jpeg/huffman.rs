//! Canonical Huffman coding for baseline JPEG scans, plus the bit-level I/O
//! with 0xFF byte stuffing.

use crate::error::Error;
use crate::Result;

/// ITU-T T.81 Annex K table K.3: luminance DC code lengths and values.
pub(crate) const STD_DC_BITS: [u8; 16] = [0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
pub(crate) const STD_DC_VALUES: [u8; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

/// ITU-T T.81 Annex K table K.5: luminance AC code lengths and values.
pub(crate) const STD_AC_BITS: [u8; 16] = [0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D];
pub(crate) const STD_AC_VALUES: [u8; 162] = [
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52,
    0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3,
    0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8,
    0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA,
];

/// A Huffman table in the canonical form used for decoding: per code length
/// the smallest/largest code and the offset into the value list.
#[derive(Debug, Clone)]
pub(crate) struct HuffDecoder {
    mincode: [i32; 17],
    maxcode: [i32; 17],
    valptr: [usize; 17],
    values: Vec<u8>,
}

impl HuffDecoder {
    /// Builds the decoder from a DHT-style (BITS, HUFFVAL) specification.
    pub(crate) fn new(bits: &[u8; 16], values: &[u8]) -> Result<Self> {
        let total: usize = bits.iter().map(|&b| b as usize).sum();
        if total != values.len() || total == 0 {
            return Err(Error::MalformedStream(format!(
                "Huffman table declares {total} codes but carries {} values",
                values.len()
            )));
        }
        let mut mincode = [0i32; 17];
        let mut maxcode = [-1i32; 17];
        let mut valptr = [0usize; 17];
        let mut code = 0i32;
        let mut k = 0usize;
        for l in 1..=16usize {
            let n = bits[l - 1] as i32;
            if code + n > (1 << l) {
                return Err(Error::MalformedStream(
                    "Huffman table overfull at some code length".into(),
                ));
            }
            if n > 0 {
                valptr[l] = k;
                mincode[l] = code;
                code += n;
                maxcode[l] = code - 1;
                k += n as usize;
            }
            code <<= 1;
        }
        Ok(HuffDecoder {
            mincode,
            maxcode,
            valptr,
            values: values.to_vec(),
        })
    }

    /// Reads one Huffman-coded symbol.
    pub(crate) fn decode(&self, reader: &mut BitReader) -> Result<u8> {
        let mut code = 0i32;
        for l in 1..=16usize {
            code = (code << 1) | reader.read_bit()? as i32;
            if self.maxcode[l] >= code && code >= self.mincode[l] {
                let idx = self.valptr[l] + (code - self.mincode[l]) as usize;
                return Ok(self.values[idx]);
            }
        }
        Err(Error::MalformedStream("invalid Huffman code".into()))
    }
}

/// Encoder-side table: `(code, length)` per symbol value.
#[derive(Debug, Clone)]
pub(crate) struct HuffEncoder {
    codes: [(u16, u8); 256],
}

impl HuffEncoder {
    pub(crate) fn new(bits: &[u8; 16], values: &[u8]) -> Self {
        let mut codes = [(0u16, 0u8); 256];
        let mut code = 0u16;
        let mut k = 0usize;
        for l in 1..=16usize {
            for _ in 0..bits[l - 1] {
                codes[values[k] as usize] = (code, l as u8);
                code += 1;
                k += 1;
            }
            code <<= 1;
        }
        HuffEncoder { codes }
    }

    #[inline]
    pub(crate) fn code(&self, symbol: u8) -> (u16, u8) {
        let (code, len) = self.codes[symbol as usize];
        debug_assert!(len > 0, "symbol {symbol} has no code");
        (code, len)
    }
}

/// MSB-first bit reader over an entropy-coded segment. Stuffed `FF 00` pairs
/// yield a plain 0xFF data byte; any other marker ends the readable stream
/// (restart markers are stepped over via [`BitReader::consume_restart`]).
pub(crate) struct BitReader<'a> {
    data: &'a [u8],
    /// Next unread byte offset within `data`.
    pos: usize,
    buf: u32,
    nbits: u32,
    marker: Option<u8>,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        BitReader {
            data,
            pos: 0,
            buf: 0,
            nbits: 0,
            marker: None,
        }
    }

    fn fill(&mut self) {
        while self.nbits <= 24 && self.marker.is_none() {
            if self.pos >= self.data.len() {
                break;
            }
            let byte = self.data[self.pos];
            if byte == 0xFF {
                match self.data.get(self.pos + 1) {
                    Some(0x00) => {
                        self.pos += 2;
                        self.buf = (self.buf << 8) | 0xFF;
                        self.nbits += 8;
                    }
                    Some(&m) => {
                        // Fill bytes (FF FF ... marker) are legal padding.
                        if m == 0xFF {
                            self.pos += 1;
                            continue;
                        }
                        self.marker = Some(m);
                    }
                    None => {
                        self.marker = Some(0xFF); // truncated; poison
                    }
                }
            } else {
                self.pos += 1;
                self.buf = (self.buf << 8) | byte as u32;
                self.nbits += 8;
            }
        }
    }

    #[inline]
    pub(crate) fn read_bit(&mut self) -> Result<u8> {
        if self.nbits == 0 {
            self.fill();
            if self.nbits == 0 {
                return Err(Error::MalformedStream(
                    "entropy-coded data ended mid-symbol".into(),
                ));
            }
        }
        self.nbits -= 1;
        Ok(((self.buf >> self.nbits) & 1) as u8)
    }

    /// Reads `n` bits MSB-first (the RECEIVE procedure).
    pub(crate) fn read_bits(&mut self, n: u8) -> Result<u32> {
        let mut v = 0u32;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u32;
        }
        Ok(v)
    }

    /// Consumes a pending restart marker and realigns to the byte boundary.
    pub(crate) fn consume_restart(&mut self, expected: u8) -> Result<()> {
        // Discard padding bits up to the marker.
        self.buf = 0;
        self.nbits = 0;
        self.fill();
        match self.marker {
            Some(m) if m == expected => {
                self.marker = None;
                self.pos += 2; // skip FF m
                Ok(())
            }
            other => Err(Error::MalformedStream(format!(
                "expected restart marker {expected:#x}, found {other:?}"
            ))),
        }
    }

    /// Byte offset just past the consumed entropy data (valid once a marker
    /// is pending).
    pub(crate) fn offset(&self) -> usize {
        self.pos
    }
}

/// MSB-first bit writer with 0xFF stuffing.
pub(crate) struct BitWriter {
    out: Vec<u8>,
    buf: u32,
    nbits: u32,
}

impl BitWriter {
    pub(crate) fn new() -> Self {
        BitWriter {
            out: Vec::new(),
            buf: 0,
            nbits: 0,
        }
    }

    pub(crate) fn write_bits(&mut self, value: u32, n: u8) {
        debug_assert!(n <= 24);
        self.buf = (self.buf << n) | (value & ((1u32 << n) - 1));
        self.nbits += n as u32;
        while self.nbits >= 8 {
            self.nbits -= 8;
            let byte = ((self.buf >> self.nbits) & 0xFF) as u8;
            self.out.push(byte);
            if byte == 0xFF {
                self.out.push(0x00);
            }
        }
    }

    /// Pads the final partial byte with 1-bits and returns the stuffed
    /// entropy-coded segment.
    pub(crate) fn finish(mut self) -> Vec<u8> {
        if self.nbits > 0 {
            let pad = 8 - self.nbits as u8;
            self.write_bits((1u32 << pad) - 1, pad);
        }
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writer_reader_round_trip_with_stuffing() {
        let mut w = BitWriter::new();
        // 0xFF byte forces a stuffed zero.
        w.write_bits(0xFF, 8);
        w.write_bits(0b1011, 4);
        w.write_bits(0x3FF, 10);
        let bytes = w.finish();
        assert_eq!(bytes[0], 0xFF);
        assert_eq!(bytes[1], 0x00);

        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read_bits(8).unwrap(), 0xFF);
        assert_eq!(r.read_bits(4).unwrap(), 0b1011);
        assert_eq!(r.read_bits(10).unwrap(), 0x3FF);
    }

    #[test]
    fn standard_tables_decode_their_own_codes() {
        let enc = HuffEncoder::new(&STD_AC_BITS, &STD_AC_VALUES);
        let dec = HuffDecoder::new(&STD_AC_BITS, &STD_AC_VALUES).unwrap();
        let mut w = BitWriter::new();
        for &sym in STD_AC_VALUES.iter() {
            let (code, len) = enc.code(sym);
            w.write_bits(code as u32, len);
        }
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        for &sym in STD_AC_VALUES.iter() {
            assert_eq!(dec.decode(&mut r).unwrap(), sym);
        }
    }

    #[test]
    fn dc_table_has_twelve_categories() {
        let dec = HuffDecoder::new(&STD_DC_BITS, &STD_DC_VALUES).unwrap();
        assert_eq!(dec.values.len(), 12);
    }

    #[test]
    fn overfull_table_is_rejected() {
        let mut bits = [0u8; 16];
        bits[0] = 3; // three codes of length 1 cannot exist
        assert!(HuffDecoder::new(&bits, &[0, 1, 2]).is_err());
    }
}
