//! Baseline JFIF parsing down to quantized coefficients.

use super::huffman::{BitReader, HuffDecoder};
use super::quant::{QuantTable, ZIGZAG};
use super::{CoeffImage, AC_LIMIT, DC_LIMIT};
use crate::error::Error;
use crate::Result;

const SOI: u8 = 0xD8;
const EOI: u8 = 0xD9;
const SOS: u8 = 0xDA;
const DQT: u8 = 0xDB;
const DRI: u8 = 0xDD;
const DHT: u8 = 0xC4;
const COM: u8 = 0xFE;

/// Parses a baseline sequential grayscale JPEG into its quantized
/// coefficients, exactly as stored (no dequantization, no IDCT).
///
/// Supported: single-component SOF0 scans, 8-bit precision, 8-bit
/// quantization tables, restart intervals. Anything else that is valid JPEG
/// but outside this subset reports [`Error::UnsupportedFeature`]; structural
/// damage reports [`Error::MalformedStream`].
pub fn parse_jpeg(bytes: &[u8]) -> Result<CoeffImage> {
    let mut p = Parser {
        bytes,
        pos: 0,
        qtables: Default::default(),
        dc_tables: Default::default(),
        ac_tables: Default::default(),
        frame: None,
        restart_interval: 0,
    };
    p.run()
}

struct Frame {
    width: usize,
    height: usize,
    qtable_id: usize,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    qtables: [Option<QuantTable>; 4],
    dc_tables: [Option<HuffDecoder>; 4],
    ac_tables: [Option<HuffDecoder>; 4],
    frame: Option<Frame>,
    restart_interval: usize,
}

impl<'a> Parser<'a> {
    fn run(&mut self) -> Result<CoeffImage> {
        if self.take_u8()? != 0xFF || self.take_u8()? != SOI {
            return Err(Error::MalformedStream("missing SOI".into()));
        }
        loop {
            let marker = self.next_marker()?;
            match marker {
                DQT => self.read_dqt()?,
                DHT => self.read_dht()?,
                DRI => self.read_dri()?,
                0xC0 => self.read_sof()?,
                // Other SOFn values are real frames we do not handle.
                0xC1 | 0xC2 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => {
                    return Err(Error::UnsupportedFeature(format!(
                        "SOF marker {marker:#04x} (non-baseline frame)"
                    )))
                }
                SOS => return self.read_scan(),
                EOI => return Err(Error::MalformedStream("EOI before scan data".into())),
                0xE0..=0xEF | COM => self.skip_segment()?,
                0x01 | 0xD0..=0xD7 => {} // standalone markers: nothing to skip
                other => {
                    return Err(Error::MalformedStream(format!(
                        "unexpected marker {other:#04x}"
                    )))
                }
            }
        }
    }

    // --- byte-level helpers ---

    fn take_u8(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| Error::MalformedStream("unexpected end of stream".into()))?;
        self.pos += 1;
        Ok(b)
    }

    fn take_u16(&mut self) -> Result<u16> {
        let hi = self.take_u8()? as u16;
        let lo = self.take_u8()? as u16;
        Ok((hi << 8) | lo)
    }

    /// Advances to the next marker, tolerating fill bytes.
    fn next_marker(&mut self) -> Result<u8> {
        if self.take_u8()? != 0xFF {
            return Err(Error::MalformedStream("expected marker".into()));
        }
        loop {
            let b = self.take_u8()?;
            if b != 0xFF {
                return Ok(b);
            }
        }
    }

    fn segment_body(&mut self) -> Result<(usize, usize)> {
        let len = self.take_u16()? as usize;
        if len < 2 || self.pos + len - 2 > self.bytes.len() {
            return Err(Error::MalformedStream("segment length out of range".into()));
        }
        let start = self.pos;
        Ok((start, start + len - 2))
    }

    fn skip_segment(&mut self) -> Result<()> {
        let (_, end) = self.segment_body()?;
        self.pos = end;
        Ok(())
    }

    // --- segment readers ---

    fn read_dqt(&mut self) -> Result<()> {
        let (_, end) = self.segment_body()?;
        while self.pos < end {
            let pq_tq = self.take_u8()?;
            let (pq, tq) = (pq_tq >> 4, (pq_tq & 0x0F) as usize);
            if pq != 0 {
                return Err(Error::UnsupportedFeature(
                    "16-bit quantization table".into(),
                ));
            }
            if tq > 3 || self.pos + 64 > end {
                return Err(Error::MalformedStream("bad DQT segment".into()));
            }
            let mut steps = [0u16; 64];
            for &zz in ZIGZAG.iter() {
                steps[zz] = self.take_u8()? as u16;
            }
            self.qtables[tq] = Some(QuantTable::new(steps)?);
        }
        Ok(())
    }

    fn read_dht(&mut self) -> Result<()> {
        let (_, end) = self.segment_body()?;
        while self.pos < end {
            let tc_th = self.take_u8()?;
            let (tc, th) = (tc_th >> 4, (tc_th & 0x0F) as usize);
            if tc > 1 || th > 3 {
                return Err(Error::MalformedStream("bad DHT class/id".into()));
            }
            let mut bits = [0u8; 16];
            for b in bits.iter_mut() {
                *b = self.take_u8()?;
            }
            let total: usize = bits.iter().map(|&b| b as usize).sum();
            if self.pos + total > end {
                return Err(Error::MalformedStream("DHT values truncated".into()));
            }
            let values = self.bytes[self.pos..self.pos + total].to_vec();
            self.pos += total;
            let table = HuffDecoder::new(&bits, &values)?;
            if tc == 0 {
                self.dc_tables[th] = Some(table);
            } else {
                self.ac_tables[th] = Some(table);
            }
        }
        Ok(())
    }

    fn read_dri(&mut self) -> Result<()> {
        let (_, end) = self.segment_body()?;
        self.restart_interval = self.take_u16()? as usize;
        if self.pos != end {
            return Err(Error::MalformedStream("bad DRI length".into()));
        }
        Ok(())
    }

    fn read_sof(&mut self) -> Result<()> {
        let (_, end) = self.segment_body()?;
        let precision = self.take_u8()?;
        if precision != 8 {
            return Err(Error::UnsupportedFeature(format!(
                "{precision}-bit sample precision"
            )));
        }
        let height = self.take_u16()? as usize;
        let width = self.take_u16()? as usize;
        let n_components = self.take_u8()?;
        if n_components != 1 {
            return Err(Error::UnsupportedFeature(format!(
                "{n_components}-component image (grayscale only)"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::MalformedStream("zero frame dimension".into()));
        }
        let _component_id = self.take_u8()?;
        let _sampling = self.take_u8()?; // single-component scans ignore sampling factors
        let qtable_id = self.take_u8()? as usize;
        if qtable_id > 3 || self.pos != end {
            return Err(Error::MalformedStream("bad SOF component spec".into()));
        }
        self.frame = Some(Frame {
            width,
            height,
            qtable_id,
        });
        Ok(())
    }

    fn read_scan(&mut self) -> Result<CoeffImage> {
        let frame = self
            .frame
            .take()
            .ok_or_else(|| Error::MalformedStream("SOS before SOF".into()))?;
        let (_, end) = self.segment_body()?;
        let ns = self.take_u8()?;
        if ns != 1 {
            return Err(Error::UnsupportedFeature("multi-component scan".into()));
        }
        let _component_id = self.take_u8()?;
        let td_ta = self.take_u8()?;
        let (td, ta) = ((td_ta >> 4) as usize, (td_ta & 0x0F) as usize);
        let ss = self.take_u8()?;
        let se = self.take_u8()?;
        let ah_al = self.take_u8()?;
        if (ss, se, ah_al) != (0, 63, 0) {
            return Err(Error::UnsupportedFeature(
                "non-baseline spectral selection / successive approximation".into(),
            ));
        }
        if self.pos != end {
            return Err(Error::MalformedStream("bad SOS header length".into()));
        }

        let table = self.qtables[frame.qtable_id]
            .clone()
            .ok_or_else(|| Error::MalformedStream("scan references missing DQT".into()))?;
        let dc = self.dc_tables[td]
            .clone()
            .ok_or_else(|| Error::MalformedStream("scan references missing DC DHT".into()))?;
        let ac = self.ac_tables[ta]
            .clone()
            .ok_or_else(|| Error::MalformedStream("scan references missing AC DHT".into()))?;

        let bw = frame.width.div_ceil(8);
        let bh = frame.height.div_ceil(8);
        let mut coeffs = vec![0i16; bw * bh * 64];
        let mut reader = BitReader::new(&self.bytes[self.pos..]);
        let mut pred: i32 = 0;
        let mut restart_count = 0u8;

        for b in 0..bw * bh {
            if self.restart_interval > 0 && b > 0 && b % self.restart_interval == 0 {
                reader.consume_restart(0xD0 + restart_count)?;
                restart_count = (restart_count + 1) % 8;
                pred = 0;
            }
            let block = &mut coeffs[b * 64..(b + 1) * 64];
            decode_block(&mut reader, &dc, &ac, &mut pred, block, b)?;
        }

        // Position past the entropy data; an EOI (possibly after further
        // segments) is expected but trailing bytes are not treated as fatal.
        self.pos += reader.offset();
        CoeffImage::new(frame.width, frame.height, table, coeffs)
    }
}

/// Decodes one block: differential DC, then run-length AC in zigzag order.
fn decode_block(
    reader: &mut BitReader,
    dc: &HuffDecoder,
    ac: &HuffDecoder,
    pred: &mut i32,
    block: &mut [i16],
    block_idx: usize,
) -> Result<()> {
    let s = dc.decode(reader)?;
    if s > 11 {
        return Err(Error::MalformedStream(format!(
            "DC category {s} exceeds baseline maximum"
        )));
    }
    let diff = extend(reader.read_bits(s)?, s);
    *pred += diff;
    if pred.abs() > DC_LIMIT {
        return Err(Error::MalformedStream(format!(
            "DC value {pred} out of range in block {block_idx}"
        )));
    }
    block[0] = *pred as i16;

    let mut k = 1usize;
    while k < 64 {
        let rs = ac.decode(reader)?;
        let (run, size) = ((rs >> 4) as usize, rs & 0x0F);
        if size == 0 {
            if run == 15 {
                k += 16; // ZRL
                continue;
            }
            break; // EOB
        }
        k += run;
        if k > 63 || size > 10 {
            return Err(Error::MalformedStream(format!(
                "AC run/size {rs:#x} overruns block {block_idx}"
            )));
        }
        let v = extend(reader.read_bits(size)?, size);
        debug_assert!(v.abs() <= AC_LIMIT);
        block[ZIGZAG[k]] = v as i16;
        k += 1;
    }
    Ok(())
}

/// The EXTEND procedure: maps a `size`-bit magnitude field to its signed
/// value.
#[inline]
fn extend(v: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    let v = v as i32;
    if v < (1 << (size - 1)) {
        v - (1 << size) + 1
    } else {
        v
    }
}
