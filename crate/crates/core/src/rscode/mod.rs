//! Shortened systematic Reed-Solomon coding over GF(32).
//!
//! Messages are packed into 5-bit symbols (MSB-first, zero-padded at the
//! end) and split into blocks of `k = 31 - 2t` symbols. Each block is
//! encoded systematically with the narrow-sense generator
//! `g(x) = prod_{i=1..2t} (x - alpha^i)`; a final partial block is
//! *shortened*: its missing leading symbols are treated as zeros that are
//! never transmitted, so only the real symbols plus the `2t` parity symbols
//! reach the carrier.
//!
//! Decoding runs Berlekamp-Massey, a Chien search, and Forney's formula per
//! block, and treats three situations as an uncorrectable block: the root
//! count of the error locator disagreeing with its degree, a corrected word
//! that still has nonzero syndromes, and a claimed correction inside the
//! shortened (virtual) prefix. [`rs_decode`] fails loudly in that case;
//! [`rs_decode_best_effort`] passes the damaged block's message symbols
//! through unchanged and reports how many blocks failed.

mod gf32;

pub use gf32::GF32_PRIMITIVE_POLY;
use gf32::{alpha_pow, gdiv, gmul};

use crate::error::Error;
use crate::Result;

/// Bits per code symbol; symbols pack MSB-first.
pub const SYMBOL_BITS: usize = 5;
/// Full codeword length in symbols.
pub const RS_N: usize = 31;
/// Largest supported correction capability (k = 31 - 2t stays >= 7).
const MAX_T: usize = 12;

/// Code strength: corrects up to `t` symbol errors per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct RsParams {
    t: usize,
}

impl RsParams {
    pub fn new(t: usize) -> Result<Self> {
        if (1..=MAX_T).contains(&t) {
            Ok(RsParams { t })
        } else {
            Err(Error::InvalidParams(format!(
                "correction capability t={t} outside 1..={MAX_T}"
            )))
        }
    }

    /// All supported strengths, weakest first (the escalation order).
    pub fn all() -> Vec<RsParams> {
        (1..=MAX_T).map(|t| RsParams { t }).collect()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Message symbols per full block.
    pub fn k(&self) -> usize {
        RS_N - 2 * self.t
    }

    /// Parity symbols per block.
    pub fn parity(&self) -> usize {
        2 * self.t
    }
}

impl TryFrom<usize> for RsParams {
    type Error = Error;
    fn try_from(t: usize) -> Result<Self> {
        RsParams::new(t)
    }
}

impl From<RsParams> for usize {
    fn from(p: RsParams) -> usize {
        p.t
    }
}

/// Encoded length in bits for a `message_bits`-bit message.
///
/// With `S = ceil(message_bits / 5)` symbols split into `q` full blocks and
/// a shortened block of `r = S mod k` symbols, the total is
/// `(q * 31 + [r > 0] * (r + 2t)) * 5` bits — strictly increasing in `t`
/// for any nonempty message.
pub fn rs_encoded_len(message_bits: usize, params: RsParams) -> usize {
    let s = message_bits.div_ceil(SYMBOL_BITS);
    let k = params.k();
    let mut symbols = (s / k) * RS_N;
    let r = s % k;
    if r > 0 {
        symbols += r + params.parity();
    }
    symbols * SYMBOL_BITS
}

/// Encodes a bit message; output length is `rs_encoded_len` of the input.
pub fn rs_encode(message: &[u8], params: RsParams) -> Vec<u8> {
    let symbols = pack_symbols(message);
    let g = generator_poly(params.t());
    let mut out = Vec::with_capacity(rs_encoded_len(message.len(), params) / SYMBOL_BITS);
    for chunk in symbols.chunks(params.k()) {
        // A short final chunk is a shortened block: leading virtual zeros
        // feed nothing into the division register, so encoding the real
        // symbols alone yields the full-length block's parity.
        out.extend_from_slice(chunk);
        out.extend_from_slice(&encode_block(chunk, &g, params.t()));
    }
    unpack_symbols(&out)
}

/// Decodes an encoded stream back to exactly `message_bits` bits, failing
/// with [`Error::DecodeFailure`] if any block is uncorrectable.
pub fn rs_decode(encoded: &[u8], params: RsParams, message_bits: usize) -> Result<Vec<u8>> {
    let (bits, failed, total) = decode_stream(encoded, params, message_bits)?;
    if failed > 0 {
        return Err(Error::DecodeFailure {
            failed_blocks: failed,
            total_blocks: total,
        });
    }
    Ok(bits)
}

/// Like [`rs_decode`], but uncorrectable blocks contribute their received
/// message symbols unchanged. Returns `(bits, failed_blocks, total_blocks)`.
pub fn rs_decode_best_effort(
    encoded: &[u8],
    params: RsParams,
    message_bits: usize,
) -> Result<(Vec<u8>, usize, usize)> {
    decode_stream(encoded, params, message_bits)
}

fn decode_stream(
    encoded: &[u8],
    params: RsParams,
    message_bits: usize,
) -> Result<(Vec<u8>, usize, usize)> {
    let expected = rs_encoded_len(message_bits, params);
    if encoded.len() != expected {
        return Err(Error::LengthMismatch(format!(
            "{} encoded bits, but the framing of a {message_bits}-bit message needs {expected}",
            encoded.len()
        )));
    }
    let symbols = pack_symbols(encoded);
    let (k, t) = (params.k(), params.t());
    let s = message_bits.div_ceil(SYMBOL_BITS);
    let (q, r) = (s / k, s % k);

    let mut out_symbols = Vec::with_capacity(s);
    let mut failed = 0usize;
    let mut off = 0usize;
    for _ in 0..q {
        let block = &symbols[off..off + RS_N];
        off += RS_N;
        match decode_block(block, 0, t) {
            Some(corrected) => out_symbols.extend_from_slice(&corrected[..k]),
            None => {
                failed += 1;
                out_symbols.extend_from_slice(&block[..k]);
            }
        }
    }
    if r > 0 {
        let block = &symbols[off..off + r + 2 * t];
        match decode_block(block, k - r, t) {
            Some(corrected) => out_symbols.extend_from_slice(&corrected[..r]),
            None => {
                failed += 1;
                out_symbols.extend_from_slice(&block[..r]);
            }
        }
    }
    let total = q + (r > 0) as usize;
    let mut bits = unpack_symbols(&out_symbols);
    bits.truncate(message_bits);
    Ok((bits, failed, total))
}

/// Monic generator polynomial, coefficients highest degree first.
fn generator_poly(t: usize) -> Vec<u8> {
    let mut g = vec![1u8];
    for i in 1..=(2 * t) {
        let root = alpha_pow(i as i64);
        let mut next = vec![0u8; g.len() + 1];
        for (j, &c) in g.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= gmul(c, root);
        }
        g = next;
    }
    g
}

/// Systematic parity for one block: remainder of `m(x) * x^{2t}` mod `g`.
fn encode_block(message: &[u8], g: &[u8], t: usize) -> Vec<u8> {
    let mut rem = vec![0u8; 2 * t];
    for &m in message {
        let feedback = m ^ rem[0];
        rem.rotate_left(1);
        rem[2 * t - 1] = 0;
        if feedback != 0 {
            for (r, &gc) in rem.iter_mut().zip(&g[1..]) {
                *r ^= gmul(feedback, gc);
            }
        }
    }
    rem
}

/// Decodes one block given as its transmitted (real) symbols. The first
/// `virtual_zeros` positions of the full codeword are implicit zeros.
/// Returns the corrected real symbols, or `None` if uncorrectable.
fn decode_block(real: &[u8], virtual_zeros: usize, t: usize) -> Option<Vec<u8>> {
    debug_assert_eq!(virtual_zeros + real.len(), RS_N);
    let mut cw = vec![0u8; RS_N];
    cw[virtual_zeros..].copy_from_slice(real);

    let synd = syndromes(&cw, t);
    if synd.iter().all(|&v| v == 0) {
        return Some(real.to_vec());
    }

    let sigma = berlekamp_massey(&synd, t)?;
    let nu = sigma.len() - 1;

    // Chien search over codeword degrees e; an error at degree e means the
    // locator has alpha^{-e} as a root.
    let mut error_degrees = Vec::with_capacity(nu);
    for e in 0..RS_N as i64 {
        if eval_ascending(&sigma, alpha_pow(-e)) == 0 {
            error_degrees.push(e);
        }
    }
    if error_degrees.len() != nu {
        return None;
    }

    let omega = omega_poly(&synd, &sigma, t);
    for &e in &error_degrees {
        let x_inv = alpha_pow(-e);
        let den = locator_derivative_eval(&sigma, x_inv);
        if den == 0 {
            return None;
        }
        let magnitude = gdiv(eval_ascending(&omega, x_inv), den);
        if magnitude == 0 {
            return None;
        }
        let j = RS_N - 1 - e as usize;
        if j < virtual_zeros {
            // The locator points into the untransmitted prefix: the channel
            // cannot have corrupted a symbol that never existed, so this is
            // a miscorrection in disguise.
            return None;
        }
        cw[j] ^= magnitude;
    }

    if syndromes(&cw, t).iter().any(|&v| v != 0) {
        return None;
    }
    Some(cw[virtual_zeros..].to_vec())
}

/// Syndromes S_1..S_2t of the codeword (coefficients highest degree first).
fn syndromes(cw: &[u8], t: usize) -> Vec<u8> {
    (1..=2 * t as i64)
        .map(|i| {
            let x = alpha_pow(i);
            cw.iter().fold(0u8, |acc, &c| gmul(acc, x) ^ c)
        })
        .collect()
}

/// Berlekamp-Massey: shortest LFSR (ascending coefficients, sigma[0] = 1)
/// generating the syndrome sequence. `None` if it needs more than `t` taps.
fn berlekamp_massey(synd: &[u8], t: usize) -> Option<Vec<u8>> {
    let mut sigma = vec![1u8];
    let mut prev = vec![1u8];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_disc = 1u8;
    for n in 0..2 * t {
        let mut d = synd[n];
        for i in 1..=l {
            if i < sigma.len() {
                d ^= gmul(sigma[i], synd[n - i]);
            }
        }
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = gdiv(d, prev_disc);
        let update_register = 2 * l <= n;
        let snapshot = if update_register { Some(sigma.clone()) } else { None };
        if sigma.len() < prev.len() + shift {
            sigma.resize(prev.len() + shift, 0);
        }
        for (j, &c) in prev.iter().enumerate() {
            sigma[j + shift] ^= gmul(coef, c);
        }
        if let Some(snapshot) = snapshot {
            l = n + 1 - l;
            prev = snapshot;
            prev_disc = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    while sigma.len() > 1 && *sigma.last().unwrap() == 0 {
        sigma.pop();
    }
    if l > t {
        return None;
    }
    Some(sigma)
}

/// Omega = S(x) * sigma(x) mod x^{2t}, with S(x) = sum synd[i] x^i.
fn omega_poly(synd: &[u8], sigma: &[u8], t: usize) -> Vec<u8> {
    let mut omega = vec![0u8; 2 * t];
    for (i, &s) in synd.iter().enumerate() {
        for (j, &c) in sigma.iter().enumerate() {
            if i + j < 2 * t {
                omega[i + j] ^= gmul(s, c);
            }
        }
    }
    omega
}

/// p(x) for ascending coefficient order.
fn eval_ascending(p: &[u8], x: u8) -> u8 {
    p.iter().rev().fold(0u8, |acc, &c| gmul(acc, x) ^ c)
}

/// Formal derivative of the locator at `x`: only odd-degree terms survive
/// in characteristic two.
fn locator_derivative_eval(sigma: &[u8], x: u8) -> u8 {
    let x2 = gmul(x, x);
    let mut acc = 0u8;
    let mut xp = 1u8;
    let mut i = 1;
    while i < sigma.len() {
        acc ^= gmul(sigma[i], xp);
        xp = gmul(xp, x2);
        i += 2;
    }
    acc
}

fn pack_symbols(bits: &[u8]) -> Vec<u8> {
    bits.chunks(SYMBOL_BITS)
        .map(|chunk| {
            let mut s = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                s |= (b & 1) << (SYMBOL_BITS - 1 - i);
            }
            s
        })
        .collect()
}

fn unpack_symbols(symbols: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * SYMBOL_BITS);
    for &s in symbols {
        for i in (0..SYMBOL_BITS).rev() {
            bits.push((s >> i) & 1);
        }
    }
    bits
}
