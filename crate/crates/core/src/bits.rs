//! Bit-vector plumbing shared by the coding layers and the CLI.
//!
//! Bits travel through the pipeline as `Vec<u8>` holding one bit (0 or 1)
//! per element; packing to bytes is MSB-first with zero padding in the final
//! byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Unpacks bytes to bits, MSB-first, truncated to `n_bits`.
pub fn bytes_to_bits(bytes: &[u8], n_bits: usize) -> Vec<u8> {
    assert!(n_bits <= bytes.len() * 8, "asked for more bits than exist");
    (0..n_bits)
        .map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1)
        .collect()
}

/// Packs bits to bytes, MSB-first, zero-padding the final byte.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        debug_assert!(b <= 1);
        out[i / 8] |= (b & 1) << (7 - i % 8);
    }
    out
}

/// `n` uniformly random bits from a seeded, portable generator.
pub fn random_bits(seed: u64, n: usize) -> Vec<u8> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..=1u8)).collect()
}

/// CRC-32 (polynomial 0x04C11DB7, unreflected) over a bit sequence.
///
/// Bits are folded in directly rather than via bytes so messages whose
/// length is not a multiple of eight checksum without padding ambiguity;
/// the left-shifting form consumes bits in the same MSB-first order the
/// rest of the pipeline uses.
pub fn crc32(bits: &[u8]) -> u32 {
    let mut crc: u32 = 0xFFFF_FFFF;
    for &bit in bits {
        let fed = ((crc >> 31) ^ bit as u32) & 1;
        crc <<= 1;
        if fed != 0 {
            crc ^= 0x04C1_1DB7;
        }
    }
    !crc
}
