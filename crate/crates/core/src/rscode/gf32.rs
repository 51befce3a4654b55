//! GF(2^5) arithmetic backing the Reed-Solomon layer.
//!
//! The field is generated by x^5 + x^2 + 1; multiplication and division go
//! through log/antilog tables built once on first use.

use std::sync::OnceLock;

/// Primitive polynomial x^5 + x^2 + 1 generating GF(32).
pub const GF32_PRIMITIVE_POLY: u32 = 0x25;

struct Tables {
    exp: [u8; 62],
    log: [u8; 32],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut exp = [0u8; 62];
        let mut log = [0u8; 32];
        let mut x: u32 = 1;
        for i in 0..31 {
            exp[i] = x as u8;
            log[x as usize] = i as u8;
            x <<= 1;
            if x & 0x20 != 0 {
                x ^= GF32_PRIMITIVE_POLY;
            }
        }
        // Doubled table lets products index without a modulo.
        for i in 31..62 {
            exp[i] = exp[i - 31];
        }
        Tables { exp, log }
    })
}

pub(crate) fn gmul(a: u8, b: u8) -> u8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize]
}

pub(crate) fn gdiv(a: u8, b: u8) -> u8 {
    debug_assert!(b != 0, "division by zero in GF(32)");
    if a == 0 {
        return 0;
    }
    let t = tables();
    t.exp[t.log[a as usize] as usize + 31 - t.log[b as usize] as usize]
}

/// alpha^i for any integer exponent, negative included.
pub(crate) fn alpha_pow(i: i64) -> u8 {
    tables().exp[i.rem_euclid(31) as usize]
}
