//! Floating-point 8x8 DCT used by both the codec and the cost model.
//!
//! The transform pair is the orthonormal type-II DCT (forward) and type-III
//! DCT (inverse) in the scaling used by baseline JPEG:
//!
//! ```text
//! F[u,v] = g_u(0..8) . f . g_v(0..8)   with   g_u[x] = c(u)/2 * cos((2x+1) u pi / 16)
//! ```
//!
//! where `c(0) = 1/sqrt(2)` and `c(u) = 1` otherwise. A plain matrix-product
//! implementation is used; at 8x8 there is nothing to gain from the classic
//! factored butterflies and the straightforward form keeps the basis rows
//! reusable by the distortion model.

use std::sync::OnceLock;

/// One-dimensional basis: `row u` is the spatial waveform of frequency `u`,
/// i.e. `BASIS[u][x] = c(u)/2 * cos((2x+1) u pi / 16)`.
pub(crate) fn basis_1d() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut b = [[0.0; 8]; 8];
        for (u, row) in b.iter_mut().enumerate() {
            let cu = if u == 0 { 1.0 / 2f64.sqrt() } else { 1.0 };
            for (x, v) in row.iter_mut().enumerate() {
                *v = cu / 2.0
                    * ((2.0 * x as f64 + 1.0) * u as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        b
    })
}

/// Forward 8x8 DCT of a (level-shifted) spatial block, row-major.
pub(crate) fn fdct2(block: &[f64; 64]) -> [f64; 64] {
    let b = basis_1d();
    // tmp = f . B^T  (transform rows), out = B . tmp (transform columns)
    let mut tmp = [0.0; 64];
    for r in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for x in 0..8 {
                acc += block[r * 8 + x] * b[v][x];
            }
            tmp[r * 8 + v] = acc;
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            let mut acc = 0.0;
            for r in 0..8 {
                acc += b[u][r] * tmp[r * 8 + v];
            }
            out[u * 8 + v] = acc;
        }
    }
    out
}

/// Inverse 8x8 DCT; returns the (level-shifted) spatial block, row-major.
pub(crate) fn idct2(coeffs: &[f64; 64]) -> [f64; 64] {
    let b = basis_1d();
    let mut tmp = [0.0; 64];
    for u in 0..8 {
        for y in 0..8 {
            let mut acc = 0.0;
            for v in 0..8 {
                acc += coeffs[u * 8 + v] * b[v][y];
            }
            tmp[u * 8 + y] = acc;
        }
    }
    let mut out = [0.0; 64];
    for x in 0..8 {
        for y in 0..8 {
            let mut acc = 0.0;
            for u in 0..8 {
                acc += b[u][x] * tmp[u * 8 + y];
            }
            out[x * 8 + y] = acc;
        }
    }
    out
}
