//! J-UNIWARD embedding distortion for quantized DCT coefficients.
//!
//! The cost of changing one coefficient by one quantization step is the
//! relative disturbance it causes in a first-level undecimated wavelet
//! decomposition (Daubechies-8, three directional subbands) of the
//! decompressed image:
//!
//! ```text
//! rho_ij = sum_k sum_uv |W_k(X')_uv - W_k(X)_uv| / (sigma + |W_k(X)_uv|)
//! ```
//!
//! Smooth regions put most of their energy at low wavelet magnitudes, so
//! their denominators are small and changes there are expensive; textured
//! regions absorb changes cheaply.
//!
//! Two implementation choices keep the computation exact and fast:
//!
//! * The decompression inside the cost model is the *linear* inverse
//!   (dequantize + IDCT, no rounding), so a unit coefficient change moves
//!   the spatial block by exactly `q` times a DCT basis pattern, and its
//!   wavelet-domain footprint is a fixed 23x23 stencil independent of
//!   position.
//! * The image is extended symmetrically by 16 pixels before filtering.
//!   The extension is computed once from the cover and held fixed when a
//!   coefficient's impact is evaluated, which keeps every impact exactly
//!   linear (this matches the additive approximation the cost is defined
//!   under; only blocks within 16 px of the border could tell).
//!
//! Both the DCT basis and the wavelet filters factor into 1-D pairs, so each
//! stencil is an outer product and the 64 x 3 window sums reduce to two
//! separable passes.

use crate::jpeg::{basis_1d, render_real, CoeffImage};

/// Stabilization constant in the cost denominator (2^-6).
pub const SIGMA: f64 = 0.015625;

/// Daubechies-8 decomposition high-pass filter.
const DB8_HIGH: [f64; 16] = [
    -0.054_415_842_2,
    0.312_871_590_9,
    -0.675_630_736_3,
    0.585_354_683_7,
    0.015_829_105_3,
    -0.284_015_543_0,
    -0.000_472_484_6,
    0.128_747_426_6,
    0.017_369_301_0,
    -0.044_088_253_9,
    -0.013_981_027_9,
    0.008_746_094_0,
    0.004_870_353_0,
    -0.000_391_740_4,
    -0.000_675_449_4,
    -0.000_117_476_8,
];

/// Matching low-pass filter: `low[i] = (-1)^i * high[15-i]`.
fn db8_low() -> [f64; 16] {
    let mut low = [0.0; 16];
    for (i, v) in low.iter_mut().enumerate() {
        *v = if i % 2 == 0 { 1.0 } else { -1.0 } * DB8_HIGH[15 - i];
    }
    low
}

/// The three directional subband filters as (vertical, horizontal) 1-D
/// pairs: low x high, high x low, high x high.
fn filter_bank() -> [([f64; 16], [f64; 16]); 3] {
    let low = db8_low();
    [(low, DB8_HIGH), (DB8_HIGH, low), (DB8_HIGH, DB8_HIGH)]
}

/// Pad margin: the wavelet support.
const PAD: usize = 16;
/// 1-D stencil length: 8-tap basis correlated with a 16-tap filter.
const STENCIL: usize = 23;

/// Symmetric (edge-repeating, triangle-reflected) extension by [`PAD`] on
/// every side.
fn mirror_pad(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let (cw, ch) = (w + 2 * PAD, h + 2 * PAD);
    let reflect = |p: isize, n: usize| -> usize {
        let n = n as isize;
        let mut s = p.rem_euclid(2 * n);
        if s >= n {
            s = 2 * n - 1 - s;
        }
        s as usize
    };
    let mut out = vec![0.0; cw * ch];
    for i in 0..ch {
        let sy = reflect(i as isize - PAD as isize, h);
        for j in 0..cw {
            let sx = reflect(j as isize - PAD as isize, w);
            out[i * cw + j] = src[sy * w + sx];
        }
    }
    out
}

/// Separable 'same' correlation with an even-length kernel, centered like
/// the classic image-processing convention (output `i` reads input
/// `i-7..=i+8` for 16 taps); out-of-range input reads as zero.
fn correlate_same(src: &[f64], w: usize, h: usize, fv: &[f64; 16], fh: &[f64; 16]) -> Vec<f64> {
    let mut tmp = vec![0.0; w * h];
    for i in 0..h {
        let row = &src[i * w..(i + 1) * w];
        for j in 0..w {
            let mut acc = 0.0;
            for (u, &f) in fh.iter().enumerate() {
                let jj = j as isize + u as isize - 7;
                if (0..w as isize).contains(&jj) {
                    acc += row[jj as usize] * f;
                }
            }
            tmp[i * w + j] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for i in 0..h {
        for (u, &f) in fv.iter().enumerate() {
            let ii = i as isize + u as isize - 7;
            if (0..h as isize).contains(&ii) {
                let src_row = &tmp[ii as usize * w..(ii as usize + 1) * w];
                let dst_row = &mut out[i * w..(i + 1) * w];
                for (d, s) in dst_row.iter_mut().zip(src_row) {
                    *d += s * f;
                }
            }
        }
    }
    out
}

/// 1-D wavelet footprint of basis waveform `a` under filter `f`:
/// `stencil[d] = sum_u f[u] * basis_a[d + u - 15]` for the 23 offsets where
/// the 8-sample basis and 16-tap filter overlap.
fn stencil_1d(f: &[f64; 16], a: usize) -> [f64; STENCIL] {
    let basis = basis_1d();
    let mut out = [0.0; STENCIL];
    for (d, v) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (u, &fu) in f.iter().enumerate() {
            let x = d as isize + u as isize - 15;
            if (0..8).contains(&x) {
                acc += fu * basis[a][x as usize];
            }
        }
        *v = acc;
    }
    out
}

/// Per-coefficient distortion of a one-step change, block-major like
/// [`CoeffImage::coeffs`]. Cost is direction-symmetric.
pub(crate) fn costs(cover: &CoeffImage) -> Vec<f64> {
    let (bw, bh) = (cover.blocks_w(), cover.blocks_h());
    let (w, h) = (bw * 8, bh * 8);
    let (cw, ch) = (w + 2 * PAD, h + 2 * PAD);
    let canvas = mirror_pad(&render_real(cover), w, h);

    let mut rho = vec![0.0; cover.n_blocks() * 64];
    for (fv, fh) in filter_bank() {
        let residual = correlate_same(&canvas, cw, ch, &fv, &fh);
        let gain: Vec<f64> = residual.iter().map(|r| 1.0 / (SIGMA + r.abs())).collect();

        let mut col_st = [[0.0; STENCIL]; 8];
        let mut row_st = [[0.0; STENCIL]; 8];
        for a in 0..8 {
            col_st[a] = stencil_1d(&fv, a).map(f64::abs);
            row_st[a] = stencil_1d(&fh, a).map(f64::abs);
        }

        // Horizontal pass: for each horizontal mode and block column, the
        // |stencil|-weighted gain sum along rows. A block at grid (by, bx)
        // touches canvas rows/cols origin+8 .. origin+30.
        let mut hsum = vec![0.0; 8 * ch * bw];
        for (b_mode, row_stencil) in row_st.iter().enumerate() {
            let plane = &mut hsum[b_mode * ch * bw..(b_mode + 1) * ch * bw];
            for i in 0..ch {
                let grow = &gain[i * cw..(i + 1) * cw];
                for bx in 0..bw {
                    let base = bx * 8 + 8;
                    let mut acc = 0.0;
                    for (dv, &s) in row_stencil.iter().enumerate() {
                        acc += s * grow[base + dv];
                    }
                    plane[i * bw + bx] = acc;
                }
            }
        }

        // Vertical pass: finish the separable window sum per block and mode.
        for by in 0..bh {
            for bx in 0..bw {
                let blk = (by * bw + bx) * 64;
                for (a, col_stencil) in col_st.iter().enumerate() {
                    for b_mode in 0..8 {
                        let plane = &hsum[b_mode * ch * bw..(b_mode + 1) * ch * bw];
                        let mut acc = 0.0;
                        for (du, &s) in col_stencil.iter().enumerate() {
                            acc += s * plane[(by * 8 + 8 + du) * bw + bx];
                        }
                        let pos = a * 8 + b_mode;
                        rho[blk + pos] += acc * cover.table().step(pos) as f64;
                    }
                }
            }
        }
    }
    rho
}
