//! The embedding cost model: symmetric base distortion, directional
//! asymmetry, and the dither-modulation geometry that turns costs into
//! per-element flip prices.

mod juniward;

pub use juniward::SIGMA;

use crate::error::Error;
use crate::jpeg::{requantization_signal, CoeffImage};
use crate::Result;
use std::io::Write;
use std::path::Path;

/// Cost ceiling: elements at or above this are treated as unflippable by
/// the trellis search. Nothing in the pipeline produces such costs today;
/// the ceiling exists so a future wet-element policy slots in without
/// touching the coding layers.
pub const WET_COST: f64 = 1e13;

/// Per-coefficient distortion maps, block-major, 64 entries per block.
#[derive(Debug, Clone)]
pub struct CostMaps {
    pub blocks_w: usize,
    pub blocks_h: usize,
    /// Asymmetry factor the directional maps were built with.
    pub alpha: f64,
    /// Direction-symmetric base cost of a one-step change.
    pub rho: Vec<f64>,
    /// Cost of changing the coefficient by +1.
    pub rho_plus: Vec<f64>,
    /// Cost of changing the coefficient by -1.
    pub rho_minus: Vec<f64>,
}

/// Dither-modulation geometry per coefficient, block-major.
///
/// `dequant_real` is the real-valued DCT coefficient of the rounded and
/// clamped decompression of the cover: the value a decoder that re-encodes
/// the image actually quantizes. Spatial rounding shifts it off the exact
/// grid `coefficient * step`, and that shift is both the polarity signal the
/// asymmetric costs exploit and the reference point bits are modulated
/// around.
#[derive(Debug, Clone)]
pub struct DitherInfo {
    /// Quantization interval index `k = round(dequant_real / step)`.
    pub interval: Vec<i32>,
    /// Parity of `interval`: the bit the unmodified cover carries.
    pub cover_bit: Vec<u8>,
    /// Distance from `dequant_real` up to the center of interval `k+1`.
    pub d_plus: Vec<f64>,
    /// Distance from `dequant_real` down to the center of interval `k-1`.
    pub d_minus: Vec<f64>,
    /// Flip price in the +1 direction: `(rho_plus / step) * d_plus`.
    pub xi_plus: Vec<f64>,
    /// Flip price in the -1 direction: `(rho_minus / step) * d_minus`.
    pub xi_minus: Vec<f64>,
    /// The requantization reference value itself.
    pub dequant_real: Vec<f64>,
}

/// Direction-symmetric base distortion of each coefficient (one-step
/// change), block-major. See the module docs for the exact convention.
pub fn juniward_costs(cover: &CoeffImage) -> Vec<f64> {
    juniward::costs(cover)
}

/// Splits a symmetric cost map into directional maps.
///
/// Rounding during decompression leaves each stored coefficient `x` slightly
/// off its true value `dequant_real / step`; a change *toward* that value
/// disturbs the image less than the model's symmetric price, so it is
/// discounted by `alpha`:
///
/// * `rho_plus  = alpha * rho` where `x < dequant_real / step`, else `rho`
/// * `rho_minus = alpha * rho` where `x > dequant_real / step`, else `rho`
///
/// At exact equality neither direction is preferred and both keep `rho`.
/// `alpha = 1` disables the asymmetry.
pub fn asymmetric_costs(
    cover: &CoeffImage,
    rho: &[f64],
    dequant_real: &[f64],
    alpha: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let n = cover.n_blocks() * 64;
    if rho.len() != n || dequant_real.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost/reference maps ({}, {}) do not match {} coefficients",
            rho.len(),
            dequant_real.len(),
            n
        )));
    }
    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    for i in 0..n {
        let x = cover.coeffs()[i] as f64;
        let reference = dequant_real[i] / cover.table().step(i % 64) as f64;
        plus[i] = if x < reference { alpha * rho[i] } else { rho[i] };
        minus[i] = if x > reference { alpha * rho[i] } else { rho[i] };
    }
    Ok((plus, minus))
}

/// Converts a directional cost map into flip prices for one direction:
/// per-unit-of-value cost `rho / step`, times the value distance `d` the
/// dither modulation actually moves.
pub fn modifying_costs(cover: &CoeffImage, rho_dir: &[f64], d_dir: &[f64]) -> Vec<f64> {
    debug_assert_eq!(rho_dir.len(), d_dir.len());
    rho_dir
        .iter()
        .zip(d_dir)
        .enumerate()
        .map(|(i, (&rho, &d))| {
            let step = cover.table().step(i % 64) as f64;
            ((rho / step) * d).min(WET_COST)
        })
        .collect()
}

/// Computes the full cost model for one cover: base costs, directional
/// split, and dither geometry, all from a single pass over the image.
pub fn cost_maps(cover: &CoeffImage, alpha: f64) -> Result<(CostMaps, DitherInfo)> {
    let rho = juniward_costs(cover);
    let dequant_real = requantization_signal(cover);
    let (rho_plus, rho_minus) = asymmetric_costs(cover, &rho, &dequant_real, alpha)?;

    let n = cover.n_blocks() * 64;
    let mut interval = vec![0i32; n];
    let mut cover_bit = vec![0u8; n];
    let mut d_plus = vec![0.0; n];
    let mut d_minus = vec![0.0; n];
    for i in 0..n {
        let step = cover.table().step(i % 64) as f64;
        let k = (dequant_real[i] / step).round();
        interval[i] = k as i32;
        cover_bit[i] = (k as i64).rem_euclid(2) as u8;
        d_plus[i] = (k + 1.0) * step - dequant_real[i];
        d_minus[i] = dequant_real[i] - (k - 1.0) * step;
    }
    let xi_plus = modifying_costs(cover, &rho_plus, &d_plus);
    let xi_minus = modifying_costs(cover, &rho_minus, &d_minus);

    Ok((
        CostMaps {
            blocks_w: cover.blocks_w(),
            blocks_h: cover.blocks_h(),
            alpha,
            rho,
            rho_plus,
            rho_minus,
        },
        DitherInfo {
            interval,
            cover_bit,
            d_plus,
            d_minus,
            xi_plus,
            xi_minus,
            dequant_real,
        },
    ))
}

/// Writes the three cost maps as raw little-endian `f64` arrays
/// (`rho.f64`, `rho_plus.f64`, `rho_minus.f64`, block-major) plus a
/// `costs.json` header describing geometry and parameters.
pub fn dump_cost_maps(maps: &CostMaps, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let header = serde_json::json!({
        "blocks_w": maps.blocks_w,
        "blocks_h": maps.blocks_h,
        "coefficients_per_block": 64,
        "alpha": maps.alpha,
        "dtype": "f64",
        "byte_order": "little-endian",
        "order": "block-major, row-major within block",
        "files": ["rho.f64", "rho_plus.f64", "rho_minus.f64"],
    });
    std::fs::write(dir.join("costs.json"), serde_json::to_vec_pretty(&header)?)?;
    for (name, map) in [
        ("rho.f64", &maps.rho),
        ("rho_plus.f64", &maps.rho_plus),
        ("rho_minus.f64", &maps.rho_minus),
    ] {
        let mut f = std::fs::File::create(dir.join(name))?;
        for v in map {
            f.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}
