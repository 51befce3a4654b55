//! The adaptive robust embedder and its extractors.
//!
//! Embedding proceeds in attempts. Each attempt fixes an embedding domain
//! and an error-correction strength, protects the message with RS coding,
//! embeds the encoded stream with the syndrome trellis, and then plays
//! devil's advocate: it runs the simulated channel against its own output
//! and measures the extraction error rate `R_e`. The first attempt with
//! `R_e` at or below the configured threshold wins. Escalation order is
//! strength-first, domain-second: all twelve RS strengths inside the widest
//! domain, then the next domain, and so on. If nothing meets the threshold
//! the attempt with the smallest `R_e` is returned, flagged `exhausted`.
//!
//! Extraction needs only the recipe (domain, strength, message length,
//! trellis geometry, and the cover's quantization table) — never the cover
//! image itself. When the recipe cannot travel alongside the image,
//! [`auto_extract`] recovers the settings by brute force over all 72
//! domain/strength pairs, validated by an embedded CRC.

use crate::bits::{bytes_to_bits, crc32};
use crate::channel::ChannelModel;
use crate::cost::cost_maps;
use crate::domain::{
    apply_stego_sequence, build_cover_sequence, read_stego_bits, DirectionRule, EmbeddingDomain,
};
use crate::error::Error;
use crate::jpeg::{count_nzac, CoeffImage, QuantTable};
use crate::rscode::{rs_decode, rs_decode_best_effort, rs_encode, rs_encoded_len, RsParams};
use crate::stc::{stc_extract, ternary_embed, StcParams};
use crate::Result;

/// Length of the integrity prefix attached when CRC mode is on.
pub const CRC_BITS: usize = 32;

/// Knobs of the embedding process.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    /// Asymmetry factor of the directional costs, in `[0, 1]`.
    pub alpha: f64,
    /// Acceptance threshold on the simulated extraction error rate.
    pub threshold: f64,
    /// Trellis constraint height.
    pub h: u8,
    /// Seed of the trellis column pool (shared with the extractor).
    pub stc_seed: u64,
    /// The attack the embedding must survive.
    pub channel: ChannelModel,
    /// Expected payload in bits per nonzero AC coefficient. When set, the
    /// message length must equal `round(payload * n_nzac)`.
    pub payload: Option<f64>,
    /// Prefix the message with a CRC so [`auto_extract`] can find it.
    pub crc: bool,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            alpha: 0.7,
            threshold: 1e-4,
            h: 10,
            stc_seed: 0,
            channel: ChannelModel::CoverQuality,
            payload: None,
            crc: false,
        }
    }
}

/// Everything the extractor needs; travels as a JSON sidecar.
///
/// `n_m` counts the embedded bits — the user message plus [`CRC_BITS`] when
/// `crc_mode` is on. `cover_qf` is a convenience mirror of `cover_table`
/// when that table is a standard one.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StegoRecipe {
    pub e_n: u8,
    pub t: usize,
    pub n_m: usize,
    pub h: u8,
    pub stc_seed: u64,
    pub cover_qf: Option<u8>,
    pub cover_table: QuantTable,
    pub crc_mode: bool,
}

/// One step of the escalation schedule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Attempt {
    pub e_n: u8,
    pub t: usize,
    /// Simulated extraction error rate; 1.0 for skipped attempts.
    pub r_e: f64,
    /// True when the encoded message did not fit this domain at this
    /// strength, so no embedding was tried.
    pub skipped_capacity: bool,
}

/// The full history of an embedding run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobustnessReport {
    /// Attempts in schedule order, up to and including the accepted one.
    pub attempts: Vec<Attempt>,
    /// Index into `attempts` of the attempt the output comes from.
    pub chosen: usize,
    /// No attempt met the threshold; the output is the best seen.
    pub exhausted: bool,
}

impl RobustnessReport {
    pub fn final_attempt(&self) -> &Attempt {
        &self.attempts[self.chosen]
    }
}

/// Output of [`embed`] and [`embed_fixed`].
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub stego: CoeffImage,
    pub recipe: StegoRecipe,
    pub report: RobustnessReport,
}

/// Message length for a payload given in bits per nonzero AC coefficient.
pub fn payload_bits(cover: &CoeffImage, payload: f64) -> Result<usize> {
    if !(payload > 0.0) {
        return Err(Error::InvalidParams(format!(
            "payload {payload} bpnzac must be positive"
        )));
    }
    let n_m = (payload * count_nzac(cover) as f64).round() as usize;
    if n_m == 0 {
        return Err(Error::InvalidParams(format!(
            "payload {payload} bpnzac yields an empty message on this cover"
        )));
    }
    Ok(n_m)
}

/// Prepends the 32-bit CRC of `message` (MSB first).
pub fn attach_crc(message: &[u8]) -> Vec<u8> {
    let mut out = bytes_to_bits(&crc32(message).to_be_bytes(), CRC_BITS);
    out.extend(message.iter().map(|b| b & 1));
    out
}

/// Splits off and verifies the CRC prefix; `None` if the check fails.
pub fn strip_crc(bits: &[u8]) -> Option<Vec<u8>> {
    if bits.len() < CRC_BITS {
        return None;
    }
    let (head, body) = bits.split_at(CRC_BITS);
    let expect = head.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
    if crc32(body) == expect {
        Some(body.to_vec())
    } else {
        None
    }
}

/// Embeds `message` into `cover`, escalating error-correction strength and
/// embedding domain until the simulated channel's extraction error rate
/// meets `cfg.threshold`.
///
/// Costs and dither geometry are computed once from the cover and held
/// fixed across all attempts. Fails with [`Error::CapacityExceeded`] only
/// when the weakest encoding does not fit the widest domain — by the
/// strictly-growing encoded-length law, nothing else could fit either.
pub fn embed(cover: &CoeffImage, message: &[u8], cfg: &EmbedConfig) -> Result<EmbedOutcome> {
    if let Some(p) = cfg.payload {
        let expect = payload_bits(cover, p)?;
        if message.len() != expect {
            return Err(Error::InvalidParams(format!(
                "payload {p} bpnzac implies {expect} message bits, got {}",
                message.len()
            )));
        }
    }
    let embedded = attach_if(cfg.crc, message)?;
    let n_m = embedded.len();
    let stc = StcParams::new(cfg.h, cfg.stc_seed)?;
    let (_, dither) = cost_maps(cover, cfg.alpha)?;

    // Feasibility floor: the shortest possible encoding in the widest domain.
    let widest = build_cover_sequence(cover, EmbeddingDomain::new(1)?, &dither)?;
    let shortest = rs_encoded_len(n_m, RsParams::new(1)?);
    if shortest > widest.len() {
        return Err(Error::CapacityExceeded {
            message_bits: n_m,
            carrier_bits: widest.len(),
        });
    }

    let mut attempts: Vec<Attempt> = Vec::new();
    let mut best: Option<(usize, CoeffImage)> = None; // (attempt index, stego)
    for e_n in 1..=6u8 {
        let domain = EmbeddingDomain::new(e_n)?;
        let seq = if e_n == 1 {
            widest.clone()
        } else {
            build_cover_sequence(cover, domain, &dither)?
        };
        for t in 1..=12usize {
            let params = RsParams::new(t)?;
            let encoded_len = rs_encoded_len(n_m, params);
            if encoded_len > seq.len() {
                attempts.push(Attempt {
                    e_n,
                    t,
                    r_e: 1.0,
                    skipped_capacity: true,
                });
                continue;
            }
            let encoded = rs_encode(&embedded, params);
            let outcome = ternary_embed(&seq, &encoded, stc)?;
            let stego =
                apply_stego_sequence(cover, &seq, &outcome.stego_bits, DirectionRule::MinCost)?;
            let r_e = simulate_and_measure(
                &stego,
                cover.table(),
                domain,
                params,
                &embedded,
                stc,
                &cfg.channel,
            )?;
            attempts.push(Attempt {
                e_n,
                t,
                r_e,
                skipped_capacity: false,
            });
            let idx = attempts.len() - 1;
            let improved = match &best {
                Some((b, _)) => r_e < attempts[*b].r_e,
                None => true,
            };
            if improved {
                best = Some((idx, stego.clone()));
            }
            if r_e <= cfg.threshold {
                return Ok(EmbedOutcome {
                    stego,
                    recipe: recipe_for(cover, e_n, t, n_m, cfg),
                    report: RobustnessReport {
                        attempts,
                        chosen: idx,
                        exhausted: false,
                    },
                });
            }
        }
    }

    let (idx, stego) = best.ok_or(Error::CapacityExceeded {
        message_bits: n_m,
        carrier_bits: widest.len(),
    })?;
    let chosen = attempts[idx];
    Ok(EmbedOutcome {
        stego,
        recipe: recipe_for(cover, chosen.e_n, chosen.t, n_m, cfg),
        report: RobustnessReport {
            attempts,
            chosen: idx,
            exhausted: true,
        },
    })
}

/// A single attempt at a fixed domain and strength — the ablation probe.
/// The report holds exactly one attempt; `exhausted` reflects whether it
/// met the threshold.
pub fn embed_fixed(
    cover: &CoeffImage,
    message: &[u8],
    domain: EmbeddingDomain,
    t: usize,
    cfg: &EmbedConfig,
) -> Result<EmbedOutcome> {
    let embedded = attach_if(cfg.crc, message)?;
    let n_m = embedded.len();
    let stc = StcParams::new(cfg.h, cfg.stc_seed)?;
    let (_, dither) = cost_maps(cover, cfg.alpha)?;
    let seq = build_cover_sequence(cover, domain, &dither)?;
    let params = RsParams::new(t)?;
    let encoded_len = rs_encoded_len(n_m, params);
    if encoded_len > seq.len() {
        return Err(Error::CapacityExceeded {
            message_bits: n_m,
            carrier_bits: seq.len(),
        });
    }
    let encoded = rs_encode(&embedded, params);
    let outcome = ternary_embed(&seq, &encoded, stc)?;
    let stego = apply_stego_sequence(cover, &seq, &outcome.stego_bits, DirectionRule::MinCost)?;
    let r_e = simulate_and_measure(
        &stego,
        cover.table(),
        domain,
        params,
        &embedded,
        stc,
        &cfg.channel,
    )?;
    Ok(EmbedOutcome {
        stego,
        recipe: recipe_for(cover, domain.index(), t, n_m, cfg),
        report: RobustnessReport {
            attempts: vec![Attempt {
                e_n: domain.index(),
                t,
                r_e,
                skipped_capacity: false,
            }],
            chosen: 0,
            exhausted: r_e > cfg.threshold,
        },
    })
}

/// Recovers the message from a (possibly recompressed) stego image using
/// the recipe. On an uncorrectable stream the error carries the best-effort
/// bits so callers can still measure how wrong they are.
pub fn extract(stego: &CoeffImage, recipe: &StegoRecipe) -> Result<Vec<u8>> {
    let domain = EmbeddingDomain::new(recipe.e_n)?;
    let params = RsParams::new(recipe.t)?;
    let stc = StcParams::new(recipe.h, recipe.stc_seed)?;
    let carrier = read_stego_bits(stego, domain, &recipe.cover_table);
    let encoded_len = rs_encoded_len(recipe.n_m, params);
    if encoded_len > carrier.len() {
        return Err(Error::LengthMismatch(format!(
            "recipe implies {encoded_len} encoded bits but the carrier holds {}",
            carrier.len()
        )));
    }
    let encoded = stc_extract(&carrier, encoded_len, stc);
    match rs_decode(&encoded, params, recipe.n_m) {
        Ok(bits) => {
            if recipe.crc_mode {
                strip_crc(&bits).ok_or_else(|| {
                    Error::FramingError("integrity prefix does not match the payload".into())
                })
            } else {
                Ok(bits)
            }
        }
        Err(Error::DecodeFailure { .. }) => {
            let (bits, failed, _) = rs_decode_best_effort(&encoded, params, recipe.n_m)?;
            Err(Error::ExtractFailure {
                failed_blocks: failed,
                bits,
            })
        }
        Err(e) => Err(e),
    }
}

/// Recipe-free extraction: tries every domain/strength pair in schedule
/// order and accepts the first whose RS decode succeeds and whose CRC
/// validates. Only works for messages embedded with `cfg.crc = true`;
/// `message_len` is the length of the user message (without the CRC).
pub fn auto_extract(
    stego: &CoeffImage,
    message_len: usize,
    h: u8,
    stc_seed: u64,
    cover_table: &QuantTable,
) -> Result<(Vec<u8>, u8, usize)> {
    let stc = StcParams::new(h, stc_seed)?;
    let n_m = message_len + CRC_BITS;
    for e_n in 1..=6u8 {
        let domain = EmbeddingDomain::new(e_n)?;
        let carrier = read_stego_bits(stego, domain, cover_table);
        for t in 1..=12usize {
            let params = RsParams::new(t)?;
            let encoded_len = rs_encoded_len(n_m, params);
            if encoded_len > carrier.len() {
                continue;
            }
            let encoded = stc_extract(&carrier, encoded_len, stc);
            if let Ok(bits) = rs_decode(&encoded, params, n_m) {
                if let Some(message) = strip_crc(&bits) {
                    return Ok((message, e_n, t));
                }
            }
        }
    }
    Err(Error::NotFound)
}

fn attach_if(crc: bool, message: &[u8]) -> Result<Vec<u8>> {
    if message.is_empty() {
        return Err(Error::InvalidParams("empty message".into()));
    }
    Ok(if crc {
        attach_crc(message)
    } else {
        message.iter().map(|b| b & 1).collect()
    })
}

fn recipe_for(cover: &CoeffImage, e_n: u8, t: usize, n_m: usize, cfg: &EmbedConfig) -> StegoRecipe {
    StegoRecipe {
        e_n,
        t,
        n_m,
        h: cfg.h,
        stc_seed: cfg.stc_seed,
        cover_qf: cover.quality(),
        cover_table: cover.table().clone(),
        crc_mode: cfg.crc,
    }
}

/// Runs the channel on `stego`, extracts with full knowledge of the
/// settings, and returns the fraction of embedded bits that come back
/// wrong (best-effort RS decoding, so damaged blocks still count bitwise).
fn simulate_and_measure(
    stego: &CoeffImage,
    cover_table: &QuantTable,
    domain: EmbeddingDomain,
    params: RsParams,
    embedded: &[u8],
    stc: StcParams,
    channel: &ChannelModel,
) -> Result<f64> {
    let received = channel.simulate(stego)?;
    let received = received.as_ref().unwrap_or(stego);
    let carrier = read_stego_bits(received, domain, cover_table);
    let encoded_len = rs_encoded_len(embedded.len(), params);
    let encoded = stc_extract(&carrier, encoded_len, stc);
    let (decoded, _, _) = rs_decode_best_effort(&encoded, params, embedded.len())?;
    let wrong = decoded.iter().zip(embedded).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / embedded.len() as f64)
}
