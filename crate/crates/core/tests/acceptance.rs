//! End-to-end acceptance checks, one test per guarantee the library makes.
//!
//! Each test prints a single `acceptance <name>: PASS` / `FAIL` line so a
//! run of this target reads as a checklist. Every check measures through
//! the public API only — embeddings are attacked with an independently
//! constructed channel, trellis optimality is compared against an
//! exhaustive search, and coded lengths against the framing law restated
//! here from first principles.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stegarmor_core::{
    compress, cost_maps, decompress, embed, embed_fixed, extract, ijg_quant_table, parse_jpeg,
    payload_bits, random_bits, recompress, rs_decode, rs_encode, rs_encoded_len, serialize_jpeg,
    stc_embed, stc_extract, synth_image, ChannelModel, CoeffImage, EmbedConfig, EmbedOutcome,
    EmbeddingDomain, Error, QuantTable, RsParams, StcParams, RS_N, SYMBOL_BITS,
};

type Check = Result<(), String>;

/// Fails the closure's check with a formatted message.
macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !($cond) {
            return Err(format!($($arg)+));
        }
    };
}

fn criterion(name: &str, run: impl FnOnce() -> Check) {
    match run() {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(why) => {
            println!("acceptance {name}: FAIL — {why}");
            panic!("acceptance {name}: {why}");
        }
    }
}

fn lib<T>(result: stegarmor_core::Result<T>, what: &str) -> Result<T, String> {
    result.map_err(|e| format!("{what}: {e}"))
}

/// Extracted bits even when too many blocks failed to decode: the
/// best-effort payload is still the right thing to score.
fn extracted_bits(result: stegarmor_core::Result<Vec<u8>>) -> Result<Vec<u8>, String> {
    match result {
        Ok(bits) => Ok(bits),
        Err(Error::ExtractFailure { bits, .. }) => Ok(bits),
        Err(e) => Err(format!("extraction failed outright: {e}")),
    }
}

fn error_rate(got: &[u8], want: &[u8]) -> f64 {
    let wrong = got.iter().zip(want).filter(|(a, b)| a != b).count() + want.len().abs_diff(got.len());
    wrong as f64 / want.len() as f64
}

/// Attacks a finished embedding with a freshly built channel and scores
/// the extraction against the original message.
fn measured_error(outcome: &EmbedOutcome, message: &[u8], qf: u8) -> Result<f64, String> {
    let attacked = lib(recompress(&outcome.stego, qf), "channel recompression")?;
    let got = extracted_bits(extract(&attacked, &outcome.recipe))?;
    Ok(error_rate(&got, message))
}

#[test]
fn lossless_round_trip_is_exact() {
    criterion("1 lossless round trip", || {
        let started = Instant::now();
        let payloads = [0.05, 0.1];
        let alphas = [0.7, 1.0];
        for i in 0..50u64 {
            let cover = lib(compress(&synth_image(i, 128, 128), 75), "cover build")?;
            let p = payloads[(i % 2) as usize];
            let alpha = alphas[((i / 2) % 2) as usize];
            let n_m = lib(payload_bits(&cover, p), "payload sizing")?;
            let message = random_bits(1_000 + i, n_m);
            let cfg = EmbedConfig {
                alpha,
                channel: ChannelModel::Lossless,
                payload: Some(p),
                stc_seed: i,
                ..EmbedConfig::default()
            };
            let out = lib(embed(&cover, &message, &cfg), &format!("case {i} embed"))?;
            let got = lib(extract(&out.stego, &out.recipe), &format!("case {i} extract"))?;
            ensure!(
                got == message,
                "case {i} (payload {p}, alpha {alpha}): {} of {} bits wrong without any channel",
                got.iter().zip(&message).filter(|(a, b)| a != b).count(),
                message.len()
            );
        }
        let elapsed = started.elapsed();
        ensure!(
            elapsed < Duration::from_secs(60),
            "50 round trips took {elapsed:?}, over the 60 s budget"
        );
        Ok(())
    });
}

#[test]
fn closed_loop_survives_matching_recompression() {
    criterion("2 closed-loop robustness", || {
        let n_images = 20u64;
        let mut embedded = 0usize;
        for i in 0..n_images {
            let cover = lib(compress(&synth_image(200 + i, 256, 256), 75), "cover build")?;
            let n_m = lib(payload_bits(&cover, 0.05), "payload sizing")?;
            let message = random_bits(5_000 + i, n_m);
            let cfg = EmbedConfig {
                channel: ChannelModel::Quality(75),
                payload: Some(0.05),
                stc_seed: i,
                ..EmbedConfig::default()
            };
            let out = lib(embed(&cover, &message, &cfg), &format!("image {i} embed"))?;
            if out.report.exhausted {
                continue;
            }
            embedded += 1;
            let r = measured_error(&out, &message, 75)?;
            ensure!(
                r <= 1e-4,
                "image {i}: closed-loop error rate {r:.6e} above the 1e-4 threshold"
            );
        }
        ensure!(
            embedded * 10 >= n_images as usize * 9,
            "only {embedded} of {n_images} images embedded without exhausting the schedule"
        );
        Ok(())
    });
}

fn pack(bits: &[u8]) -> u32 {
    bits.iter()
        .enumerate()
        .fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i))
}

#[test]
fn trellis_embedding_is_cost_optimal() {
    criterion("3 trellis optimality", || {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..200 {
            let n = rng.gen_range(6..=20usize);
            let m = rng.gen_range(1..=n);
            let h = if rng.gen::<bool>() { 2u8 } else { 3 };
            let params = lib(StcParams::new(h, rng.gen()), "trellis params")?;
            let cover: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1u8)).collect();
            let costs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
            let message: Vec<u8> = (0..m).map(|_| rng.gen_range(0..=1u8)).collect();

            // The parity matrix, recovered column by column through the
            // public extractor: the syndrome map is linear, so extracting
            // a unit vector reads off one column.
            let cols: Vec<u32> = (0..n)
                .map(|j| {
                    let mut unit = vec![0u8; n];
                    unit[j] = 1;
                    pack(&stc_extract(&unit, m, params))
                })
                .collect();
            let target = pack(&message);

            let y = lib(
                stc_embed(&cover, &costs, &message, params),
                &format!("case {case} embed"),
            )?;
            ensure!(
                stc_extract(&y, m, params) == message,
                "case {case}: embedding does not satisfy its own syndrome"
            );
            let trellis_cost: f64 = (0..n).filter(|&i| y[i] != cover[i]).map(|i| costs[i]).sum();

            // Exhaustive minimum over all 2^n candidates. The syndrome is
            // tracked incrementally along a Gray walk; the cost of each
            // matching candidate is recomputed exactly from scratch so no
            // floating-point drift accumulates into the comparison.
            let cover_mask: u64 = cover
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | ((b as u64) << i));
            let exact_cost = |y_mask: u64| -> f64 {
                let mut diff = y_mask ^ cover_mask;
                let mut sum = 0.0;
                while diff != 0 {
                    let k = diff.trailing_zeros() as usize;
                    sum += costs[k];
                    diff &= diff - 1;
                }
                sum
            };
            let mut y_mask = 0u64;
            let mut syndrome = 0u32;
            let mut best = if syndrome == target {
                exact_cost(y_mask)
            } else {
                f64::INFINITY
            };
            for g in 1u64..(1u64 << n) {
                let k = g.trailing_zeros() as usize;
                y_mask ^= 1 << k;
                syndrome ^= cols[k];
                if syndrome == target {
                    let cost = exact_cost(y_mask);
                    if cost < best {
                        best = cost;
                    }
                }
            }
            ensure!(
                best.is_finite(),
                "case {case}: exhaustive search found no solution, yet the trellis embedded"
            );
            ensure!(
                (trellis_cost - best).abs() <= 1e-9,
                "case {case} (n={n}, m={m}, h={h}): trellis cost {trellis_cost} vs exhaustive minimum {best}"
            );
        }
        Ok(())
    });
}

fn corrupt_symbols(bits: &mut [u8], count: usize, rng: &mut ChaCha8Rng) {
    let n_symbols = bits.len() / SYMBOL_BITS;
    let mut chosen = std::collections::BTreeSet::new();
    while chosen.len() < count {
        chosen.insert(rng.gen_range(0..n_symbols));
    }
    for &s in &chosen {
        let mask = rng.gen_range(1..32u8);
        for b in 0..SYMBOL_BITS {
            bits[s * SYMBOL_BITS + b] ^= (mask >> (SYMBOL_BITS - 1 - b)) & 1;
        }
    }
}

fn symbol_distance(a: &[u8], b: &[u8]) -> usize {
    a.chunks(SYMBOL_BITS)
        .zip(b.chunks(SYMBOL_BITS))
        .filter(|(x, y)| x != y)
        .count()
}

#[test]
fn error_correction_meets_its_guarantee() {
    criterion("4 error-correction guarantee", || {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for t in 1..=12usize {
            let params = lib(RsParams::new(t), "code params")?;
            let n_bits = (RS_N - 2 * t) * SYMBOL_BITS;
            ensure!(
                rs_encoded_len(n_bits, params) == RS_N * SYMBOL_BITS,
                "t={t}: a full data block should encode to exactly one codeword"
            );
            for case in 0..100 {
                let message: Vec<u8> = (0..n_bits).map(|_| rng.gen_range(0..=1u8)).collect();
                let encoded = rs_encode(&message, params);

                let mut hit = encoded.clone();
                corrupt_symbols(&mut hit, t, &mut rng);
                let decoded = rs_decode(&hit, params, n_bits)
                    .map_err(|e| format!("t={t} case {case}: decode failed under {t} symbol errors: {e}"))?;
                ensure!(
                    decoded == message,
                    "t={t} case {case}: wrong message recovered under exactly {t} symbol errors"
                );

                // One error beyond the radius must either be reported or
                // resolve to a *different* nearest codeword — never to a
                // claimed correction of the original.
                let mut over = encoded.clone();
                corrupt_symbols(&mut over, t + 1, &mut rng);
                match rs_decode(&over, params, n_bits) {
                    Err(_) => {}
                    Ok(got) => {
                        ensure!(
                            got != message,
                            "t={t} case {case}: decoder claimed success beyond its correction radius"
                        );
                        let reencoded = rs_encode(&got, params);
                        let dist = symbol_distance(&reencoded, &over);
                        ensure!(
                            dist <= t,
                            "t={t} case {case}: decoder output is not a nearest codeword (distance {dist})"
                        );
                    }
                }
            }
        }
        Ok(())
    });
}

#[test]
fn dither_distances_cover_two_steps() {
    criterion("5 dither geometry", || {
        let qualities = [50u8, 60, 70, 75, 85, 90];
        for i in 0..10u64 {
            let qf = qualities[i as usize % qualities.len()];
            let side = 64 + 8 * (i as usize % 5);
            let cover = lib(compress(&synth_image(500 + i, side, side + 8), qf), "cover build")?;
            let (_, dither) = lib(cost_maps(&cover, 0.7), "cost model")?;
            for idx in 0..cover.n_blocks() * 64 {
                let step = cover.table().step(idx % 64) as f64;
                let sum = dither.d_plus[idx] + dither.d_minus[idx];
                ensure!(
                    (sum - 2.0 * step).abs() <= 1e-9,
                    "image {i} coefficient {idx}: d+ + d- = {sum}, expected {}",
                    2.0 * step
                );
            }
            let (maps, _) = lib(cost_maps(&cover, 1.0), "cost model")?;
            ensure!(
                maps.rho_plus == maps.rho_minus,
                "image {i}: alpha = 1 should price both directions identically"
            );
        }
        Ok(())
    });
}

#[test]
fn carrier_domain_sizes_are_exact() {
    criterion("6 carrier domain sizes", || {
        let expected = [64usize, 35, 33, 30, 26, 21];
        for (domain, want) in EmbeddingDomain::all().into_iter().zip(expected) {
            let positions = domain.positions();
            ensure!(
                positions.len() == want,
                "{domain} carries {} positions, expected {want}",
                positions.len()
            );
            let unique: std::collections::BTreeSet<_> = positions.iter().collect();
            ensure!(
                unique.len() == positions.len() && positions.iter().all(|&p| p < 64),
                "{domain} positions are not {want} distinct in-block indices"
            );
        }
        Ok(())
    });
}

/// The framing law, restated from first principles: the message is split
/// into 5-bit symbols, full blocks of `31 - 2t` data symbols each grow to
/// 31, and a nonempty tail keeps its length plus `2t` check symbols.
fn framed_len(message_bits: usize, t: usize) -> usize {
    let symbols = message_bits.div_ceil(SYMBOL_BITS);
    let data_per_block = RS_N - 2 * t;
    let full = symbols / data_per_block;
    let tail = symbols % data_per_block;
    let coded = full * RS_N + if tail > 0 { tail + 2 * t } else { 0 };
    coded * SYMBOL_BITS
}

#[test]
fn encoded_length_follows_the_framing_law() {
    criterion("7 encoded-length law", || {
        let n_m = 524_288usize;
        let mut prev = 0usize;
        for t in 1..=12usize {
            let params = lib(RsParams::new(t), "code params")?;
            let got = rs_encoded_len(n_m, params);
            let want = framed_len(n_m, t);
            ensure!(got == want, "t={t}: encoded length {got} != framing law {want}");
            ensure!(
                got > prev,
                "t={t}: encoded length {got} does not grow past {prev} from t={}",
                t - 1
            );
            prev = got;
        }
        Ok(())
    });
}

/// Embeds at one fixed setting and scores the closed loop; a setting whose
/// encoding does not fit the carrier counts as total loss.
fn fixed_setting_error(
    cover: &CoeffImage,
    message: &[u8],
    domain: EmbeddingDomain,
    t: usize,
    cfg: &EmbedConfig,
    qf: u8,
) -> Result<f64, String> {
    match embed_fixed(cover, message, domain, t, cfg) {
        Ok(out) => measured_error(&out, message, qf),
        Err(Error::CapacityExceeded { .. }) => Ok(1.0),
        Err(e) => Err(format!("fixed embed ({domain}, t={t}): {e}")),
    }
}

#[test]
fn robustness_trends_match_the_design() {
    criterion("8 robustness trends", || {
        let qf = 75u8;
        let payload = 0.15f64;
        let n_images = 10u64;
        let mut by_domain = [0.0f64; 6];
        let mut by_strength = [0.0f64; 12];
        let mut adaptive_total = 0.0f64;
        for i in 0..n_images {
            let cover = lib(compress(&synth_image(800 + i, 128, 128), qf), "cover build")?;
            let n_m = lib(payload_bits(&cover, payload), "payload sizing")?;
            let message = random_bits(9_000 + i, n_m);
            let cfg = EmbedConfig {
                channel: ChannelModel::Quality(qf),
                payload: Some(payload),
                stc_seed: i,
                ..EmbedConfig::default()
            };
            for (slot, domain) in EmbeddingDomain::all().into_iter().enumerate() {
                by_domain[slot] += fixed_setting_error(&cover, &message, domain, 8, &cfg, qf)?;
            }
            let widest = lib(EmbeddingDomain::new(1), "domain index")?;
            for t in 1..=12usize {
                by_strength[t - 1] += fixed_setting_error(&cover, &message, widest, t, &cfg, qf)?;
            }
            let out = lib(embed(&cover, &message, &cfg), &format!("image {i} adaptive embed"))?;
            adaptive_total += measured_error(&out, &message, qf)?;
        }
        let scale = n_images as f64;
        for v in by_domain.iter_mut().chain(by_strength.iter_mut()) {
            *v /= scale;
        }
        let adaptive_mean = adaptive_total / scale;
        for w in by_domain.windows(2) {
            ensure!(
                w[1] <= w[0] + 1e-12,
                "mean error rises from {} to {} as the carrier narrows: {by_domain:?}",
                w[0],
                w[1]
            );
        }
        for w in by_strength.windows(2) {
            ensure!(
                w[1] <= w[0] + 1e-12,
                "mean error rises from {} to {} as the code strengthens: {by_strength:?}",
                w[0],
                w[1]
            );
        }
        let best_fixed = by_domain
            .iter()
            .chain(by_strength.iter())
            .fold(f64::INFINITY, |a, &b| a.min(b));
        ensure!(
            adaptive_mean <= best_fixed + 1e-4,
            "adaptive mean {adaptive_mean} worse than the best fixed setting {best_fixed}"
        );
        Ok(())
    });
}

#[test]
fn codec_round_trips_and_interops() {
    criterion("9 codec fidelity", || {
        // A hundred random coefficient images survive a serialize/parse
        // round trip bit-exactly, odd geometries and dense tables included.
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        for case in 0..100 {
            let w = rng.gen_range(1..=96usize);
            let h = rng.gen_range(1..=96usize);
            let mut steps = [0u16; 64];
            for s in &mut steps {
                *s = rng.gen_range(1..=255);
            }
            let table = lib(QuantTable::new(steps), "table build")?;
            let blocks = w.div_ceil(8) * h.div_ceil(8);
            let mut coeffs = vec![0i16; blocks * 64];
            for b in 0..blocks {
                coeffs[b * 64] = rng.gen_range(-1000..=1000);
                for j in 1..64 {
                    if rng.gen_ratio(1, 4) {
                        coeffs[b * 64 + j] = rng.gen_range(-1023..=1023);
                    }
                }
            }
            let image = lib(
                CoeffImage::new(w, h, table, coeffs),
                &format!("case {case} image build"),
            )?;
            let bytes = lib(serialize_jpeg(&image), &format!("case {case} serialize"))?;
            let back = lib(parse_jpeg(&bytes), &format!("case {case} parse"))?;
            ensure!(
                back.width() == image.width() && back.height() == image.height(),
                "case {case}: geometry changed across the round trip"
            );
            ensure!(
                back.table() == image.table(),
                "case {case}: quantization table changed across the round trip"
            );
            ensure!(
                back.coeffs() == image.coeffs(),
                "case {case}: coefficients changed across the round trip"
            );
        }

        // Quality 50 must reproduce the ITU T.81 base luminance table.
        let base: [u16; 64] = [
            16, 11, 10, 16, 24, 40, 51, 61, //
            12, 12, 14, 19, 26, 58, 60, 55, //
            14, 13, 16, 24, 40, 57, 69, 56, //
            14, 17, 22, 29, 51, 87, 80, 62, //
            18, 22, 37, 56, 68, 109, 103, 77, //
            24, 35, 55, 64, 81, 104, 113, 92, //
            49, 64, 78, 87, 103, 121, 120, 101, //
            72, 92, 95, 98, 112, 100, 103, 99,
        ];
        let q50 = lib(ijg_quant_table(50), "quality-50 table")?;
        for (i, &want) in base.iter().enumerate() {
            ensure!(
                q50.step(i) == want,
                "quality-50 step {i} is {}, the standard base table says {want}",
                q50.step(i)
            );
        }

        // An unrelated decoder must accept the serializer's output and
        // see essentially the same picture we do.
        let cover = lib(compress(&synth_image(7, 96, 96), 75), "cover build")?;
        let bytes = lib(serialize_jpeg(&cover), "serialize")?;
        let decoded = image::load_from_memory(&bytes)
            .map_err(|e| format!("third-party decoder rejected the output: {e}"))?;
        ensure!(
            decoded.width() == 96 && decoded.height() == 96,
            "third-party decoder saw {}x{}, expected 96x96",
            decoded.width(),
            decoded.height()
        );
        let theirs = decoded.to_luma8();
        let ours = decompress(&cover);
        let total: f64 = theirs
            .as_raw()
            .iter()
            .zip(ours.pixels())
            .map(|(&a, &b)| (a as f64 - b as f64).abs())
            .sum();
        let mean = total / ours.pixels().len() as f64;
        ensure!(
            mean <= 2.0,
            "third-party decode differs from ours by {mean:.3} gray levels on average"
        );
        Ok(())
    });
}
