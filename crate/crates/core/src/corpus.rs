//! Seeded synthetic cover images.
//!
//! Real photographic corpora cannot ship inside the repository, so the
//! experiment harness generates its own: smooth, low-frequency scenes
//! (gradients, gentle waves, soft blobs, a whisper of texture) whose
//! coefficients sit comfortably inside their quantization intervals. That
//! bias is deliberate — these covers exercise the robustness machinery at
//! CI scale without standing in for photographic benchmarks.

use crate::jpeg::{compress, serialize_jpeg, SpatialImage};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::path::{Path, PathBuf};

/// Parameters of a generated corpus.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    /// IJG quality the covers are compressed at.
    pub quality: u8,
    /// Base seed; image `i` uses `seed + i`.
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            count: 20,
            width: 256,
            height: 256,
            quality: 75,
            seed: 1,
        }
    }
}

/// Deterministic synthetic scene: a tilted base plane, a few low-frequency
/// waves, soft radial blobs, and faint texture noise. Amplitudes are budgeted
/// so pixels stay away from 0/255 saturation (clipping is the main source of
/// recompression damage).
pub fn synth_image(seed: u64, width: usize, height: usize) -> SpatialImage {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);

    let base = rng.gen_range(112.0..144.0);
    // Per-pixel slope scaled so the plane spans at most ~32 gray levels
    // from center to edge in each direction.
    let gx = rng.gen_range(-0.5..0.5) * 64.0 / w;
    let gy = rng.gen_range(-0.5..0.5) * 64.0 / h;

    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(-3.0..3.0), // cycles across the width
                rng.gen_range(-3.0..3.0), // cycles across the height
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(4.0..12.0),
            )
        })
        .collect();

    let blobs: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(0.0..w),
                rng.gen_range(0.0..h),
                rng.gen_range(0.10..0.25) * w.min(h), // sigma
                rng.gen_range(-22.0..22.0),
            )
        })
        .collect();

    let noise_amp = rng.gen_range(0.5..1.5);
    let noise_seed = rng.gen::<u64>();
    let mut noise_rng = ChaCha20Rng::seed_from_u64(noise_seed);

    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = base + gx * (xf - w / 2.0) + gy * (yf - h / 2.0);
            for &(fx, fy, phase, amp) in &waves {
                v += amp
                    * (std::f64::consts::TAU * (fx * xf / w + fy * yf / h) + phase).sin();
            }
            for &(cx, cy, sigma, amp) in &blobs {
                let d2 = (xf - cx).powi(2) + (yf - cy).powi(2);
                v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
            }
            v += noise_rng.gen_range(-noise_amp..noise_amp);
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    SpatialImage::new(width, height, pixels).expect("nonzero dimensions")
}

/// Writes `spec.count` covers into `dir` as baseline JFIF files named
/// `cover_000.jpg`, `cover_001.jpg`, … and returns their paths.
pub fn generate_corpus(spec: &CorpusSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let image = synth_image(spec.seed.wrapping_add(i as u64), spec.width, spec.height);
        let coeffs = compress(&image, spec.quality)?;
        let path = dir.join(format!("cover_{i:03}.jpg"));
        std::fs::write(&path, serialize_jpeg(&coeffs)?)?;
        paths.push(path);
    }
    Ok(paths)
}
