//! Batch experiment runner: robustness sweeps and ablations over an image
//! set, emitting CSV.
//!
//! Every run follows the honest evaluation loop — embed, push the stego
//! image through the channel *independently*, extract with only the recipe,
//! and count wrong bits against the true message — rather than trusting the
//! error rate the embedder simulated internally. The two agree when
//! everything is correct, which is exactly why measuring the long way is
//! worth it.
//!
//! Rows are computed in parallel across a bounded worker pool and emitted in
//! a deterministic order, so a run is reproducible byte-for-byte except for
//! the wall-clock column.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use stegarmor_core::{
    count_nzac, embed, embed_fixed, extract, parse_jpeg, payload_bits, random_bits, recompress,
    ChannelModel, CoeffImage, EmbedConfig, EmbeddingDomain, Error as CoreError,
};

/// A batch robustness experiment, loadable from a JSON config file.
///
/// `images` and `image_dir` both contribute covers; the directory is scanned
/// for `*.jpg` in name order. When `q_cover` is set, covers are recompressed
/// to that quality before embedding. `q_channel = None` means the channel
/// recompresses at each cover's own quality.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub images: Vec<PathBuf>,
    pub image_dir: Option<PathBuf>,
    pub payloads: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub q_cover: Option<u8>,
    pub q_channel: Option<u8>,
    pub alpha: f64,
    pub h: u8,
    pub seed: u64,
    pub repetitions: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            images: Vec::new(),
            image_dir: None,
            payloads: vec![0.05],
            thresholds: vec![1e-4],
            q_cover: None,
            q_channel: None,
            alpha: 0.7,
            h: 10,
            seed: 0,
            repetitions: 1,
        }
    }
}

impl ExperimentSpec {
    /// The cover list: explicit paths first, then the directory scan.
    pub fn resolve_images(&self) -> anyhow::Result<Vec<PathBuf>> {
        let mut list = self.images.clone();
        if let Some(dir) = &self.image_dir {
            let mut scanned: Vec<PathBuf> = std::fs::read_dir(dir)
                .with_context(|| format!("reading image directory {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "jpg" || e == "jpeg"))
                .collect();
            scanned.sort();
            list.extend(scanned);
        }
        if list.is_empty() {
            bail!("no cover images: give --images or a config with images/image_dir");
        }
        if self.payloads.is_empty() || self.thresholds.is_empty() {
            bail!("payload and threshold grids must be non-empty");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        Ok(list)
    }
}

/// One CSV row of a batch run. `None` fields print as empty cells.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub image: String,
    pub rep: Option<usize>,
    /// Achieved payload `n_m / n_nzac` (not the requested grid value).
    pub payload: f64,
    pub threshold: f64,
    pub q_cover: Option<u8>,
    /// `None` means the channel runs at the cover's own quality.
    pub q_channel: Option<u8>,
    pub e_n: Option<u8>,
    pub t: Option<usize>,
    pub r_error: Option<f64>,
    pub exhausted: Option<bool>,
    pub attempts: Option<usize>,
    pub n_m: Option<usize>,
    pub n_nzac: Option<usize>,
    pub wall_ms: Option<f64>,
    /// `ok`, or why the row carries no measurement (`capacity`, `error`).
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Capacity,
    Error(String),
}

impl Status {
    fn as_cell(&self) -> String {
        match self {
            Status::Ok => "ok".into(),
            Status::Capacity => "capacity".into(),
            Status::Error(msg) => format!("error: {}", msg.replace('\n', " ")),
        }
    }
}

pub const BENCH_HEADER: [&str; 15] = [
    "image",
    "rep",
    "payload",
    "threshold",
    "q_cover",
    "q_channel",
    "e_n",
    "t",
    "r_error",
    "exhausted",
    "attempts",
    "n_m",
    "n_nzac",
    "wall_ms",
    "status",
];

/// Which fixed settings an ablation sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationMode {
    /// Fix t = 8, walk the domain from E64 to the highest-frequency band.
    Domain,
    /// Fix the domain at E64, walk t over the full strength range.
    Strength,
}

impl AblationMode {
    /// The (domain, t) grid, in emission order.
    pub fn settings(self) -> Vec<(EmbeddingDomain, usize)> {
        match self {
            AblationMode::Domain => (1..=6)
                .map(|n| (EmbeddingDomain::new(n).unwrap(), 8))
                .collect(),
            AblationMode::Strength => (1..=12)
                .map(|t| (EmbeddingDomain::new(1).unwrap(), t))
                .collect(),
        }
    }
}

/// Builds the worker pool honoring `STEGARMOR_WORKERS` (0 or unset: one
/// worker per logical CPU).
pub fn worker_pool() -> anyhow::Result<rayon::ThreadPool> {
    let workers = match std::env::var("STEGARMOR_WORKERS") {
        Ok(v) => v
            .parse::<usize>()
            .with_context(|| format!("STEGARMOR_WORKERS={v} is not a worker count"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()?)
}

fn load_cover(path: &Path, q_cover: Option<u8>) -> anyhow::Result<CoeffImage> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading cover {}", path.display()))?;
    let image =
        parse_jpeg(&bytes).with_context(|| format!("parsing cover {}", path.display()))?;
    match q_cover {
        Some(q) if image.quality() != Some(q) => Ok(recompress(&image, q)?),
        _ => Ok(image),
    }
}

fn image_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn channel_for(q_channel: Option<u8>) -> ChannelModel {
    match q_channel {
        Some(q) => ChannelModel::Quality(q),
        None => ChannelModel::CoverQuality,
    }
}

/// Counts disagreeing bits, treating any length difference as fully wrong.
fn bit_errors(got: &[u8], want: &[u8]) -> usize {
    if got.len() != want.len() {
        return want.len();
    }
    got.iter().zip(want).filter(|(a, b)| a != b).count()
}

/// Embed → independent channel pass → extract from the recipe alone →
/// compare with the truth. Returns (R_error, report fields are the
/// caller's to take from the outcome).
fn measure_closed_loop(
    outcome: &stegarmor_core::EmbedOutcome,
    truth: &[u8],
    channel: &ChannelModel,
) -> anyhow::Result<f64> {
    let attacked = match channel.simulate(&outcome.stego)? {
        Some(img) => img,
        None => outcome.stego.clone(),
    };
    let got = match extract(&attacked, &outcome.recipe) {
        Ok(bits) => bits,
        Err(CoreError::ExtractFailure { bits, .. }) => bits,
        Err(e) => return Err(e.into()),
    };
    Ok(bit_errors(&got, truth) as f64 / truth.len() as f64)
}

/// One bench job: a (cover, repetition, payload, threshold) cell.
struct Job {
    image: PathBuf,
    rep: usize,
    payload: f64,
    threshold: f64,
    message_seed: u64,
}

fn run_bench_job(job: &Job, spec: &ExperimentSpec) -> MetricsRow {
    let start = Instant::now();
    let id = image_id(&job.image);
    let base = MetricsRow {
        image: id,
        rep: Some(job.rep),
        payload: job.payload,
        threshold: job.threshold,
        q_cover: spec.q_cover,
        q_channel: spec.q_channel,
        e_n: None,
        t: None,
        r_error: None,
        exhausted: None,
        attempts: None,
        n_m: None,
        n_nzac: None,
        wall_ms: None,
        status: Status::Ok,
    };
    match bench_cell(job, spec) {
        Ok((row, _)) => MetricsRow {
            wall_ms: Some(start.elapsed().as_secs_f64() * 1e3),
            ..row
        },
        Err(e) => {
            let status = match e.downcast_ref::<CoreError>() {
                Some(CoreError::CapacityExceeded { .. }) => Status::Capacity,
                _ => Status::Error(format!("{e:#}")),
            };
            MetricsRow {
                wall_ms: Some(start.elapsed().as_secs_f64() * 1e3),
                status,
                ..base
            }
        }
    }
}

fn bench_cell(job: &Job, spec: &ExperimentSpec) -> anyhow::Result<(MetricsRow, f64)> {
    let cover = load_cover(&job.image, spec.q_cover)?;
    let n_nzac = count_nzac(&cover);
    let n_m = payload_bits(&cover, job.payload)?;
    let message = random_bits(job.message_seed, n_m);
    let channel = channel_for(spec.q_channel);
    let cfg = EmbedConfig {
        alpha: spec.alpha,
        threshold: job.threshold,
        h: spec.h,
        stc_seed: spec.seed,
        channel: channel.clone(),
        payload: Some(job.payload),
        crc: false,
    };
    let outcome = embed(&cover, &message, &cfg)?;
    let r_error = measure_closed_loop(&outcome, &message, &channel)?;
    let chosen = outcome.report.final_attempt();
    Ok((
        MetricsRow {
            image: image_id(&job.image),
            rep: Some(job.rep),
            payload: n_m as f64 / n_nzac as f64,
            threshold: job.threshold,
            q_cover: cover.quality(),
            q_channel: spec.q_channel,
            e_n: Some(chosen.e_n),
            t: Some(chosen.t),
            r_error: Some(r_error),
            exhausted: Some(outcome.report.exhausted),
            attempts: Some(outcome.report.attempts.len()),
            n_m: Some(n_m),
            n_nzac: Some(n_nzac),
            wall_ms: None,
            status: Status::Ok,
        },
        r_error,
    ))
}

/// Runs the full grid and returns per-image rows followed by one `mean` row
/// per (payload, threshold) grid point, aggregating every measured row.
pub fn run_bench(spec: &ExperimentSpec) -> anyhow::Result<Vec<MetricsRow>> {
    let images = spec.resolve_images()?;
    let mut jobs = Vec::new();
    for image in &images {
        for rep in 0..spec.repetitions {
            for &payload in &spec.payloads {
                for &threshold in &spec.thresholds {
                    let message_seed = spec.seed.wrapping_add(jobs.len() as u64);
                    jobs.push(Job {
                        image: image.clone(),
                        rep,
                        payload,
                        threshold,
                        message_seed,
                    });
                }
            }
        }
    }

    let pool = worker_pool()?;
    let mut rows: Vec<MetricsRow> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().map(|j| run_bench_job(j, spec)).collect()
    });

    // Summary rows, in grid order. The payload cell carries the *requested*
    // grid value here, since it aggregates across images whose achieved
    // payloads differ in the last rounding bit.
    for &payload in &spec.payloads {
        for &threshold in &spec.thresholds {
            let measured: Vec<f64> = rows
                .iter()
                .zip(&jobs)
                .filter(|(r, j)| {
                    r.status == Status::Ok && j.payload == payload && r.threshold == threshold
                })
                .filter_map(|(r, _)| r.r_error)
                .collect();
            let mean = if measured.is_empty() {
                None
            } else {
                Some(measured.iter().sum::<f64>() / measured.len() as f64)
            };
            rows.push(MetricsRow {
                image: "mean".into(),
                rep: None,
                payload,
                threshold,
                q_cover: spec.q_cover,
                q_channel: spec.q_channel,
                e_n: None,
                t: None,
                r_error: mean,
                exhausted: None,
                attempts: None,
                n_m: None,
                n_nzac: None,
                wall_ms: None,
                status: Status::Ok,
            });
        }
    }
    Ok(rows)
}

pub const ABLATE_HEADER: [&str; 14] = [
    "image",
    "mode",
    "payload",
    "threshold",
    "q_cover",
    "q_channel",
    "e_n",
    "t",
    "r_error",
    "exhausted",
    "n_m",
    "n_nzac",
    "wall_ms",
    "status",
];

/// A row of an ablation run; reuses [`MetricsRow`] with `mode` in place of
/// `rep`/`attempts`.
#[derive(Debug, Clone)]
pub struct AblationRow {
    pub image: String,
    pub mode: String,
    pub row: MetricsRow,
}

/// Sweeps the fixed settings of `mode` over every image, then runs the
/// adaptive scheme on the same covers and messages for comparison.
///
/// The same message is used for every setting of a given image so the
/// settings compete on identical work.
pub fn run_ablation(
    spec: &ExperimentSpec,
    mode: AblationMode,
    payload: f64,
) -> anyhow::Result<Vec<AblationRow>> {
    let images = spec.resolve_images()?;
    let threshold = *spec.thresholds.first().unwrap_or(&1e-4);
    let settings = mode.settings();

    // (image index, setting index or adaptive) job grid.
    let mut jobs: Vec<(usize, Option<usize>)> = Vec::new();
    for i in 0..images.len() {
        for s in 0..settings.len() {
            jobs.push((i, Some(s)));
        }
        jobs.push((i, None));
    }

    let pool = worker_pool()?;
    let rows: Vec<AblationRow> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(i, setting)| {
                run_ablation_job(&images[i], setting.map(|s| settings[s]), spec, payload, threshold)
            })
            .collect()
    });
    Ok(rows)
}

fn run_ablation_job(
    image: &Path,
    setting: Option<(EmbeddingDomain, usize)>,
    spec: &ExperimentSpec,
    payload: f64,
    threshold: f64,
) -> AblationRow {
    let start = Instant::now();
    let mode = match setting {
        Some((domain, t)) => format!("{domain} t={t}"),
        None => "adaptive".into(),
    };
    let id = image_id(image);
    let mut row = MetricsRow {
        image: id.clone(),
        rep: None,
        payload,
        threshold,
        q_cover: spec.q_cover,
        q_channel: spec.q_channel,
        e_n: setting.map(|(d, _)| d.index()),
        t: setting.map(|(_, t)| t),
        r_error: None,
        exhausted: None,
        attempts: None,
        n_m: None,
        n_nzac: None,
        wall_ms: None,
        status: Status::Ok,
    };
    match ablation_cell(image, setting, spec, payload, threshold) {
        Ok(filled) => row = filled,
        Err(e) => {
            row.status = match e.downcast_ref::<CoreError>() {
                Some(CoreError::CapacityExceeded { .. }) => Status::Capacity,
                _ => Status::Error(format!("{e:#}")),
            };
        }
    }
    row.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    AblationRow {
        image: id,
        mode,
        row,
    }
}

fn ablation_cell(
    image: &Path,
    setting: Option<(EmbeddingDomain, usize)>,
    spec: &ExperimentSpec,
    payload: f64,
    threshold: f64,
) -> anyhow::Result<MetricsRow> {
    let cover = load_cover(image, spec.q_cover)?;
    let n_nzac = count_nzac(&cover);
    let n_m = payload_bits(&cover, payload)?;
    // One message per image: settings are compared on identical work, and
    // the seed does not depend on the job grid shape.
    let message_seed = spec.seed.wrapping_add(fxhash(&image_id(image)));
    let message = random_bits(message_seed, n_m);
    let channel = channel_for(spec.q_channel);
    let cfg = EmbedConfig {
        alpha: spec.alpha,
        threshold,
        h: spec.h,
        stc_seed: spec.seed,
        channel: channel.clone(),
        payload: Some(payload),
        crc: false,
    };
    let outcome = match setting {
        Some((domain, t)) => embed_fixed(&cover, &message, domain, t, &cfg)?,
        None => embed(&cover, &message, &cfg)?,
    };
    let r_error = measure_closed_loop(&outcome, &message, &channel)?;
    let chosen = outcome.report.final_attempt();
    Ok(MetricsRow {
        image: image_id(image),
        rep: None,
        payload: n_m as f64 / n_nzac as f64,
        threshold,
        q_cover: cover.quality(),
        q_channel: spec.q_channel,
        e_n: Some(chosen.e_n),
        t: Some(chosen.t),
        r_error: Some(r_error),
        exhausted: Some(outcome.report.exhausted),
        attempts: Some(outcome.report.attempts.len()),
        n_m: Some(n_m),
        n_nzac: Some(n_nzac),
        wall_ms: None,
        status: Status::Ok,
    })
}

/// Stable 64-bit string hash (FNV-1a); keeps per-image seeds independent of
/// grid layout without dragging in a hashing crate.
fn fxhash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn opt_cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|v| v.to_string()).unwrap_or_default()
}

/// `q_channel = None` prints as the literal `cover`: the channel runs at
/// each cover's own quality.
fn q_channel_cell(q: Option<u8>) -> String {
    q.map(|q| q.to_string()).unwrap_or_else(|| "cover".into())
}

pub fn write_bench_csv<W: std::io::Write>(rows: &[MetricsRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.write_record([
            r.image.clone(),
            opt_cell(&r.rep),
            r.payload.to_string(),
            r.threshold.to_string(),
            opt_cell(&r.q_cover),
            q_channel_cell(r.q_channel),
            opt_cell(&r.e_n),
            opt_cell(&r.t),
            opt_cell(&r.r_error),
            opt_cell(&r.exhausted),
            opt_cell(&r.attempts),
            opt_cell(&r.n_m),
            opt_cell(&r.n_nzac),
            r.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
            r.status.as_cell(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ablate_csv<W: std::io::Write>(rows: &[AblationRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ABLATE_HEADER)?;
    for a in rows {
        let r = &a.row;
        w.write_record([
            a.image.clone(),
            a.mode.clone(),
            r.payload.to_string(),
            r.threshold.to_string(),
            opt_cell(&r.q_cover),
            q_channel_cell(r.q_channel),
            opt_cell(&r.e_n),
            opt_cell(&r.t),
            opt_cell(&r.r_error),
            opt_cell(&r.exhausted),
            opt_cell(&r.n_m),
            opt_cell(&r.n_nzac),
            r.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
            r.status.as_cell(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
