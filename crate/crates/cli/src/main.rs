//! `stegarmor` — embed and recover messages in JPEG images so they survive
//! lossy recompression, plus the batch harness that measures how well that
//! works.
//!
//! Exit codes: 0 on success, 2 when embedding exhausted its escalation
//! schedule or extraction failed, 1 on any other error.

mod experiment;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use stegarmor_core::{
    auto_extract, bits_to_bytes, bytes_to_bits, coefficient_diff, embed, extract, generate_corpus,
    ijg_quant_table, parse_jpeg, payload_bits, random_bits, serialize_jpeg, ChannelModel,
    CoeffImage, CorpusSpec, EmbedConfig, Error as CoreError, StegoRecipe,
};

use experiment::{
    run_ablation, run_bench, write_ablate_csv, write_bench_csv, AblationMode, ExperimentSpec,
};

#[derive(Parser)]
#[command(
    name = "stegarmor",
    version,
    about = "JPEG steganography that survives recompression",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed a message, escalating carrier band and error correction until
    /// the simulated channel keeps the error rate under the threshold.
    Embed(EmbedArgs),
    /// Recover a message from a (possibly recompressed) stego image.
    Extract(ExtractArgs),
    /// Push an image through the recompression channel once.
    Simulate(SimulateArgs),
    /// Batch robustness sweep over payload/threshold grids, emitting CSV.
    Bench(BenchArgs),
    /// Fixed-setting sweeps (carrier band or correction strength) against
    /// the adaptive scheme, emitting CSV.
    Ablate(AblateArgs),
    /// Generate a synthetic grayscale cover corpus.
    GenCorpus(GenCorpusArgs),
}

#[derive(Args)]
struct EmbedArgs {
    /// Cover JPEG.
    #[arg(long)]
    cover: PathBuf,
    /// Stego JPEG to write; the recipe, report and (for --payload) the
    /// generated message land next to it.
    #[arg(long, default_value = "stego.jpg")]
    out: PathBuf,
    /// Payload in bits per nonzero AC coefficient; the message is seeded
    /// random bits, written alongside the stego image.
    #[arg(long, conflicts_with = "message")]
    payload: Option<f64>,
    /// Message file; every bit of the file is embedded.
    #[arg(long)]
    message: Option<PathBuf>,
    /// Channel quality factor to embed against; omitted: the cover's own.
    #[arg(long)]
    q_channel: Option<u8>,
    /// Assume a lossless channel (no recompression between embed and
    /// extract); the first workable setting is accepted as-is.
    #[arg(long, conflicts_with = "q_channel")]
    lossless: bool,
    /// Cost asymmetry factor in [0, 1].
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    /// Acceptance threshold on the simulated extraction error rate.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Trellis constraint height.
    #[arg(long, default_value_t = 10)]
    h: u8,
    /// Seed for the message bits and the trellis column pool.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prefix the message with a checksum so `extract --auto` can find it.
    #[arg(long)]
    crc: bool,
}

#[derive(Args)]
struct ExtractArgs {
    /// Stego JPEG (possibly recompressed by the channel).
    #[arg(long)]
    stego: PathBuf,
    /// Recipe sidecar written by `embed`.
    #[arg(long)]
    recipe: Option<PathBuf>,
    /// Recipe-free extraction: scan all settings for a checksum-validated
    /// message (requires --len; the embed must have used --crc).
    #[arg(long)]
    auto: bool,
    /// Message length in bits (--auto only).
    #[arg(long)]
    len: Option<usize>,
    /// Cover quality factor (--auto only); omitted: the stego image's own
    /// quantization table is assumed to be the cover's.
    #[arg(long)]
    q_cover: Option<u8>,
    /// Trellis constraint height (--auto only).
    #[arg(long, default_value_t = 10)]
    h: u8,
    /// Trellis column-pool seed (--auto only).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Recovered message file (bits packed MSB-first).
    #[arg(long, default_value = "message.bin")]
    out: PathBuf,
    /// True message file; when given, the observed error rate is printed.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Image to push through the channel.
    #[arg(long)]
    stego: PathBuf,
    /// Channel quality factor; omitted: the image's own.
    #[arg(long)]
    q_channel: Option<u8>,
    /// Recompressed output.
    #[arg(long, default_value = "recompressed.jpg")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON experiment config; exclusive with the grid flags.
    #[arg(long, conflicts_with_all = ["images", "payload", "threshold", "q_cover",
        "q_channel", "alpha", "h", "seed", "reps"])]
    config: Option<PathBuf>,
    /// Directory of cover JPEGs.
    #[arg(long)]
    images: Option<PathBuf>,
    /// Payload grid, bits per nonzero AC coefficient.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05])]
    payload: Vec<f64>,
    /// Threshold grid.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-4])]
    threshold: Vec<f64>,
    /// Recompress covers to this quality before embedding.
    #[arg(long)]
    q_cover: Option<u8>,
    /// Channel quality factor; omitted: each cover's own.
    #[arg(long)]
    q_channel: Option<u8>,
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    h: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent repetitions (fresh message) per grid cell.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// CSV output file; omitted: standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Directory of cover JPEGs.
    #[arg(long)]
    images: PathBuf,
    /// Which fixed-setting family to sweep: `domain` walks the carrier band
    /// with t = 8; `strength` walks t over E64.
    #[arg(long, value_parser = parse_mode)]
    mode: AblationMode,
    /// Payload in bits per nonzero AC coefficient.
    #[arg(long, default_value_t = 0.15)]
    payload: f64,
    #[arg(long)]
    q_cover: Option<u8>,
    #[arg(long)]
    q_channel: Option<u8>,
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    #[arg(long, default_value_t = 10)]
    h: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output file; omitted: standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenCorpusArgs {
    /// Directory to fill with cover_NNN.jpg files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 75)]
    quality: u8,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_mode(s: &str) -> Result<AblationMode, String> {
    match s {
        "domain" => Ok(AblationMode::Domain),
        "strength" => Ok(AblationMode::Strength),
        _ => Err(format!("unknown mode {s:?}: expected `domain` or `strength`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Extract(args) => cmd_extract(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::GenCorpus(args) => cmd_gen_corpus(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("stegarmor: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_jpeg(path: &Path) -> anyhow::Result<CoeffImage> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_jpeg(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_jpeg(image: &CoeffImage, path: &Path) -> anyhow::Result<()> {
    let bytes = serialize_jpeg(image)?;
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn cmd_embed(args: EmbedArgs) -> anyhow::Result<ExitCode> {
    let cover = read_jpeg(&args.cover)?;

    let (message, truth_path) = match (args.payload, &args.message) {
        (Some(p), None) => {
            let n_m = payload_bits(&cover, p)?;
            let bits = random_bits(args.seed, n_m);
            let path = sidecar(&args.out, "message");
            std::fs::write(&path, bits_to_bytes(&bits))
                .with_context(|| format!("writing {}", path.display()))?;
            (bits, Some(path))
        }
        (None, Some(path)) => {
            let bytes =
                std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
            if bytes.is_empty() {
                bail!("message file {} is empty", path.display());
            }
            (bytes_to_bits(&bytes, bytes.len() * 8), None)
        }
        _ => bail!("give exactly one of --payload or --message"),
    };

    let channel = if args.lossless {
        ChannelModel::Lossless
    } else {
        match args.q_channel {
            Some(q) => ChannelModel::Quality(q),
            None => ChannelModel::CoverQuality,
        }
    };
    let cfg = EmbedConfig {
        alpha: args.alpha,
        threshold: args.threshold,
        h: args.h,
        stc_seed: args.seed,
        channel,
        payload: args.payload,
        crc: args.crc,
    };
    let outcome = embed(&cover, &message, &cfg)?;

    write_jpeg(&outcome.stego, &args.out)?;
    let recipe_path = sidecar(&args.out, "recipe.json");
    std::fs::write(&recipe_path, to_json(&outcome.recipe)?)?;
    let report_path = sidecar(&args.out, "report.json");
    std::fs::write(&report_path, to_json(&outcome.report)?)?;

    let chosen = outcome.report.final_attempt();
    let domain = stegarmor_core::EmbeddingDomain::new(chosen.e_n)?;
    println!(
        "embedded {} bits into {}: {} t={} after {} attempt(s), simulated R_e {:.2e}",
        outcome.recipe.n_m,
        args.cover.display(),
        domain,
        chosen.t,
        outcome.report.attempts.len(),
        chosen.r_e,
    );
    println!("wrote {}", args.out.display());
    if let Some(p) = truth_path {
        println!("message bits in {}", p.display());
    }
    if outcome.report.exhausted {
        eprintln!(
            "warning: escalation exhausted; best error rate {:.2e} exceeds the threshold {:.1e}",
            chosen.r_e, args.threshold,
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(args: ExtractArgs) -> anyhow::Result<ExitCode> {
    let stego = read_jpeg(&args.stego)?;

    let (result, n_bits) = if args.auto {
        let len = args
            .len
            .context("--auto needs --len, the message length in bits")?;
        let cover_table = match args.q_cover {
            Some(q) => ijg_quant_table(q)?,
            None => stego.table().clone(),
        };
        match auto_extract(&stego, len, args.h, args.seed, &cover_table) {
            Ok((bits, e_n, t)) => {
                let domain = stegarmor_core::EmbeddingDomain::new(e_n)?;
                println!("found message at {domain} t={t}");
                (Ok(bits), len)
            }
            Err(e) => (Err(e), len),
        }
    } else {
        let recipe_path = match &args.recipe {
            Some(p) => p.clone(),
            None => bail!("give --recipe (or --auto with --len)"),
        };
        let recipe: StegoRecipe = from_json(&recipe_path)?;
        let n_bits = recipe.n_m - if recipe.crc_mode { stegarmor_core::CRC_BITS } else { 0 };
        let result = match extract(&stego, &recipe) {
            // Best-effort bits still carry the checksum prefix (it could not
            // be validated); drop it so the output aligns with the message.
            Err(CoreError::ExtractFailure {
                failed_blocks,
                bits,
            }) if recipe.crc_mode => Err(CoreError::ExtractFailure {
                failed_blocks,
                bits: bits[stegarmor_core::CRC_BITS..].to_vec(),
            }),
            other => other,
        };
        (result, n_bits)
    };

    let (bits, code) = match result {
        Ok(bits) => (bits, ExitCode::SUCCESS),
        Err(CoreError::ExtractFailure {
            failed_blocks,
            bits,
        }) => {
            eprintln!(
                "extraction incomplete: {failed_blocks} code block(s) uncorrectable; \
                 writing best-effort bits"
            );
            (bits, ExitCode::from(2))
        }
        Err(CoreError::NotFound) => {
            eprintln!("no embedded message found");
            return Ok(ExitCode::from(2));
        }
        Err(e) => return Err(e.into()),
    };

    std::fs::write(&args.out, bits_to_bytes(&bits))
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} bits to {}", bits.len(), args.out.display());

    if let Some(truth_path) = &args.truth {
        let truth_bytes = std::fs::read(truth_path)
            .with_context(|| format!("reading {}", truth_path.display()))?;
        if truth_bytes.len() * 8 < n_bits {
            bail!(
                "truth file {} holds {} bits, message has {}",
                truth_path.display(),
                truth_bytes.len() * 8,
                n_bits
            );
        }
        let truth = bytes_to_bits(&truth_bytes, bits.len());
        let wrong = truth.iter().zip(&bits).filter(|(a, b)| a != b).count();
        println!(
            "R_error {:.6e} ({} of {} bits wrong)",
            wrong as f64 / bits.len() as f64,
            wrong,
            bits.len()
        );
    }
    Ok(code)
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let image = read_jpeg(&args.stego)?;
    let channel = match args.q_channel {
        Some(q) => ChannelModel::Quality(q),
        None => ChannelModel::CoverQuality,
    };
    let attacked = channel
        .simulate(&image)?
        .unwrap_or_else(|| image.clone());
    let changed = coefficient_diff(&image, &attacked)?;
    let total = image.n_blocks() * 64;
    write_jpeg(&attacked, &args.out)?;
    println!(
        "{}: {} of {} coefficients changed ({:.3}%), wrote {}",
        channel,
        changed,
        total,
        100.0 * changed as f64 / total as f64,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let spec = match &args.config {
        Some(path) => from_json(path)?,
        None => ExperimentSpec {
            images: Vec::new(),
            image_dir: args.images.clone(),
            payloads: args.payload.clone(),
            thresholds: args.threshold.clone(),
            q_cover: args.q_cover,
            q_channel: args.q_channel,
            alpha: args.alpha,
            h: args.h,
            seed: args.seed,
            repetitions: args.reps,
        },
    };
    let rows = run_bench(&spec)?;
    let failed = rows
        .iter()
        .filter(|r| r.status != experiment::Status::Ok)
        .count();
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_bench_csv(&rows, file)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_bench_csv(&rows, std::io::stdout().lock())?,
    }
    if failed > 0 {
        eprintln!("warning: {failed} row(s) carry no measurement (see status column)");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_ablate(args: AblateArgs) -> anyhow::Result<ExitCode> {
    let spec = ExperimentSpec {
        images: Vec::new(),
        image_dir: Some(args.images.clone()),
        payloads: vec![args.payload],
        thresholds: vec![args.threshold],
        q_cover: args.q_cover,
        q_channel: args.q_channel,
        alpha: args.alpha,
        h: args.h,
        seed: args.seed,
        repetitions: 1,
    };
    let rows = run_ablation(&spec, args.mode, args.payload)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_ablate_csv(&rows, file)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_ablate_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_corpus(args: GenCorpusArgs) -> anyhow::Result<ExitCode> {
    let spec = CorpusSpec {
        count: args.count,
        width: args.width,
        height: args.height,
        quality: args.quality,
        seed: args.seed,
    };
    let paths = generate_corpus(&spec, &args.out)?;
    println!(
        "wrote {} covers ({}x{}, quality {}) to {}",
        paths.len(),
        args.width,
        args.height,
        args.quality,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn to_json<T: serde::Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn from_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}
