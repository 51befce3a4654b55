//! Robust JPEG-domain steganography that survives lossy recompression.
//!
//! The pipeline embeds a message into the quantized DCT coefficients of a
//! grayscale baseline JPEG so that the message is still recoverable after the
//! image has been decoded and re-encoded by an untrusted channel (a social
//! network, a messaging app, a CDN). Robustness comes from three layers:
//!
//! * **Dither modulation** on de-quantized coefficients: each carrier
//!   coefficient is snapped to the center of a quantization interval whose
//!   parity encodes one bit, leaving a half-step noise margin.
//! * **Adaptive carrier selection**: embedding can retreat from the full
//!   coefficient set to progressively higher-frequency counter-diagonal bands,
//!   which tolerate recompression better at the price of capacity.
//! * **Adaptive error correction**: the message is wrapped in a shortened
//!   Reed-Solomon code over GF(2^5) whose correction capability `t` is raised
//!   until a closed-loop recompression simulation shows the residual error
//!   rate under a target threshold.
//!
//! Within a fixed carrier set, which coefficients actually change is decided
//! by a syndrome-trellis code driven by an asymmetric variant of the
//! J-UNIWARD distortion, so the embedding cost of the whole operation is near
//! the minimum the cost model allows.
//!
//! The crate is organized bottom-up: a self-contained baseline JPEG codec
//! operating at the quantized-coefficient level, the distortion model, the
//! carrier-set definitions and scan order, the two coding layers
//! (Reed-Solomon and syndrome-trellis), the lossy-channel simulator, and the
//! embedder tying everything together behind [`embed`], [`extract`] and
//! [`auto_extract`].

mod bits;
mod channel;
mod corpus;
mod cost;
mod domain;
mod embedder;
mod error;
mod jpeg;
mod rscode;
mod stc;

pub use bits::{bits_to_bytes, bytes_to_bits, crc32, random_bits};
pub use channel::{coefficient_diff, recompress, ChannelModel};
pub use corpus::{generate_corpus, synth_image, CorpusSpec};
pub use cost::{
    asymmetric_costs, cost_maps, dump_cost_maps, juniward_costs, modifying_costs, CostMaps,
    DitherInfo, SIGMA, WET_COST,
};
pub use domain::{
    apply_stego_sequence, build_cover_sequence, domain_positions, read_stego_bits, CoverElement,
    CoverSequence, DirectionRule, EmbeddingDomain,
};
pub use embedder::{
    attach_crc, auto_extract, embed, embed_fixed, extract, payload_bits, strip_crc, Attempt,
    EmbedConfig, EmbedOutcome, RobustnessReport, StegoRecipe, CRC_BITS,
};
pub use error::Error;
pub use jpeg::{
    compress, count_nzac, decompress, ijg_quant_table, parse_jpeg, serialize_jpeg, CoeffImage,
    QuantTable, SpatialImage,
};
pub use rscode::{
    rs_decode, rs_decode_best_effort, rs_encode, rs_encoded_len, RsParams, GF32_PRIMITIVE_POLY,
    RS_N, SYMBOL_BITS,
};
pub use stc::{stc_embed, stc_extract, ternary_embed, StcParams, TernaryOutcome};

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
