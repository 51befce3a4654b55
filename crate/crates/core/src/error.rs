use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by the layer that raises them; the embedder surfaces
/// lower-layer failures unchanged where that is more informative than
/// wrapping.
#[derive(Debug, Error)]
pub enum Error {
    // --- coefficient codec ---
    /// The byte stream is not a well-formed baseline JPEG.
    #[error("malformed JPEG stream: {0}")]
    MalformedStream(String),
    /// Well-formed JPEG, but uses a feature outside the supported baseline
    /// grayscale subset (progressive scans, multiple components, 16-bit
    /// quantization tables, arithmetic coding, ...).
    #[error("unsupported JPEG feature: {0}")]
    UnsupportedFeature(String),
    /// A coefficient magnitude cannot be represented by the baseline
    /// entropy coder.
    #[error("coefficient out of encodable range at block {block}, position {position}: {value}")]
    CoefficientOverflow {
        block: usize,
        position: usize,
        value: i32,
    },
    /// Quality factor outside 1..=100.
    #[error("quality factor {0} outside 1..=100")]
    InvalidQuality(i32),

    // --- cost model ---
    /// Cost asymmetry factor outside [0, 1].
    #[error("alpha {0} outside [0, 1]")]
    InvalidAlpha(f64),
    /// Two per-coefficient maps disagree on geometry.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    // --- embedding domain ---
    /// Domain index outside 1..=6.
    #[error("embedding domain index {0} outside 1..=6")]
    InvalidDomainIndex(u8),
    /// Bit/sequence lengths disagree.
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    // --- Reed-Solomon ---
    /// Correction capability outside 1..=12.
    #[error("RS correction capability t={0} outside 1..=12")]
    InvalidCapability(u8),
    /// Code bit length is inconsistent with the framing implied by the
    /// message length and capability.
    #[error("RS framing error: {0}")]
    FramingError(String),
    /// One or more RS blocks could not be corrected.
    #[error("RS decode failure: {failed_blocks} of {total_blocks} blocks uncorrectable")]
    DecodeFailure {
        failed_blocks: usize,
        total_blocks: usize,
    },

    // --- syndrome-trellis code ---
    /// Trellis parameters are invalid (h out of range, empty cover with
    /// non-empty message, ...).
    #[error("invalid trellis parameters: {0}")]
    InvalidParams(String),
    /// Message longer than the carrier sequence.
    #[error("capacity exceeded: message {message_bits} bits, carrier {carrier_bits} elements")]
    CapacityExceeded {
        message_bits: usize,
        carrier_bits: usize,
    },
    /// No stego sequence satisfies the syndrome (defensive; unreachable with
    /// well-formed submatrices).
    #[error("no stego sequence satisfies the requested syndrome")]
    InfeasibleSyndrome,

    // --- extraction ---
    /// RS decoding failed during extraction. The best-effort message bits
    /// (uncorrectable blocks passed through) are retained so callers can
    /// still measure an error rate.
    #[error("extraction failed: {failed_blocks} RS blocks uncorrectable")]
    ExtractFailure {
        failed_blocks: usize,
        /// Best-effort decoded message bits.
        bits: Vec<u8>,
    },
    /// Blind extraction found no (domain, capability) pair with a valid
    /// checksum.
    #[error("no embedded message found")]
    NotFound,

    // --- plumbing ---
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
