//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Translation speed below the usable floor; the invariants are
    /// undefined without camera translation.
    #[error("translation magnitude {speed} m/s is below {min} m/s; invariants are undefined")]
    ZeroTranslation { speed: f64, min: f64 },

    /// Two per-pixel fields (or a field and intrinsics) disagree in size.
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {got_width}x{got_height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        got_width: usize,
        got_height: usize,
    },

    /// Band edges must be strictly ascending and non-empty.
    #[error("band edges must be a non-empty strictly ascending sequence")]
    BadBandEdges,

    /// A scalar render range must satisfy min < max.
    #[error("render value range is empty: min {min} >= max {max}")]
    BadValueRange { min: f64, max: f64 },

    /// An operation needs more points than it was given.
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// A simulated point coincides with the camera center.
    #[error("point is degenerate: range {range} m is below 1e-9 m")]
    DegeneratePoint { range: f64 },

    /// Flow file does not start with the expected magic tag.
    #[error("bad flow file magic: expected \"PIEH\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    /// Flow file ends before the declared payload.
    #[error("truncated flow payload: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },

    /// Declared flow dimensions are non-positive or exceed the sanity guard.
    #[error("flow dimensions {width}x{height} outside the supported (0, 1e8] pixel range")]
    OversizeDims { width: i32, height: i32 },

    /// A text record could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// Pose timestamps must be strictly increasing.
    #[error("non-monotonic timestamp at line {line}")]
    NonMonotonicTime { line: usize },

    /// Scene/run configuration is invalid.
    #[error("bad configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
