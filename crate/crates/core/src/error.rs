use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported channel count {0} (expected 1 or 3)")]
    UnsupportedChannels(usize),

    #[error("raster buffer has {found} values, expected {expected}")]
    BufferSize { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?} (width, height)")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("pad target {target} is smaller than the image ({width}x{height})")]
    PadTargetTooSmall {
        target: usize,
        width: usize,
        height: usize,
    },

    #[error("image is not square ({width}x{height})")]
    NotSquare { width: usize, height: usize },

    #[error("degenerate image: a single intensity level, nothing to segment")]
    DegenerateImage,

    #[error("shape mask has no foreground")]
    EmptyMask,

    #[error("skeleton is not connected ({components} components)")]
    DisconnectedSkeleton { components: usize },

    #[error("axis path is empty")]
    EmptyPath,

    #[error("medial axis does not intersect the shape mask")]
    AxisOutsideMask,

    #[error("banding pattern length {pattern} does not match sampling frame length {frame}")]
    LengthMismatch { pattern: usize, frame: usize },

    #[error("sampling frame is inconsistent with the shape mask: {0}")]
    FrameMismatch(String),

    #[error("invalid banding pattern: {0}")]
    InvalidPattern(String),

    #[error("invalid banded mask code {0} (allowed: 0, 127, 255)")]
    InvalidCode(u8),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("both masks have an empty foreground")]
    EmptyForeground,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("need at least 3 entries to split, got {0}")]
    TooFewEntries(usize),

    #[error("mask sets are misaligned: {0}")]
    Misaligned(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable snake_case identifier, used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedChannels(_) => "unsupported_channels",
            Error::BufferSize { .. } => "buffer_size",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::PadTargetTooSmall { .. } => "pad_target_too_small",
            Error::NotSquare { .. } => "not_square",
            Error::DegenerateImage => "degenerate_image",
            Error::EmptyMask => "empty_mask",
            Error::DisconnectedSkeleton { .. } => "disconnected_skeleton",
            Error::EmptyPath => "empty_path",
            Error::AxisOutsideMask => "axis_outside_mask",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::FrameMismatch(_) => "frame_mismatch",
            Error::InvalidPattern(_) => "invalid_pattern",
            Error::InvalidCode(_) => "invalid_code",
            Error::InvalidConfig(_) => "invalid_config",
            Error::EmptyForeground => "empty_foreground",
            Error::EmptyInput(_) => "empty_input",
            Error::TooFewEntries(_) => "too_few_entries",
            Error::Misaligned(_) => "misaligned",
            Error::Dataset(_) => "dataset",
            Error::Io { .. } => "io",
            Error::Image { .. } => "image",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
