use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the localization and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({x1},{y1},{x2},{y2}): requires x1 <= x2 and y1 <= y2")]
    InvalidBox { x1: i64, y1: i64, x2: i64, y2: i64 },

    #[error("box {bbox:?} exceeds image bounds {width}x{height}")]
    OutOfBounds { bbox: [u32; 4], width: u32, height: u32 },

    #[error("objectness score {0} is outside [0, 1]")]
    InvalidScore(f64),

    #[error("{name} = {value} is outside [0, 1]")]
    RatioOutOfRange { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected_width}x{expected_height}, found {width}x{height}")]
    DimensionMismatch {
        expected_width: u32,
        expected_height: u32,
        width: u32,
        height: u32,
    },

    #[error("raster buffer holds {len} values, expected {expected}")]
    BufferSize { len: usize, expected: usize },

    #[error("raster must have non-zero dimensions, got {width}x{height}")]
    EmptyRaster { width: u32, height: u32 },

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("unsupported image format in {}: {detail}", path.display())]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error("image id mismatch: result is for `{result}`, ground truth is for `{truth}`")]
    IdMismatch { result: String, truth: String },

    #[error("category `{0}` has no images")]
    EmptyCategory(String),

    #[error("dataset layout error at {}: {msg}", path.display())]
    Layout { path: PathBuf, msg: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_ratio(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::RatioOutOfRange { name, value })
    }
}
