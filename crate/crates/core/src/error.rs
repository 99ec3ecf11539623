use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the scorebin library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("image is empty")]
    EmptyImage,
    #[error("rectangle ({x0}, {y0})..=({x1}, {y1}) is outside a {width}x{height} image")]
    RectOutOfBounds {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        width: usize,
        height: usize,
    },
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("cannot write {image} image as {format}")]
    FormatMismatch {
        image: &'static str,
        format: &'static str,
    },
    #[error("texture image is empty")]
    EmptyTexture,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
