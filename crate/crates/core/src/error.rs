use std::path::PathBuf;

/// Errors produced by the contourbench library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed drawing document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid drawing: {0}")]
    InvalidDrawing(String),

    #[error("unsupported SVG content: {0}")]
    UnsupportedSvg(String),

    #[error("malformed SVG: {0}")]
    Svg(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("insufficient {what}: need {needed}, found {found}")]
    Insufficient {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("session is closed")]
    SessionClosed,

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

pub(crate) fn check_dims(expected: (u32, u32), actual: (u32, u32)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}
