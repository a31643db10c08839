use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("image cannot be calibrated: {0}")]
    Uncalibratable(&'static str),
    #[error("auto-exposure failed: {0}")]
    Exposure(&'static str),
    #[error("degenerate display anchor: {0}")]
    DegenerateAnchor(&'static str),
    #[error("non-finite pixel value")]
    NonFinite,
    #[error("value {0} exceeds the encodable range")]
    OutOfRange(f64),
    #[error("unrecognized file format")]
    UnknownFormat,
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported orientation: {0}")]
    UnsupportedOrientation(String),
    #[error("truncated scanline at row {row}")]
    TruncatedScanline { row: usize },
    #[error("corrupt scanline at row {row}: {reason}")]
    CorruptScanline { row: usize, reason: &'static str },
    #[error("truncated pixel data")]
    TruncatedData,
    #[error("grayscale PFM (Pf) files are not supported")]
    GrayscalePfm,
    #[error("unsupported PPM maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("scene description: {0}")]
    Scene(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) | Error::Scene(_) => ErrorKind::Usage,
            Error::Io(_)
            | Error::UnknownFormat
            | Error::MalformedHeader(_)
            | Error::UnsupportedOrientation(_)
            | Error::TruncatedScanline { .. }
            | Error::CorruptScanline { .. }
            | Error::TruncatedData
            | Error::GrayscalePfm
            | Error::UnsupportedMaxval(_) => ErrorKind::Io,
            Error::InvalidImage(_)
            | Error::DimensionMismatch { .. }
            | Error::Uncalibratable(_)
            | Error::Exposure(_)
            | Error::DegenerateAnchor(_)
            | Error::NonFinite
            | Error::OutOfRange(_) => ErrorKind::Numeric,
        }
    }

    pub(crate) fn mismatch(a: (usize, usize), b: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            left_width: a.0,
            left_height: a.1,
            right_width: b.0,
            right_height: b.1,
        }
    }
}
