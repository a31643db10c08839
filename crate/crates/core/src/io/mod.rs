//! Readers and writers for Radiance RGBE, PFM and binary PPM.
//!
//! Codecs work on byte slices; the `load_*`/`save_*` helpers wrap them with
//! file access.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{HdrImage, LdrImage};
use crate::scalar::Scalar;

pub mod pfm;
pub mod ppm;
pub mod rgbe;

pub use pfm::{read_pfm, write_pfm};
pub use ppm::{read_ppm, write_ppm};
pub use rgbe::{read_rgbe, write_rgbe};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    RadianceRgbe,
    Pfm,
    Ppm,
}

impl FileFormat {
    /// Identifies a stream by its magic bytes.
    pub fn detect(bytes: &[u8]) -> Option<FileFormat> {
        let ws = |b: Option<&u8>| matches!(b, Some(b' ' | b'\t' | b'\r' | b'\n'));
        if bytes.starts_with(b"#?RADIANCE") || bytes.starts_with(b"#?RGBE") {
            Some(FileFormat::RadianceRgbe)
        } else if (bytes.starts_with(b"PF") || bytes.starts_with(b"Pf")) && ws(bytes.get(2)) {
            Some(FileFormat::Pfm)
        } else if bytes.starts_with(b"P6") && ws(bytes.get(2)) {
            Some(FileFormat::Ppm)
        } else {
            None
        }
    }

    /// Picks a format from a file extension (`hdr`/`pic`/`rgbe`, `pfm`, `ppm`).
    pub fn from_path(path: &Path) -> Option<FileFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "hdr" | "pic" | "rgbe" => Some(FileFormat::RadianceRgbe),
            "pfm" => Some(FileFormat::Pfm),
            "ppm" => Some(FileFormat::Ppm),
            _ => None,
        }
    }

    pub fn is_hdr(self) -> bool {
        !matches!(self, FileFormat::Ppm)
    }
}

/// Decodes an HDR stream of either supported HDR format.
pub fn decode_hdr<T: Scalar>(bytes: &[u8]) -> Result<HdrImage<T>> {
    match FileFormat::detect(bytes) {
        Some(FileFormat::RadianceRgbe) => read_rgbe(bytes),
        Some(FileFormat::Pfm) => read_pfm(bytes),
        _ => Err(Error::UnknownFormat),
    }
}

/// Encodes into the format implied by `format`; PPM is not an HDR target.
pub fn encode_hdr<T: Scalar>(img: &HdrImage<T>, format: FileFormat) -> Result<Vec<u8>> {
    match format {
        FileFormat::RadianceRgbe => write_rgbe(img),
        FileFormat::Pfm => write_pfm(img),
        FileFormat::Ppm => Err(Error::InvalidParameter("PPM cannot store HDR data".into())),
    }
}

pub fn load_hdr<T: Scalar>(path: impl AsRef<Path>) -> Result<HdrImage<T>> {
    decode_hdr(&std::fs::read(path)?)
}

pub fn load_ldr(path: impl AsRef<Path>) -> Result<LdrImage> {
    read_ppm(&std::fs::read(path)?)
}

/// Tokenizer for the whitespace-separated ASCII headers of PFM and PPM.
pub(crate) struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: bool,
}

impl<'a> HeaderCursor<'a> {
    pub(crate) fn new(bytes: &'a [u8], comments: bool) -> Self {
        Self { bytes, pos: 0, comments }
    }

    pub(crate) fn token(&mut self) -> Result<&'a str> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'#') if self.comments => {
                    while let Some(&b) = self.bytes.get(self.pos) {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedHeader("unexpected end of header".into())),
            }
        }
        let start = self.pos;
        while matches!(self.bytes.get(self.pos), Some(b) if !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::MalformedHeader("non-ASCII header token".into()))
    }

    pub(crate) fn number<N: std::str::FromStr>(&mut self, what: &str) -> Result<N> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| Error::MalformedHeader(format!("bad {what}: {tok:?}")))
    }

    /// Consumes the single whitespace byte that ends the header and returns
    /// the payload.
    pub(crate) fn payload(self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(Error::MalformedHeader("header not terminated by whitespace".into())),
        }
    }
}
