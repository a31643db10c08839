//! Binary PPM (P6), 8 bits per sample.

use crate::error::{Error, Result};
use crate::image::{LdrImage, RgbImage};
use crate::io::HeaderCursor;

pub fn read_ppm(bytes: &[u8]) -> Result<LdrImage> {
    let mut cur = HeaderCursor::new(bytes, true);
    let magic = cur.token()?;
    if magic != "P6" {
        return Err(Error::MalformedHeader(format!("bad PPM magic {magic:?}")));
    }
    let width: usize = cur.number("width")?;
    let height: usize = cur.number("height")?;
    let maxval: u32 = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let payload = cur.payload()?;
    let n = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    if payload.len() < n {
        return Err(Error::TruncatedData);
    }
    LdrImage::new(width, height, payload[..n].to_vec())
}

pub fn write_ppm(img: &LdrImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}
