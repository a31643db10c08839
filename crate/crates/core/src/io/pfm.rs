//! Portable float map. Rows are stored bottom to top; the sign of the scale
//! field selects the byte order (negative = little endian).

use crate::error::{Error, Result};
use crate::image::{HdrImage, RgbImage};
use crate::io::HeaderCursor;
use crate::scalar::Scalar;

pub fn read_pfm<T: Scalar>(bytes: &[u8]) -> Result<HdrImage<T>> {
    let mut cur = HeaderCursor::new(bytes, false);
    match cur.token()? {
        "PF" => {}
        "Pf" => return Err(Error::GrayscalePfm),
        other => return Err(Error::MalformedHeader(format!("bad PFM magic {other:?}"))),
    }
    let width: usize = cur.number("width")?;
    let height: usize = cur.number("height")?;
    let scale: f64 = cur.number("scale")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("empty image {width}x{height}")));
    }
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::MalformedHeader(format!("bad scale {scale}")));
    }
    let little = scale < 0.0;
    let payload = cur.payload()?;
    let row_len = width * 3;
    if payload.len() < row_len * height * 4 {
        return Err(Error::TruncatedData);
    }
    let mut data = vec![T::zero(); row_len * height];
    for (file_row, chunk) in payload.chunks_exact(row_len * 4).take(height).enumerate() {
        let y = height - 1 - file_row;
        let out = &mut data[y * row_len..(y + 1) * row_len];
        for (dst, b) in out.iter_mut().zip(chunk.chunks_exact(4)) {
            let raw = [b[0], b[1], b[2], b[3]];
            let v = if little { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
            *dst = T::lit(v as f64);
        }
    }
    HdrImage::new(width, height, data)
}

/// Writes a little-endian PFM. `f32` buffers round-trip bit-exactly; `f64`
/// values are rounded to `f32`.
pub fn write_pfm<T: Scalar>(img: &HdrImage<T>) -> Result<Vec<u8>> {
    let (w, h) = img.dims();
    let mut out = format!("PF\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 12);
    for y in (0..h).rev() {
        for &v in &img.data()[y * w * 3..(y + 1) * w * 3] {
            let f = v.as_f64() as f32;
            if !f.is_finite() {
                return Err(Error::OutOfRange(v.as_f64()));
            }
            out.extend_from_slice(&f.to_le_bytes());
        }
    }
    Ok(out)
}
