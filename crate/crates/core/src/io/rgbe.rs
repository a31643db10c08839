//! Radiance RGBE (`.hdr`) codec.
//!
//! Pixels share one exponent byte: a channel decodes to
//! `mantissa * 2^(e - 128) / 256`, with `e == 0` meaning black. Scanlines of
//! width 8..=32767 are written with the new-style run-length encoding; the
//! reader also accepts flat and old-style run-length scanlines.

use crate::error::{Error, Result};
use crate::image::{HdrImage, RgbImage};
use crate::scalar::Scalar;

const MIN_RLE_WIDTH: usize = 8;
const MAX_RLE_WIDTH: usize = 0x7fff;
const MIN_RUN: usize = 4;

/// Decodes one RGBE quadruple.
#[inline]
pub fn decode_pixel(q: [u8; 4]) -> [f64; 3] {
    if q[3] == 0 {
        return [0.0; 3];
    }
    let f = 2f64.powi(q[3] as i32 - (128 + 8));
    [q[0] as f64 * f, q[1] as f64 * f, q[2] as f64 * f]
}

/// `frexp` for positive normal values: `v = m * 2^e` with `m` in `[0.5, 1)`.
fn frexp(v: f64) -> (f64, i32) {
    debug_assert!(v.is_normal() && v > 0.0);
    let bits = v.to_bits();
    let e = ((bits >> 52) & 0x7ff) as i32 - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e)
}

/// Encodes one pixel: the exponent is chosen so the largest channel's
/// mantissa lands in `[128, 256)`, and mantissas are truncated.
pub fn encode_pixel(rgb: [f64; 3]) -> Result<[u8; 4]> {
    if rgb.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(&v) = rgb.iter().find(|v| **v < 0.0) {
        return Err(Error::OutOfRange(v));
    }
    let max = rgb[0].max(rgb[1]).max(rgb[2]);
    if max < 1e-32 {
        return Ok([0; 4]);
    }
    let (m, e) = frexp(max);
    if e + 128 > 255 {
        return Err(Error::OutOfRange(max));
    }
    let scale = m * 256.0 / max;
    Ok([
        (rgb[0] * scale) as u8,
        (rgb[1] * scale) as u8,
        (rgb[2] * scale) as u8,
        (e + 128) as u8,
    ])
}

fn read_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    let rest = &bytes[*pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("unterminated header line".into()))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end])
        .map(|s| s.trim_end_matches('\r'))
        .map_err(|_| Error::MalformedHeader("non-ASCII header line".into()))
}

fn parse_header(bytes: &[u8]) -> Result<(usize, usize, usize)> {
    let mut pos = 0;
    let magic = read_line(bytes, &mut pos)?;
    if magic != "#?RADIANCE" && magic != "#?RGBE" {
        return Err(Error::MalformedHeader(format!("bad magic {magic:?}")));
    }
    loop {
        let line = read_line(bytes, &mut pos)?;
        if line.is_empty() {
            break;
        }
        if let Some(fmt) = line.strip_prefix("FORMAT=") {
            if fmt.trim() != "32-bit_rle_rgbe" {
                return Err(Error::MalformedHeader(format!("unsupported pixel format {fmt:?}")));
            }
        }
    }
    let res = read_line(bytes, &mut pos)?;
    let toks: Vec<&str> = res.split_whitespace().collect();
    let [ya, h, xa, w] = toks[..] else {
        return Err(Error::MalformedHeader(format!("bad resolution line {res:?}")));
    };
    let axes_ok = matches!(ya, "-Y" | "+Y" | "-X" | "+X") && matches!(xa, "-Y" | "+Y" | "-X" | "+X");
    if !axes_ok {
        return Err(Error::MalformedHeader(format!("bad resolution line {res:?}")));
    }
    if ya != "-Y" || xa != "+X" {
        return Err(Error::UnsupportedOrientation(res.to_string()));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::MalformedHeader(format!("bad resolution line {res:?}")))
    };
    Ok((parse(w)?, parse(h)?, pos))
}

fn read_flat(bytes: &[u8], pos: &mut usize, row: usize, out: &mut [[u8; 4]]) -> Result<()> {
    let mut i = 0;
    let mut shift = 0;
    while i < out.len() {
        let q: [u8; 4] = bytes
            .get(*pos..*pos + 4)
            .ok_or(Error::TruncatedScanline { row })?
            .try_into()
            .unwrap();
        *pos += 4;
        if q[0] == 1 && q[1] == 1 && q[2] == 1 {
            if i == 0 {
                return Err(Error::CorruptScanline { row, reason: "run before first pixel" });
            }
            let count = (q[3] as usize) << shift;
            if i + count > out.len() {
                return Err(Error::CorruptScanline { row, reason: "run overflows scanline" });
            }
            let prev = out[i - 1];
            out[i..i + count].fill(prev);
            i += count;
            shift += 8;
        } else {
            out[i] = q;
            i += 1;
            shift = 0;
        }
    }
    Ok(())
}

fn read_rle(bytes: &[u8], pos: &mut usize, row: usize, out: &mut [[u8; 4]]) -> Result<()> {
    let w = out.len();
    for c in 0..4 {
        let mut i = 0;
        while i < w {
            let count = *bytes.get(*pos).ok_or(Error::TruncatedScanline { row })? as usize;
            *pos += 1;
            if count > 128 {
                let run = count - 128;
                if i + run > w {
                    return Err(Error::CorruptScanline { row, reason: "run overflows scanline" });
                }
                let v = *bytes.get(*pos).ok_or(Error::TruncatedScanline { row })?;
                *pos += 1;
                out[i..i + run].iter_mut().for_each(|p| p[c] = v);
                i += run;
            } else {
                if count == 0 || i + count > w {
                    return Err(Error::CorruptScanline { row, reason: "bad literal count" });
                }
                let src = bytes.get(*pos..*pos + count).ok_or(Error::TruncatedScanline { row })?;
                *pos += count;
                out[i..i + count].iter_mut().zip(src).for_each(|(p, &v)| p[c] = v);
                i += count;
            }
        }
    }
    Ok(())
}

pub fn read_rgbe<T: Scalar>(bytes: &[u8]) -> Result<HdrImage<T>> {
    let (width, height, mut pos) = parse_header(bytes)?;
    let mut line = vec![[0u8; 4]; width];
    let mut data = Vec::with_capacity(width * height * 3);
    for row in 0..height {
        let head = bytes.get(pos..pos + 4);
        let is_rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&width)
            && matches!(head, Some([2, 2, hi, _]) if hi & 0x80 == 0);
        if is_rle {
            let head = head.unwrap();
            let encoded_width = ((head[2] as usize) << 8) | head[3] as usize;
            if encoded_width != width {
                return Err(Error::CorruptScanline { row, reason: "scanline width mismatch" });
            }
            pos += 4;
            read_rle(bytes, &mut pos, row, &mut line)?;
        } else {
            read_flat(bytes, &mut pos, row, &mut line)?;
        }
        for q in &line {
            data.extend(decode_pixel(*q).map(T::lit));
        }
    }
    HdrImage::new(width, height, data)
}

fn write_rle_component(out: &mut Vec<u8>, data: &[u8]) {
    let w = data.len();
    let mut cur = 0;
    while cur < w {
        let mut beg_run = cur;
        let mut run_count = 0;
        let mut old_run_count = 0;
        while run_count < MIN_RUN && beg_run < w {
            beg_run += run_count;
            old_run_count = run_count;
            run_count = 1;
            while beg_run + run_count < w && run_count < 127 && data[beg_run] == data[beg_run + run_count] {
                run_count += 1;
            }
        }
        if old_run_count > 1 && old_run_count == beg_run - cur {
            out.push((128 + old_run_count) as u8);
            out.push(data[cur]);
            cur = beg_run;
        }
        while cur < beg_run {
            let n = (beg_run - cur).min(128);
            out.push(n as u8);
            out.extend_from_slice(&data[cur..cur + n]);
            cur += n;
        }
        if run_count >= MIN_RUN {
            out.push((128 + run_count) as u8);
            out.push(data[beg_run]);
            cur += run_count;
        }
    }
}

pub fn write_rgbe<T: Scalar>(img: &HdrImage<T>) -> Result<Vec<u8>> {
    let (w, h) = img.dims();
    let mut out = format!("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y {h} +X {w}\n").into_bytes();
    let rle = (MIN_RLE_WIDTH..=MAX_RLE_WIDTH).contains(&w);
    let mut planes = vec![vec![0u8; w]; 4];
    for y in 0..h {
        let row = &img.data()[y * w * 3..(y + 1) * w * 3];
        for (x, p) in row.chunks_exact(3).enumerate() {
            let q = encode_pixel([p[0].as_f64(), p[1].as_f64(), p[2].as_f64()])?;
            if rle {
                for c in 0..4 {
                    planes[c][x] = q[c];
                }
            } else {
                out.extend_from_slice(&q);
            }
        }
        if rle {
            out.extend_from_slice(&[2, 2, (w >> 8) as u8, (w & 0xff) as u8]);
            for plane in &planes {
                write_rle_component(&mut out, plane);
            }
        }
    }
    Ok(out)
}
