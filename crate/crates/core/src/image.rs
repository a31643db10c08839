//! Image buffers, sRGB transfer functions and the exposure-window preview.
//!
//! All buffers are row-major, top row first, three interleaved channels per
//! pixel (except [`Plane`], which holds one value per pixel). File formats
//! with other row orders translate at the I/O boundary.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Read access shared by the three-channel float buffers.
pub trait RgbImage<T> {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn data(&self) -> &[T];

    fn dims(&self) -> (usize, usize) {
        (self.width(), self.height())
    }

    fn pixel_count(&self) -> usize {
        self.width() * self.height()
    }

    fn pixel(&self, x: usize, y: usize) -> [T; 3]
    where
        T: Copy,
    {
        let i = (y * self.width() + x) * 3;
        let d = self.data();
        [d[i], d[i + 1], d[i + 2]]
    }
}

fn check_dims(width: usize, height: usize, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::InvalidImage("dimensions overflow".into()))?;
    if len != expected {
        return Err(Error::InvalidImage(format!(
            "buffer holds {len} values, {width}x{height}x{channels} needs {expected}"
        )));
    }
    Ok(())
}

pub(crate) fn ensure_same_dims<A, B, T, U>(a: &A, b: &B) -> Result<()>
where
    A: RgbImage<T> + ?Sized,
    B: RgbImage<U> + ?Sized,
{
    if a.dims() != b.dims() {
        return Err(Error::mismatch(a.dims(), b.dims()));
    }
    Ok(())
}

/// Linear radiance in relative luminance units. Every value is finite and
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> HdrImage<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        if let Some(v) = data.iter().find(|v| !v.is_finite() || **v < T::zero()) {
            return Err(Error::InvalidImage(format!(
                "HDR values must be finite and non-negative, found {v}"
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [T; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: [T; 3]) -> Result<Self> {
        Self::from_fn(width, height, |_, _| value)
    }

    /// Caller guarantees the invariants; checked in debug builds.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        debug_assert!(data.iter().all(|v| v.is_finite() && *v >= T::zero()));
        Self { width, height, data }
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Multiplies every value by `k`.
    pub fn scaled(&self, k: T) -> Result<Self> {
        if !k.is_finite() || k < T::zero() {
            return Err(Error::InvalidParameter(format!("scale factor {k} must be finite and >= 0")));
        }
        let data: Vec<T> = self.data.iter().map(|&v| v * k).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_raw(self.width, self.height, data))
    }

    pub fn max_value(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    pub fn mean_value(&self) -> f64 {
        let s: crate::CompensatedSum = self.data.iter().map(|v| v.as_f64()).collect();
        s.value() / self.data.len() as f64
    }

    pub fn cast<U: Scalar>(&self) -> Result<HdrImage<U>> {
        let data: Vec<U> = self.data.iter().map(|v| U::lit(v.as_f64())).collect();
        HdrImage::new(self.width, self.height, data)
    }

    /// Clamps into `[0, 1]`.
    pub fn clamp_unit(&self) -> LinearLdr<T> {
        let data = self.data.iter().map(|&v| v.min(T::one())).collect();
        LinearLdr::from_raw(self.width, self.height, data)
    }

    /// Rolls the image horizontally by `shift` pixels: output column
    /// `x` takes input column `x - shift` (mod width).
    pub fn roll_columns(&self, shift: isize) -> Self {
        let w = self.width as isize;
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in 0..self.width {
                let sx = (x as isize - shift).rem_euclid(w) as usize;
                let i = (y * self.width + sx) * 3;
                data.extend_from_slice(&self.data[i..i + 3]);
            }
        }
        Self::from_raw(self.width, self.height, data)
    }

    /// Mirrors the image left to right.
    pub fn flip_columns(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for y in 0..self.height {
            for x in (0..self.width).rev() {
                let i = (y * self.width + x) * 3;
                data.extend_from_slice(&self.data[i..i + 3]);
            }
        }
        Self::from_raw(self.width, self.height, data)
    }
}

impl<T> RgbImage<T> for HdrImage<T> {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn data(&self) -> &[T] {
        &self.data
    }
}

/// Float image with every value in `[0, 1]`.
///
/// Holds linearized LDR content, and also the camera-encoded signal between
/// the response curve and quantization in the virtual camera.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLdr<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> LinearLdr<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        if let Some(v) = data.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidImage(format!("LDR values must lie in [0, 1], found {v}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [T; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        debug_assert!(data.iter().all(|v| *v >= T::zero() && *v <= T::one()));
        Self { width, height, data }
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn to_hdr(&self) -> HdrImage<T> {
        HdrImage::from_raw(self.width, self.height, self.data.clone())
    }
}

impl<T> RgbImage<T> for LinearLdr<T> {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn data(&self) -> &[T] {
        &self.data
    }
}

/// 8-bit, three-channel image (sRGB code values unless stated otherwise).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdrImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LdrImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height, data.len(), 3)?;
        Ok(Self { width, height, data })
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

impl RgbImage<u8> for LdrImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    fn data(&self) -> &[u8] {
        &self.data
    }
}

/// Single-channel per-pixel map (channel means, masks, validity flags).
#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Copy> Plane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        check_dims(width, height, data.len(), 1)?;
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub fn map<U: Copy>(&self, f: impl FnMut(&T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }
}

/// sRGB electro-optical transfer: encoded value in `[0, 1]` to linear light.
#[inline]
pub fn srgb_decode<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.04045) {
        v / T::lit(12.92)
    } else {
        ((v + T::lit(0.055)) / T::lit(1.055)).powf(T::lit(2.4))
    }
}

/// Inverse of [`srgb_decode`].
#[inline]
pub fn srgb_encode<T: Scalar>(v: T) -> T {
    if v <= T::lit(0.003_130_8) {
        v * T::lit(12.92)
    } else {
        T::lit(1.055) * v.powf(T::lit(1.0 / 2.4)) - T::lit(0.055)
    }
}

/// Quantizes a `[0, 1]` value to 8 bits, rounding half up. Out-of-range
/// input is clamped, NaN maps to 0.
#[inline]
pub fn quantize_unit<T: Scalar>(v: T) -> u8 {
    let v = v.as_f64();
    if !(v > 0.0) {
        return 0;
    }
    (v.min(1.0) * 255.0 + 0.5).floor() as u8
}

pub fn srgb_to_linear<T: Scalar>(img: &LdrImage) -> LinearLdr<T> {
    let lut: Vec<T> = (0..=255u8).map(|k| srgb_decode(T::lit(k as f64 / 255.0))).collect();
    let data = img.data.iter().map(|&k| lut[k as usize]).collect();
    LinearLdr::from_raw(img.width, img.height, data)
}

pub fn linear_to_srgb<T: Scalar>(img: &LinearLdr<T>) -> LdrImage {
    let data = img
        .data
        .iter()
        .map(|&v| quantize_unit(srgb_encode(v.max(T::zero()).min(T::one()))))
        .collect();
    LdrImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Preview window used when none is given.
pub const DEFAULT_WINDOW_EV: f64 = 12.0;

/// Linear-window preview: scale by `2^exposure_ev`, drop values below
/// `2^-window_ev` to black, saturate at 1, then sRGB-encode.
pub fn exposure_preview<T: Scalar>(h: &HdrImage<T>, exposure_ev: f64, window_ev: f64) -> Result<LdrImage> {
    if !(window_ev > 0.0) || !window_ev.is_finite() {
        return Err(Error::InvalidParameter(format!("preview window must be > 0 EV, got {window_ev}")));
    }
    if !exposure_ev.is_finite() {
        return Err(Error::InvalidParameter("exposure must be finite".into()));
    }
    let gain = T::lit(exposure_ev.exp2());
    let floor = T::lit((-window_ev).exp2());
    let data = h
        .data
        .iter()
        .map(|&v| {
            let s = v * gain;
            let l = if s < floor { T::zero() } else { s.min(T::one()) };
            quantize_unit(srgb_encode(l))
        })
        .collect();
    Ok(LdrImage {
        width: h.width,
        height: h.height,
        data,
    })
}

/// Per-pixel mean of the three channels.
pub fn channel_mean<T: Scalar, I: RgbImage<T> + ?Sized>(img: &I) -> Plane<T> {
    let three = T::lit(3.0);
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| (p[0] + p[1] + p[2]) / three)
        .collect();
    Plane {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Channel mean of an 8-bit image, in code units.
pub fn ldr_channel_mean(img: &LdrImage) -> Plane<f64> {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| (p[0] as f64 + p[1] as f64 + p[2] as f64) / 3.0)
        .collect();
    Plane {
        width: img.width,
        height: img.height,
        data,
    }
}
