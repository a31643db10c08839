//! Luminance-scale calibration of HDR images against their LDR counterparts,
//! and the three-class luminance segmentation labels derived from the
//! calibrated result.
//!
//! An HDR image in relative luminance carries the same information at any
//! positive scale. Calibration picks the scale at which the HDR matches the
//! linearized LDR over the pixels the LDR did not clip:
//!
//! ```text
//! scale = S(M * I) / S(M * H),   M(x, y) = [mean_c I(x, y, c) < tau]
//! ```
//!
//! where `S` sums every channel of every pixel. Sums are accumulated in `f64`
//! with Neumaier compensation.

use crate::error::{Error, Result};
use crate::image::{channel_mean, ensure_same_dims, HdrImage, LinearLdr, Plane, RgbImage};
use crate::scalar::{CompensatedSum, Scalar};

/// Default over-exposure threshold on the LDR channel mean.
pub const DEFAULT_TAU: f64 = 0.83;
/// `e^-5.5`: channel means at or below this are labeled dim.
pub const DEFAULT_T_LOW: f64 = 0.004_086_771_438_464_067;
/// `e^0.1`: channel means at or above this are labeled bright.
pub const DEFAULT_T_HIGH: f64 = 1.105_170_918_075_647_7;

/// Binary mask of pixels whose LDR channel mean is strictly below `tau`
/// (1 = usable for calibration).
#[derive(Debug, Clone, PartialEq)]
pub struct OverexposureMask {
    pub mask: Plane<u8>,
    pub tau: f64,
}

impl OverexposureMask {
    pub fn count(&self) -> usize {
        self.mask.data().iter().filter(|&&m| m == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult<T> {
    pub calibrated: HdrImage<T>,
    pub scale_factor: f64,
    /// Pixels that passed the over-exposure mask.
    pub masked_pixels: usize,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau must lie in (0, 1], got {tau}")))
    }
}

pub fn overexposure_mask<T: Scalar>(i: &LinearLdr<T>, tau: f64) -> Result<OverexposureMask> {
    check_tau(tau)?;
    let t = T::lit(tau);
    let mask = channel_mean(i).map(|&m| u8::from(m < t));
    Ok(OverexposureMask { mask, tau })
}

pub fn calibrate_hdr<T: Scalar>(h: &HdrImage<T>, i: &LinearLdr<T>, tau: f64) -> Result<CalibrationResult<T>> {
    ensure_same_dims(h, i)?;
    let mask = overexposure_mask(i, tau)?;
    let masked_pixels = mask.count();
    if masked_pixels == 0 {
        return Err(Error::Uncalibratable("every pixel is over-exposed"));
    }
    let mut ldr_sum = CompensatedSum::new();
    let mut hdr_sum = CompensatedSum::new();
    for ((&m, hp), ip) in mask
        .mask
        .data()
        .iter()
        .zip(h.data().chunks_exact(3))
        .zip(i.data().chunks_exact(3))
    {
        if m == 1 {
            for c in 0..3 {
                ldr_sum.add(ip[c].as_f64());
                hdr_sum.add(hp[c].as_f64());
            }
        }
    }
    let (ldr_sum, hdr_sum) = (ldr_sum.value(), hdr_sum.value());
    if !(hdr_sum > 0.0) {
        return Err(Error::Uncalibratable("HDR is black over the non-over-exposed pixels"));
    }
    if !(ldr_sum > 0.0) {
        return Err(Error::Uncalibratable("LDR is black over the non-over-exposed pixels"));
    }
    let scale_factor = ldr_sum / hdr_sum;
    if !scale_factor.is_finite() {
        return Err(Error::Uncalibratable("scale factor is not finite"));
    }
    let calibrated = h.scaled(T::lit(scale_factor))?;
    Ok(CalibrationResult {
        calibrated,
        scale_factor,
        masked_pixels,
    })
}

/// Luminance class of one pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum LuminanceClass {
    Dim = 0,
    Mid = 1,
    Bright = 2,
}

/// Three-class one-hot label map; stored as class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMask {
    pub classes: Plane<u8>,
    pub t_low: f64,
    pub t_high: f64,
}

impl SegMask {
    pub fn width(&self) -> usize {
        self.classes.width()
    }

    pub fn height(&self) -> usize {
        self.classes.height()
    }

    pub fn class_at(&self, x: usize, y: usize) -> LuminanceClass {
        match self.classes.get(x, y) {
            0 => LuminanceClass::Dim,
            1 => LuminanceClass::Mid,
            _ => LuminanceClass::Bright,
        }
    }

    /// Expands to interleaved one-hot channels (three values per pixel).
    pub fn one_hot<T: Scalar>(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.classes.data().len() * 3];
        for (px, &c) in self.classes.data().iter().enumerate() {
            out[px * 3 + c as usize] = T::one();
        }
        out
    }
}

pub fn classify(mean: f64, t_low: f64, t_high: f64) -> LuminanceClass {
    if mean <= t_low {
        LuminanceClass::Dim
    } else if mean >= t_high {
        LuminanceClass::Bright
    } else {
        LuminanceClass::Mid
    }
}

/// Labels each pixel of a calibrated HDR image as dim (mean `<= t_low`),
/// bright (mean `>= t_high`) or mid.
pub fn luminance_seg_labels<T: Scalar>(h_cal: &HdrImage<T>, t_low: f64, t_high: f64) -> Result<SegMask> {
    if !(t_low > 0.0 && t_low < t_high && t_high.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "thresholds must satisfy 0 < t_low < t_high, got {t_low}, {t_high}"
        )));
    }
    let classes = channel_mean(h_cal).map(|m| classify(m.as_f64(), t_low, t_high) as u8);
    Ok(SegMask { classes, t_low, t_high })
}
