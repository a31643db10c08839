//! Virtual camera: turns an HDR image into a plausible 8-bit LDR capture.
//!
//! The pipeline is
//! 1. draw a dynamic range (EV) and response-curve parameters from a seed,
//! 2. auto-expose so the clamped image has a middle-gray mean,
//! 3. clamp to `[2^-dr, 1]` (sub-floor values go to 0),
//! 4. apply the response curve `f(v) = (1 + sigma) v^n / (v^n + sigma)`,
//! 5. quantize `value * 255` with round-half-up.
//!
//! The response curve output is quantized directly; no sRGB encode follows.
//!
//! # Random numbers
//!
//! Samples come from ChaCha8 (`rand_chacha`) seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`. Each parameter takes one `u64` draw,
//! in the order dynamic range, sigma, n, and maps it to `[0, 1)` as
//! `(bits >> 11) * 2^-53` before scaling into its range. Batch jobs derive
//! per-file seeds with [`derive_seed`].

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{quantize_unit, HdrImage, LdrImage, LinearLdr, RgbImage};
use crate::scalar::{CompensatedSum, Scalar};

pub const DYNAMIC_RANGE_EV: (f64, f64) = (9.6, 14.8);
pub const CRF_SIGMA: (f64, f64) = (0.3, 0.5);
pub const CRF_EXPONENT: (f64, f64) = (0.8, 1.0);
pub const DEFAULT_TARGET_MEAN: f64 = 0.18;

/// Acceptable deviation of the exposed mean from the target.
pub const EXPOSURE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResponseCurve {
    /// `f(v) = (1 + sigma) v^n / (v^n + sigma)`.
    Parametric { sigma: f64, n: f64 },
    /// `f(v) = v`; used for cross-checks against calibration.
    Identity,
}

impl ResponseCurve {
    pub fn parametric(sigma: f64, n: f64) -> Result<Self> {
        if !(sigma > 0.0 && n > 0.0 && sigma.is_finite() && n.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "response curve needs sigma > 0 and n > 0, got {sigma}, {n}"
            )));
        }
        Ok(ResponseCurve::Parametric { sigma, n })
    }

    #[inline]
    pub fn eval<T: Scalar>(&self, v: T) -> T {
        match *self {
            ResponseCurve::Identity => v,
            ResponseCurve::Parametric { sigma, n } => {
                let (sigma, n) = (T::lit(sigma), T::lit(n));
                let vn = v.powf(n);
                (T::one() + sigma) * vn / (vn + sigma)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSample {
    pub seed: u64,
    pub dynamic_range_ev: f64,
    pub crf: ResponseCurve,
    /// Linear gain chosen by auto-exposure; `None` until resolved.
    pub exposure: Option<f64>,
}

fn unit_draw(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn draw_in(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * unit_draw(rng)
}

/// Draws dynamic range, sigma and n uniformly from their ranges.
pub fn sample_camera(seed: u64) -> CameraSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dynamic_range_ev = draw_in(&mut rng, DYNAMIC_RANGE_EV);
    let sigma = draw_in(&mut rng, CRF_SIGMA);
    let n = draw_in(&mut rng, CRF_EXPONENT);
    CameraSample {
        seed,
        dynamic_range_ev,
        crf: ResponseCurve::Parametric { sigma, n },
        exposure: None,
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-file seed for batch jobs: `splitmix64(master + index * 0x9e3779b97f4a7c15)`,
/// i.e. element `index` of the SplitMix64 stream started at `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn exposed_mean(values: &[f64], gain: f64) -> f64 {
    let s: CompensatedSum = values.iter().map(|&v| (v * gain).min(1.0)).collect();
    s.value() / values.len() as f64
}

/// Finds the gain `e` with `mean(clamp(e * h, 0, 1)) == target_mean`.
///
/// When nothing clips the answer is `target_mean / mean(h)` exactly; otherwise
/// the mean is monotone in `e` and bisection narrows a bracket until the
/// relative width is below `1e-13`.
pub fn auto_expose<T: Scalar>(h: &HdrImage<T>, target_mean: f64) -> Result<f64> {
    if !(target_mean > 0.0 && target_mean < 1.0) {
        return Err(Error::InvalidParameter(format!("target mean must lie in (0, 1), got {target_mean}")));
    }
    let values: Vec<f64> = h.data().iter().map(|v| v.as_f64()).collect();
    let mean = h.mean_value();
    if !(mean > 0.0) {
        return Err(Error::Exposure("image is black"));
    }
    let lit = values.iter().filter(|&&v| v > 0.0).count() as f64 / values.len() as f64;
    if lit <= target_mean {
        return Err(Error::Exposure("too few lit values to reach the target mean"));
    }
    // mean(clamp(e h)) <= e mean(h), so the unclipped solution is a lower bound.
    let mut lo = target_mean / mean;
    if exposed_mean(&values, lo) >= target_mean * (1.0 - 1e-12) {
        return Ok(lo);
    }
    let mut hi = lo * 2.0;
    while exposed_mean(&values, hi) < target_mean {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Exposure("no finite gain reaches the target mean"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if exposed_mean(&values, mid) < target_mean {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= hi * 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Clamps an exposed image to the camera's range. Values strictly below
/// `2^-dr_ev` become 0; the floor itself is kept.
pub fn apply_dynamic_range<T: Scalar>(h_exposed: &HdrImage<T>, dr_ev: f64) -> Result<LinearLdr<T>> {
    if !(dr_ev > 0.0) || !dr_ev.is_finite() {
        return Err(Error::InvalidParameter(format!("dynamic range must be > 0 EV, got {dr_ev}")));
    }
    let floor = T::lit((-dr_ev).exp2());
    let data = h_exposed
        .data()
        .iter()
        .map(|&v| if v < floor { T::zero() } else { v.min(T::one()) })
        .collect();
    Ok(LinearLdr::from_raw(h_exposed.width(), h_exposed.height(), data))
}

/// Applies the response curve per channel. Output stays in `[0, 1]`.
pub fn apply_crf<T: Scalar>(l: &LinearLdr<T>, crf: &ResponseCurve) -> LinearLdr<T> {
    let data = l
        .data()
        .iter()
        .map(|&v| crf.eval(v).max(T::zero()).min(T::one()))
        .collect();
    LinearLdr::from_raw(l.width(), l.height(), data)
}

/// `value * 255`, rounded half up, no transfer function.
pub fn quantize<T: Scalar>(l: &LinearLdr<T>) -> LdrImage {
    let data = l.data().iter().map(|&v| quantize_unit(v)).collect();
    LdrImage::new(l.width(), l.height(), data).expect("dimensions already validated")
}

/// Inverse of [`quantize`]: `code / 255`, no transfer function.
pub fn dequantize<T: Scalar>(img: &LdrImage) -> LinearLdr<T> {
    let data = img.data().iter().map(|&c| T::lit(c as f64 / 255.0)).collect();
    LinearLdr::from_raw(img.width(), img.height(), data)
}

/// Runs the full camera on `h`. The returned sample carries the resolved
/// exposure. Auto-exposure sees the image before the noise floor is applied.
pub fn synth_ldr<T: Scalar>(h: &HdrImage<T>, sample: &CameraSample, target_mean: f64) -> Result<(LdrImage, CameraSample)> {
    if let ResponseCurve::Parametric { sigma, n } = sample.crf {
        ResponseCurve::parametric(sigma, n)?;
    }
    let exposure = auto_expose(h, target_mean)?;
    let exposed = h.scaled(T::lit(exposure))?;
    let linear = apply_dynamic_range(&exposed, sample.dynamic_range_ev)?;
    let encoded = apply_crf(&linear, &sample.crf);
    let resolved = CameraSample {
        exposure: Some(exposure),
        ..*sample
    };
    Ok((quantize(&encoded), resolved))
}
