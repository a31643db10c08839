//! Training losses on HDR predictions and the scale-aligned comparisons
//! built on them.
//!
//! Every reduction runs over all `width * height * 3` elements in `f64`. Log
//! differences are `d = ln(pred + eps) - ln(gt + eps)`.

use crate::calibration::SegMask;
use crate::error::{Error, Result};
use crate::image::{channel_mean, ensure_same_dims, HdrImage, LinearLdr, Plane, RgbImage};
use crate::scalar::{CompensatedSum, Scalar};

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BETA_HIGH: f64 = 0.2;
pub const DEFAULT_BETA_LOW: f64 = 0.01;
/// Target of the brightest LDR pixel after display anchoring, in cd/m^2.
pub const DISPLAY_PEAK: f64 = 255.0;

/// How the summed segmentation cross-entropy enters the combined loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SegNormalization {
    /// Divide by the pixel count so `alpha` does not depend on resolution.
    #[default]
    PerPixel,
    /// Use the raw sum.
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta_high: f64,
    pub beta_low: f64,
    pub seg_normalization: SegNormalization,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            alpha: DEFAULT_ALPHA,
            beta_high: DEFAULT_BETA_HIGH,
            beta_low: DEFAULT_BETA_LOW,
            seg_normalization: SegNormalization::PerPixel,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        for (name, w) in [("alpha", self.alpha), ("beta_high", self.beta_high), ("beta_low", self.beta_low)] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {w}")));
            }
        }
        Ok(())
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must be > 0, got {eps}")))
    }
}

/// Per-element log differences `ln(pred + eps) - ln(gt + eps)`.
pub fn log_differences<T: Scalar>(pred: &HdrImage<T>, gt: &HdrImage<T>, eps: f64) -> Result<Vec<f64>> {
    ensure_same_dims(pred, gt)?;
    check_eps(eps)?;
    Ok(pred
        .data()
        .iter()
        .zip(gt.data())
        .map(|(&p, &g)| (p.as_f64() + eps).ln() - (g.as_f64() + eps).ln())
        .collect())
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.collect::<CompensatedSum>().value() / n as f64
}

/// Gain `kappa` minimizing `mean((ln(kappa * pred) - ln(gt))^2)`:
/// `ln kappa = mean(ln(gt + eps) - ln(pred + eps))`.
pub fn si_scale_kappa<T: Scalar>(pred: &HdrImage<T>, gt: &HdrImage<T>, eps: f64) -> Result<f64> {
    let d = log_differences(pred, gt, eps)?;
    Ok((-mean(d.iter().copied(), d.len())).exp())
}

/// Scale-invariant log MSE: `mean(d^2) - mean(d)^2`, evaluated as the
/// centered second moment so it is never negative.
pub fn si_loss<T: Scalar>(pred: &HdrImage<T>, gt: &HdrImage<T>, eps: f64) -> Result<f64> {
    let d = log_differences(pred, gt, eps)?;
    let m = mean(d.iter().copied(), d.len());
    Ok(mean(d.iter().map(|v| (v - m) * (v - m)), d.len()))
}

/// The scale-invariant MSE metric; same quantity as [`si_loss`] with the
/// default epsilon.
pub fn si_mse<T: Scalar>(pred: &HdrImage<T>, gt: &HdrImage<T>) -> Result<f64> {
    si_loss(pred, gt, DEFAULT_EPSILON)
}

/// Predicted per-pixel class probabilities, three interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMask<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> ProbMask<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height * 3 {
            return Err(Error::InvalidImage(format!(
                "probability mask of {} values does not fit {width}x{height}x3",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(Error::InvalidImage(format!("probabilities must lie in [0, 1], found {v}")));
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
}

impl<T> RgbImage<T> for ProbMask<T> {
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

/// Binary cross-entropy summed over every pixel and channel. Predictions are
/// clamped into `[eps, 1 - eps]`.
pub fn seg_cross_entropy<T: Scalar>(pred: &ProbMask<T>, gt: &SegMask, eps: f64) -> Result<f64> {
    if pred.dims() != (gt.width(), gt.height()) {
        return Err(Error::mismatch(pred.dims(), (gt.width(), gt.height())));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 0.5), got {eps}")));
    }
    let target: Vec<f64> = gt.one_hot();
    let terms = pred.data().iter().zip(&target).map(|(&p, &t)| {
        let p = p.as_f64().clamp(eps, 1.0 - eps);
        -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
    });
    Ok(terms.collect::<CompensatedSum>().value())
}

/// `si_loss + alpha * seg_cross_entropy`, the latter normalized per
/// `cfg.seg_normalization`.
pub fn total_loss<T: Scalar>(
    pred_hdr: &HdrImage<T>,
    gt_hdr: &HdrImage<T>,
    pred_mask: &ProbMask<T>,
    gt_mask: &SegMask,
    cfg: &LossConfig,
) -> Result<f64> {
    cfg.validate()?;
    let si = si_loss(pred_hdr, gt_hdr, cfg.epsilon)?;
    let mut seg = seg_cross_entropy(pred_mask, gt_mask, cfg.epsilon)?;
    if cfg.seg_normalization == SegNormalization::PerPixel {
        seg /= pred_mask.pixel_count() as f64;
    }
    Ok(si + cfg.alpha * seg)
}

/// Panorama loss: `beta_high * mean((m d)^2) + beta_low * mean(((1 - m) d)^2)`
/// with the merge mask `m` broadcast over channels.
pub fn pano_loss<T: Scalar>(
    pred: &HdrImage<T>,
    gt: &HdrImage<T>,
    merge_mask: &Plane<T>,
    cfg: &LossConfig,
) -> Result<f64> {
    cfg.validate()?;
    if merge_mask.dims() != pred.dims() {
        return Err(Error::mismatch(merge_mask.dims(), pred.dims()));
    }
    if let Some(m) = merge_mask.data().iter().find(|m| !(**m >= T::zero() && **m <= T::one())) {
        return Err(Error::InvalidParameter(format!("merge mask values must lie in [0, 1], found {m}")));
    }
    let d = log_differences(pred, gt, cfg.epsilon)?;
    let mut high = CompensatedSum::new();
    let mut low = CompensatedSum::new();
    for (px, &m) in d.chunks_exact(3).zip(merge_mask.data()) {
        let m = m.as_f64();
        for &v in px {
            let a = m * v;
            let b = (1.0 - m) * v;
            high.add(a * a);
            low.add(b * b);
        }
    }
    let n = d.len() as f64;
    Ok(cfg.beta_high * high.value() / n + cfg.beta_low * low.value() / n)
}

/// Brings a prediction and its ground truth to display luminance.
///
/// The prediction is first multiplied by [`si_scale_kappa`]; both are then
/// scaled so the ground-truth channel mean at the LDR's brightest pixel
/// (largest channel mean, first in row order on ties) equals
/// [`DISPLAY_PEAK`].
pub fn display_anchor<T: Scalar>(
    pred: &HdrImage<T>,
    gt: &HdrImage<T>,
    ldr: &LinearLdr<T>,
    eps: f64,
) -> Result<(HdrImage<T>, HdrImage<T>)> {
    ensure_same_dims(pred, gt)?;
    ensure_same_dims(gt, ldr)?;
    let kappa = si_scale_kappa(pred, gt, eps)?;
    let ldr_mean = channel_mean(ldr);
    let (argmax, peak) = ldr_mean
        .data()
        .iter()
        .enumerate()
        .fold((0, T::zero()), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    if peak <= T::zero() {
        return Err(Error::DegenerateAnchor("LDR image is black"));
    }
    let gt_mean = channel_mean(gt);
    let anchor = gt_mean.data()[argmax].as_f64();
    if !(anchor > 0.0) {
        return Err(Error::DegenerateAnchor("ground truth is black at the LDR peak"));
    }
    let gain = DISPLAY_PEAK / anchor;
    let pred_out = pred.scaled(T::lit(kappa * gain))?;
    let gt_out = gt.scaled(T::lit(gain))?;
    Ok((pred_out, gt_out))
}
