//! Log-domain PSNR and SSIM.
//!
//! SSIM follows the Gaussian-window formulation: 11x11 window with
//! sigma 1.5, `K1 = 0.01`, `K2 = 0.03`, population statistics, averaged over
//! the pixels whose window lies fully inside the image. This matches
//! `skimage.metrics.structural_similarity(gaussian_weights=True, sigma=1.5,
//! use_sample_covariance=False)`.

use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, ldr_channel_mean, HdrImage, LdrImage, Plane, RgbImage};
use crate::losses::log_differences;
use crate::scalar::{CompensatedSum, Scalar};

/// Reported when two images are identical.
pub const PSNR_CAP_DB: f64 = 99.0;
pub const SSIM_RADIUS: usize = 5;
pub const SSIM_SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// PSNR of log values, with both images normalized by the ground truth's
/// log range (peak 1). Capped at [`PSNR_CAP_DB`].
pub fn log_psnr<T: Scalar>(pred: &HdrImage<T>, gt: &HdrImage<T>, eps: f64) -> Result<f64> {
    let d = log_differences(pred, gt, eps)?;
    let (lo, hi) = gt.data().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        let l = (v.as_f64() + eps).ln();
        (lo.min(l), hi.max(l))
    });
    let range = if hi > lo { hi - lo } else { 1.0 };
    let mse = d.iter().map(|v| (v / range) * (v / range)).collect::<CompensatedSum>().value() / d.len() as f64;
    if mse <= 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

/// Mean squared error over all elements.
pub fn mse<T: Scalar>(a: &HdrImage<T>, b: &HdrImage<T>) -> Result<f64> {
    ensure_same_dims(a, b)?;
    let s: CompensatedSum = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x.as_f64() - y.as_f64();
            d * d
        })
        .collect();
    Ok(s.value() / a.data().len() as f64)
}

fn gaussian_kernel() -> [f64; 2 * SSIM_RADIUS + 1] {
    let mut k = [0.0; 2 * SSIM_RADIUS + 1];
    for (i, w) in k.iter_mut().enumerate() {
        let x = i as f64 - SSIM_RADIUS as f64;
        *w = (-0.5 * x * x / (SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= s);
    k
}

/// Separable Gaussian filter evaluated only where the window fits.
fn filter_valid(img: &[f64], w: usize, h: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let r = SSIM_RADIUS;
    let ow = w - 2 * r;
    let oh = h - 2 * r;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = k.iter().enumerate().map(|(i, kw)| kw * img[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, kw)| kw * rows[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Mean SSIM of two single-channel images with the given data range.
pub fn ssim_plane(a: &Plane<f64>, b: &Plane<f64>, data_range: f64) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::mismatch(a.dims(), b.dims()));
    }
    let (w, h) = a.dims();
    let win = 2 * SSIM_RADIUS + 1;
    if w < win || h < win {
        return Err(Error::InvalidImage(format!("SSIM needs at least {win}x{win} pixels, got {w}x{h}")));
    }
    let k = gaussian_kernel();
    let (x, y) = (a.data(), b.data());
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let (mx, ow, oh) = filter_valid(x, w, h, &k);
    let (my, ..) = filter_valid(y, w, h, &k);
    let (mxx, ..) = filter_valid(&xx, w, h, &k);
    let (myy, ..) = filter_valid(&yy, w, h, &k);
    let (mxy, ..) = filter_valid(&xy, w, h, &k);
    let c1 = (K1 * data_range).powi(2);
    let c2 = (K2 * data_range).powi(2);
    let s: CompensatedSum = (0..ow * oh)
        .map(|i| {
            let vx = mxx[i] - mx[i] * mx[i];
            let vy = myy[i] - my[i] * my[i];
            let cxy = mxy[i] - mx[i] * my[i];
            ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2))
                / ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2))
        })
        .collect();
    Ok(s.value() / (ow * oh) as f64)
}

/// SSIM of two 8-bit images on their channel means (data range 255).
pub fn ssim(a: &LdrImage, b: &LdrImage) -> Result<f64> {
    ensure_same_dims(a, b)?;
    ssim_plane(&ldr_channel_mean(a), &ldr_channel_mean(b), 255.0)
}
