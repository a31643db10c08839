//! Equirectangular panorama geometry: ceiling-view projection (P2C / C2P),
//! merge masks, merging, and perspective crops.
//!
//! # Conventions
//!
//! * World frame: `+z` up. Pixel `(x, y)` of a `W x H` panorama has
//!   colatitude `theta = pi (y + 0.5) / H` measured from `+z` and azimuth
//!   `phi = 2 pi (x + 0.5) / W - pi`, so `phi = -pi` is the left edge.
//!   Direction `= (sin theta cos phi, sin theta sin phi, cos theta)`.
//! * Ceiling view: a square image of the plane `z = 0` over
//!   `[-extent, extent]^2`. Column index grows with `+x`, row index grows
//!   with `-y`. A plane point `c` is imaged from the camera centre
//!   `r = (0, 0, -d)`; its panorama direction is where the ray `r -> c`
//!   leaves the unit sphere on the upper hemisphere. With `d = 1` this is the
//!   stereographic projection from the south pole and the upper hemisphere
//!   maps exactly onto the unit disk.
//! * Bilinear sampling wraps horizontally on panoramas and clamps vertically;
//!   ceiling images clamp on both axes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{channel_mean, ensure_same_dims, HdrImage, LinearLdr, Plane, RgbImage};
use crate::scalar::Scalar;

pub const DEFAULT_MERGE_TAU: f64 = 0.13;
pub const DEFAULT_CROP_HFOV_DEG: f64 = 60.0;

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: Vec3) -> Vec3 {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Unit direction through the (possibly fractional) pixel position `(x, y)`;
/// integer arguments address pixel centres.
pub fn equirect_dir(x: f64, y: f64, width: usize, height: usize) -> Vec3 {
    let theta = std::f64::consts::PI * (y + 0.5) / height as f64;
    let phi = std::f64::consts::TAU * (x + 0.5) / width as f64 - std::f64::consts::PI;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Continuous pixel position of direction `v`; `x` is wrapped into
/// `[-0.5, width - 0.5)`.
pub fn dir_equirect(v: Vec3, width: usize, height: usize) -> (f64, f64) {
    let v = normalize(v);
    let theta = v[2].clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    let w = width as f64;
    let mut x = (phi + std::f64::consts::PI) / std::f64::consts::TAU * w - 0.5;
    if x >= w - 0.5 {
        x -= w;
    }
    let y = theta / std::f64::consts::PI * height as f64 - 0.5;
    (x, y)
}

// `a + (b - a) t` keeps constant neighbourhoods exact.
fn lerp3<T: Scalar>(a: [T; 3], b: [T; 3], t: T) -> [T; 3] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

/// Bilinear panorama lookup at a continuous pixel position; wraps in `x`,
/// clamps in `y`.
pub fn sample_pano<T: Scalar>(pano: &HdrImage<T>, x: f64, y: f64) -> [T; 3] {
    let (w, h) = pano.dims();
    let x0 = x.floor();
    let fx = T::lit(x - x0);
    let xa = (x0 as i64).rem_euclid(w as i64) as usize;
    let xb = (xa + 1) % w;
    let (ya, yb, fy) = clamp_axis(y, h);
    let top = lerp3(pano.pixel(xa, ya), pano.pixel(xb, ya), fx);
    let bottom = lerp3(pano.pixel(xa, yb), pano.pixel(xb, yb), fx);
    lerp3(top, bottom, T::lit(fy))
}

fn clamp_axis(v: f64, n: usize) -> (usize, usize, f64) {
    let max = (n - 1) as f64;
    let v = v.clamp(0.0, max);
    let a = v.floor();
    let ia = a as usize;
    (ia, (ia + 1).min(n - 1), v - a)
}

/// Bilinear lookup clamped on both axes.
pub fn sample_clamped<T: Scalar>(img: &HdrImage<T>, x: f64, y: f64) -> [T; 3] {
    let (w, h) = img.dims();
    let (xa, xb, fx) = clamp_axis(x, w);
    let (ya, yb, fy) = clamp_axis(y, h);
    let fx = T::lit(fx);
    let top = lerp3(img.pixel(xa, ya), img.pixel(xb, ya), fx);
    let bottom = lerp3(img.pixel(xa, yb), img.pixel(xb, yb), fx);
    lerp3(top, bottom, T::lit(fy))
}

/// Point on the upper unit hemisphere hit by the ray from `(0, 0, -d)`
/// through plane point `(c_x, c_y, 0)`; `None` when the ray leaves the
/// sphere below the equator.
pub fn plane_to_sphere(c: [f64; 2], d: f64) -> Option<Vec3> {
    let rho2 = c[0] * c[0] + c[1] * c[1];
    let d2 = d * d;
    let a = rho2 + d2;
    // |r + t (c - r)|^2 = 1 with r = (0, 0, -d): a t^2 - 2 d^2 t + d^2 - 1 = 0.
    let disc = d2 * d2 - a * (d2 - 1.0);
    let t = (d2 + disc.max(0.0).sqrt()) / a;
    let z = d * (t - 1.0);
    if z < 0.0 {
        return None;
    }
    Some([t * c[0], t * c[1], z])
}

/// Plane point whose ray from `(0, 0, -d)` passes through `p`; `None` for
/// directions below the equator.
pub fn sphere_to_plane(p: Vec3, d: f64) -> Option<[f64; 2]> {
    if p[2] < 0.0 {
        return None;
    }
    let s = d / (p[2] + d);
    Some([s * p[0], s * p[1]])
}

/// Geometry shared by P2C and C2P.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanoProjection {
    pub pano_width: usize,
    pub pano_height: usize,
    pub ceil_size: usize,
    /// Distance `d` of the projection centre below the sphere centre.
    pub camera_offset: f64,
    /// Half-width of the plane region covered by the ceiling image.
    pub plane_extent: f64,
}

impl PanoProjection {
    /// Default geometry: `d = 1`, extent 1, ceiling image as wide as the
    /// panorama.
    pub fn new(pano_width: usize) -> Result<Self> {
        let p = Self {
            pano_width,
            pano_height: pano_width / 2,
            ceil_size: pano_width,
            camera_offset: 1.0,
            plane_extent: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pano_width == 0 || self.pano_width != 2 * self.pano_height {
            return Err(Error::InvalidParameter(format!(
                "panorama must be 2:1, got {}x{}",
                self.pano_width, self.pano_height
            )));
        }
        if self.ceil_size == 0 {
            return Err(Error::InvalidParameter("ceiling size must be positive".into()));
        }
        if !(self.camera_offset > 0.0 && self.camera_offset <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "camera offset must lie in (0, 1], got {}",
                self.camera_offset
            )));
        }
        if !(self.plane_extent > 0.0 && self.plane_extent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "plane extent must be > 0, got {}",
                self.plane_extent
            )));
        }
        Ok(())
    }

    /// Plane point at ceiling pixel `(i, j)` (fractional positions allowed).
    pub fn ceil_pixel_to_plane(&self, i: f64, j: f64) -> [f64; 2] {
        let n = self.ceil_size as f64;
        let e = self.plane_extent;
        [e * (2.0 * (i + 0.5) / n - 1.0), e * (1.0 - 2.0 * (j + 0.5) / n)]
    }

    pub fn plane_to_ceil_pixel(&self, c: [f64; 2]) -> (f64, f64) {
        let n = self.ceil_size as f64;
        let e = self.plane_extent;
        ((c[0] / e + 1.0) * 0.5 * n - 0.5, (1.0 - c[1] / e) * 0.5 * n - 0.5)
    }

    /// Panorama position sampled by ceiling pixel `(i, j)`, if any.
    pub fn p2c_source(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        let c = self.ceil_pixel_to_plane(i as f64, j as f64);
        plane_to_sphere(c, self.camera_offset).map(|p| dir_equirect(p, self.pano_width, self.pano_height))
    }

    /// Ceiling position sampled by panorama pixel `(x, y)`, if it is covered.
    pub fn c2p_source(&self, x: usize, y: usize) -> Option<(f64, f64)> {
        let p = equirect_dir(x as f64, y as f64, self.pano_width, self.pano_height);
        let c = sphere_to_plane(p, self.camera_offset)?;
        let e = self.plane_extent;
        if c[0].abs() > e || c[1].abs() > e {
            return None;
        }
        Some(self.plane_to_ceil_pixel(c))
    }

    fn check_pano<T>(&self, pano: &HdrImage<T>) -> Result<()> {
        if pano.dims() != (self.pano_width, self.pano_height) {
            return Err(Error::mismatch(pano.dims(), (self.pano_width, self.pano_height)));
        }
        Ok(())
    }

    fn check_ceil<T>(&self, ceil: &HdrImage<T>) -> Result<()> {
        if ceil.dims() != (self.ceil_size, self.ceil_size) {
            return Err(Error::mismatch(ceil.dims(), (self.ceil_size, self.ceil_size)));
        }
        Ok(())
    }
}

/// Renders the ceiling view of a panorama. Plane points without an
/// upper-hemisphere intersection are 0.
pub fn p2c<T: Scalar>(pano: &HdrImage<T>, proj: &PanoProjection) -> Result<HdrImage<T>> {
    proj.validate()?;
    proj.check_pano(pano)?;
    let n = proj.ceil_size;
    let mut data = vec![T::zero(); n * n * 3];
    data.par_chunks_mut(n * 3).enumerate().for_each(|(j, row)| {
        for i in 0..n {
            if let Some((x, y)) = proj.p2c_source(i, j) {
                row[i * 3..i * 3 + 3].copy_from_slice(&sample_pano(pano, x, y));
            }
        }
    });
    Ok(HdrImage::from_raw(n, n, data))
}

/// Projects a ceiling view back onto the panorama. Returns the panorama and
/// a validity plane (1 where the ceiling image covers the direction; 0 for
/// everything below the equator and outside the imaged plane region, where
/// the output is 0).
pub fn c2p<T: Scalar>(ceil: &HdrImage<T>, proj: &PanoProjection) -> Result<(HdrImage<T>, Plane<u8>)> {
    proj.validate()?;
    proj.check_ceil(ceil)?;
    let (w, h) = (proj.pano_width, proj.pano_height);
    let mut data = vec![T::zero(); w * h * 3];
    let mut valid = vec![0u8; w * h];
    data.par_chunks_mut(w * 3)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(y, (row, vrow))| {
            for x in 0..w {
                if let Some((i, j)) = proj.c2p_source(x, y) {
                    row[x * 3..x * 3 + 3].copy_from_slice(&sample_clamped(ceil, i, j));
                    vrow[x] = 1;
                }
            }
        });
    Ok((HdrImage::from_raw(w, h, data), Plane::new(w, h, valid)?))
}

/// Soft blend weights in the panorama domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeMask<T> {
    pub weights: Plane<T>,
    pub tau: f64,
}

/// `max(0, mean - tau) / (1 - tau)`, clamped to `[0, 1]`.
pub fn merge_weight(mean: f64, tau: f64) -> f64 {
    ((mean - tau).max(0.0) / (1.0 - tau)).min(1.0)
}

/// Merge mask from the linear ceiling-view LDR input.
pub fn merge_mask<T: Scalar>(i_ceil: &LinearLdr<T>, proj: &PanoProjection, tau: f64) -> Result<MergeMask<T>> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::InvalidParameter(format!("merge threshold must lie in [0, 1), got {tau}")));
    }
    let (pano, _) = c2p(&i_ceil.to_hdr(), proj)?;
    let weights = channel_mean(&pano).map(|m| T::lit(merge_weight(m.as_f64(), tau)));
    Ok(MergeMask { weights, tau })
}

/// `m * c2p(h_c) + (1 - m) * h_p`.
pub fn merge_panorama<T: Scalar>(
    h_c: &HdrImage<T>,
    h_p: &HdrImage<T>,
    m_p: &MergeMask<T>,
    proj: &PanoProjection,
) -> Result<HdrImage<T>> {
    proj.check_pano(h_p)?;
    if m_p.weights.dims() != h_p.dims() {
        return Err(Error::mismatch(m_p.weights.dims(), h_p.dims()));
    }
    let (from_ceil, _) = c2p(h_c, proj)?;
    ensure_same_dims(&from_ceil, h_p)?;
    let data = from_ceil
        .data()
        .chunks_exact(3)
        .zip(h_p.data().chunks_exact(3))
        .zip(m_p.weights.data())
        .flat_map(|((c, p), &m)| {
            let k = T::one() - m;
            [m * c[0] + k * p[0], m * c[1] + k * p[1], m * c[2] + k * p[2]]
        })
        .collect();
    HdrImage::new(h_p.width(), h_p.height(), data)
}

/// Pinhole view from the sphere centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct View {
    /// Azimuth of the optical axis, radians; 0 looks along `+x`.
    pub yaw: f64,
    /// Elevation of the optical axis, radians; positive looks up.
    pub pitch: f64,
    /// Horizontal field of view, radians, in `(0, pi)`.
    pub hfov: f64,
}

/// Perspective crop. Image right follows increasing azimuth, so crops are
/// not mirrored relative to the panorama.
pub fn crop_perspective<T: Scalar>(pano: &HdrImage<T>, view: &View, width: usize, height: usize) -> Result<HdrImage<T>> {
    if !(view.hfov > 0.0 && view.hfov < std::f64::consts::PI) {
        return Err(Error::InvalidParameter(format!("field of view must lie in (0, pi), got {}", view.hfov)));
    }
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("crop dimensions must be positive".into()));
    }
    let (sy, cy) = view.yaw.sin_cos();
    let (sp, cp) = view.pitch.sin_cos();
    let forward = [cp * cy, cp * sy, sp];
    let right = [-sy, cy, 0.0];
    let up = [-sp * cy, -sp * sy, cp];
    let focal = 0.5 * width as f64 / (0.5 * view.hfov).tan();
    let (pw, ph) = pano.dims();
    let mut data = vec![T::zero(); width * height * 3];
    data.par_chunks_mut(width * 3).enumerate().for_each(|(j, row)| {
        let v = 0.5 * height as f64 - (j as f64 + 0.5);
        for i in 0..width {
            let u = i as f64 + 0.5 - 0.5 * width as f64;
            let d = [
                forward[0] * focal + right[0] * u + up[0] * v,
                forward[1] * focal + right[1] * u + up[1] * v,
                forward[2] * focal + right[2] * u + up[2] * v,
            ];
            let (x, y) = dir_equirect(d, pw, ph);
            row[i * 3..i * 3 + 3].copy_from_slice(&sample_pano(pano, x, y));
        }
    });
    Ok(HdrImage::from_raw(width, height, data))
}

/// Dataset cropping scheme: six views around the horizon plus, unless the
/// panorama is outdoor, three views at 45 degrees elevation. All crops are
/// 4:3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropScheme {
    pub outdoor: bool,
    pub hfov_deg: f64,
    pub width: usize,
}

impl Default for CropScheme {
    fn default() -> Self {
        Self {
            outdoor: false,
            hfov_deg: DEFAULT_CROP_HFOV_DEG,
            width: 320,
        }
    }
}

impl CropScheme {
    pub fn height(&self) -> usize {
        ((self.width * 3) as f64 / 4.0).round().max(1.0) as usize
    }

    /// `(yaw, pitch)` pairs in degrees.
    pub fn views(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = (0..6).map(|k| (60.0 * k as f64, 0.0)).collect();
        if !self.outdoor {
            v.extend((0..3).map(|k| (120.0 * k as f64, 45.0)));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crop<T> {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub image: HdrImage<T>,
}

pub fn crop_set<T: Scalar>(pano: &HdrImage<T>, scheme: &CropScheme) -> Result<Vec<Crop<T>>> {
    let hfov = scheme.hfov_deg.to_radians();
    scheme
        .views()
        .into_iter()
        .map(|(yaw_deg, pitch_deg)| {
            let view = View {
                yaw: yaw_deg.to_radians(),
                pitch: pitch_deg.to_radians(),
                hfov,
            };
            Ok(Crop {
                yaw_deg,
                pitch_deg,
                image: crop_perspective(pano, &view, scheme.width, scheme.height())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn top_row_points_up() {
        let d = equirect_dir(256.0, 0.0, 512, 256);
        assert!(d[2] > (std::f64::consts::PI / 256.0).cos() - 1e-12);
        assert!(d[0].abs() < 0.01 && d[1].abs() < 0.01);
    }

    #[test]
    fn inverse_pair_on_pixel_centres() {
        let (w, h) = (64, 32);
        for y in 0..h {
            for x in 0..w {
                let (u, v) = dir_equirect(equirect_dir(x as f64, y as f64, w, h), w, h);
                assert!((u - x as f64).abs() < 1e-9 && (v - y as f64).abs() < 1e-9, "{x},{y} -> {u},{v}");
            }
        }
    }

    #[test]
    fn equator_rows_symmetric() {
        let (w, h) = (16, 8);
        let a = equirect_dir(3.0, (h / 2 - 1) as f64, w, h);
        let b = equirect_dir(3.0, (h / 2) as f64, w, h);
        assert_relative_eq!(a[2], -b[2], epsilon = 1e-15);
        assert_relative_eq!(a[0], b[0], epsilon = 1e-15);
    }

    #[test]
    fn stereographic_special_points() {
        assert_eq!(plane_to_sphere([0.0, 0.0], 1.0), Some([0.0, 0.0, 1.0]));
        let p = plane_to_sphere([0.6, 0.8], 1.0).unwrap();
        for (a, b) in p.iter().zip([0.6, 0.8, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(plane_to_sphere([1.0, 0.5], 1.0).is_none());
        // d < 1 still sends the unit circle to the equator.
        let p = plane_to_sphere([0.0, 1.0], 0.4).unwrap();
        assert!(p[2].abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plane_round_trip_any_offset() {
        for d in [0.3, 0.7, 1.0] {
            for c in [[0.1, -0.2], [0.5, 0.5], [-0.9, 0.1]] {
                let p = plane_to_sphere(c, d).unwrap();
                assert_relative_eq!(dot(p, p), 1.0, max_relative = 1e-12);
                let back = sphere_to_plane(p, d).unwrap();
                assert!((back[0] - c[0]).abs() < 1e-12 && (back[1] - c[1]).abs() < 1e-12);
            }
        }
    }

    fn gradient_pano(w: usize) -> HdrImage<f64> {
        HdrImage::from_fn(w, w / 2, |x, y| [1.0 + x as f64 * 0.01, 1.0 + y as f64 * 0.02, 0.5]).unwrap()
    }

    #[test]
    fn ceiling_centre_is_zenith() {
        let pano = gradient_pano(64);
        let proj = PanoProjection { ceil_size: 33, ..PanoProjection::new(64).unwrap() };
        let ceil = p2c(&pano, &proj).unwrap();
        let (x, y) = dir_equirect([0.0, 0.0, 1.0], 64, 32);
        let expect = sample_pano(&pano, x, y);
        assert_eq!(ceil.pixel(16, 16), expect);
    }

    #[test]
    fn constant_pano_gives_constant_disk() {
        let pano = HdrImage::filled(64, 32, [2.0f64, 3.0, 4.0]).unwrap();
        let proj = PanoProjection::new(64).unwrap();
        let ceil = p2c(&pano, &proj).unwrap();
        for j in 0..proj.ceil_size {
            for i in 0..proj.ceil_size {
                let px = ceil.pixel(i, j);
                if proj.p2c_source(i, j).is_some() {
                    for (a, b) in px.iter().zip([2.0, 3.0, 4.0]) {
                        assert_relative_eq!(*a, b, max_relative = 1e-14);
                    }
                } else {
                    assert_eq!(px, [0.0; 3]);
                }
            }
        }
        // Corners lie outside the disk.
        assert_eq!(ceil.pixel(0, 0), [0.0; 3]);
    }

    #[test]
    fn c2p_zero_below_equator() {
        let proj = PanoProjection::new(64).unwrap();
        let ceil = HdrImage::filled(64, 64, [1.0f64; 3]).unwrap();
        let (pano, valid) = c2p(&ceil, &proj).unwrap();
        for y in 16..32 {
            for x in 0..64 {
                assert_eq!(pano.pixel(x, y), [0.0; 3]);
                assert_eq!(valid.get(x, y), 0);
            }
        }
        for x in 0..64 {
            assert_eq!(valid.get(x, 0), 1);
        }
    }

    #[test]
    fn c2p_zenith_reads_centre() {
        let proj = PanoProjection { ceil_size: 9, ..PanoProjection::new(2048).unwrap() };
        let ceil = HdrImage::from_fn(9, 9, |i, j| if i == 4 && j == 4 { [7.0; 3] } else { [1.0; 3] }).unwrap();
        let (pano, _) = c2p(&ceil, &proj).unwrap();
        // The top row sits 1/2048 of a half-turn from the pole: almost the
        // centre texel.
        assert!(pano.pixel(0, 0)[0] > 6.9);
    }

    #[test]
    fn sample_positions_rotate_with_roll() {
        let proj = PanoProjection { ceil_size: 32, ..PanoProjection::new(64).unwrap() };
        let n = proj.ceil_size;
        for j in 0..n {
            for i in 0..n {
                // Rotating the ceiling by 90 degrees about its centre moves
                // pixel (i, j) to (n - 1 - j, i) and subtracts pi / 2 from azimuth.
                let (Some((x0, y0)), Some((x1, y1))) = (proj.p2c_source(i, j), proj.p2c_source(n - 1 - j, i)) else {
                    assert_eq!(proj.p2c_source(i, j).is_none(), proj.p2c_source(n - 1 - j, i).is_none());
                    continue;
                };
                let dx = (x1 - x0 + 16.0).rem_euclid(64.0);
                assert!(dx < 1e-9 || 64.0 - dx < 1e-9, "({i},{j}): {x0} -> {x1}");
                assert!((y1 - y0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn merge_weight_examples() {
        assert_eq!(merge_weight(0.13, 0.13), 0.0);
        assert_eq!(merge_weight(1.0, 0.13), 1.0);
        assert!((merge_weight(0.565, 0.13) - 0.5).abs() < 1e-12);
        assert_eq!(merge_weight(0.05, 0.13), 0.0);
    }

    #[test]
    fn merge_identities() {
        let proj = PanoProjection::new(32).unwrap();
        let h_p = gradient_pano(32);
        let h_c = HdrImage::from_fn(32, 32, |i, j| [i as f64 * 0.1, j as f64, 3.0]).unwrap();
        let zero = MergeMask { weights: Plane::filled(32, 16, 0.0).unwrap(), tau: 0.13 };
        assert_eq!(merge_panorama(&h_c, &h_p, &zero, &proj).unwrap(), h_p);

        let one = MergeMask { weights: Plane::filled(32, 16, 1.0).unwrap(), tau: 0.13 };
        let (from_ceil, valid) = c2p(&h_c, &proj).unwrap();
        let merged = merge_panorama(&h_c, &h_p, &one, &proj).unwrap();
        for y in 0..16 {
            for x in 0..32 {
                if valid.get(x, y) == 1 {
                    assert_eq!(merged.pixel(x, y), from_ceil.pixel(x, y));
                }
            }
        }

        let black = HdrImage::filled(32, 16, [0.0; 3]).unwrap();
        let half = MergeMask { weights: Plane::filled(32, 16, 0.5).unwrap(), tau: 0.13 };
        let merged = merge_panorama(&h_c, &black, &half, &proj).unwrap();
        for (a, b) in merged.data().iter().zip(from_ceil.data()) {
            assert_eq!(*a, 0.5 * b);
        }
    }

    #[test]
    fn merge_mask_in_unit_range() {
        let proj = PanoProjection::new(32).unwrap();
        let ldr = LinearLdr::from_fn(32, 32, |i, j| [((i * j) % 7) as f64 / 6.0, i as f64 / 31.0, 1.0]).unwrap();
        let m = merge_mask(&ldr, &proj, DEFAULT_MERGE_TAU).unwrap();
        assert!(m.weights.data().iter().all(|&w| (0.0..=1.0).contains(&w)));
        assert!(m.weights.data().iter().any(|&w| w > 0.0));
    }

    #[test]
    fn crop_forward_centre() {
        let pano = gradient_pano(64);
        let view = View { yaw: 0.0, pitch: 0.0, hfov: 1.0 };
        let crop = crop_perspective(&pano, &view, 5, 3).unwrap();
        let (x, y) = dir_equirect([1.0, 0.0, 0.0], 64, 32);
        let expect = sample_pano(&pano, x, y);
        for (a, b) in crop.pixel(2, 1).iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn crop_yaw_half_turn_matches_roll() {
        let pano = HdrImage::from_fn(64, 32, |x, y| [((x * 7 + y * 3) % 11) as f64, (x % 5) as f64, 1.0]).unwrap();
        let rolled = pano.roll_columns(32);
        let a = crop_perspective(&pano, &View { yaw: std::f64::consts::PI, pitch: 0.2, hfov: 1.2 }, 16, 12).unwrap();
        let b = crop_perspective(&rolled, &View { yaw: 0.0, pitch: 0.2, hfov: 1.2 }, 16, 12).unwrap();
        for (p, q) in a.data().iter().zip(b.data()) {
            assert!((p - q).abs() < 1e-6);
        }
    }

    #[test]
    fn crop_set_counts() {
        let pano = HdrImage::filled(64, 32, [0.25f64; 3]).unwrap();
        let scheme = CropScheme { width: 16, ..CropScheme::default() };
        let crops = crop_set(&pano, &scheme).unwrap();
        assert_eq!(crops.len(), 9);
        assert!(crops.iter().all(|c| c.image.dims() == (16, 12)));
        assert!(crops.iter().all(|c| c.image.data().iter().all(|&v| (v - 0.25).abs() < 1e-15)));
        let outdoor = crop_set(&pano, &CropScheme { outdoor: true, ..scheme }).unwrap();
        assert_eq!(outdoor.len(), 6);
        assert!(outdoor.iter().all(|c| c.pitch_deg == 0.0));
    }

    #[test]
    fn projection_validation() {
        assert!(PanoProjection::new(0).is_err());
        let bad = PanoProjection { camera_offset: 1.5, ..PanoProjection::new(8).unwrap() };
        assert!(bad.validate().is_err());
        let bad = PanoProjection { pano_height: 3, ..PanoProjection::new(8).unwrap() };
        assert!(bad.validate().is_err());
    }
}
