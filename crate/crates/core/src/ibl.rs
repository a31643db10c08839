//! Small environment-lit renderer for scoring panoramas by what they light.
//!
//! A scene is a handful of spheres over an optional diffuse ground plane
//! (`z = 0`), seen by an orthographic camera that looks along `-y` (tilted
//! down by `pitch_deg`). Shading is local only: no shadows and no
//! interreflection.
//!
//! * Diffuse: `albedo * E(n) / pi`, with `E` the direct sum over
//!   environment texels of `L max(0, n . w) dOmega`,
//!   `dOmega = (2 pi / W)(pi / H) sin theta`. Rendering looks `E` up in a
//!   64x32 table of normals built the same way.
//! * Mirror: bilinear environment lookup along the reflected ray.
//! * Glossy: average of `N x N` lookups on a fixed stratified grid over a
//!   normalized `cos^k` lobe about the reflected ray
//!   (`cos a = u1^(1 / (k + 1))`, `b = 2 pi u2`, `u = (i + 0.5) / N`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::calibrate_hdr;
use crate::error::{Error, Result};
use crate::image::{ensure_same_dims, exposure_preview, HdrImage, LdrImage, LinearLdr, RgbImage, DEFAULT_WINDOW_EV};
use crate::losses::DEFAULT_EPSILON;
use crate::metrics::{log_psnr, mse, ssim};
use crate::pano::{dir_equirect, equirect_dir, sample_pano};
use crate::scalar::{CompensatedSum, Scalar};

type Vec3 = [f64; 3];

pub const IRRADIANCE_MAP_WIDTH: usize = 64;
pub const DEFAULT_GLOSSY_SAMPLES: usize = 16;

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn normalize(v: Vec3) -> Vec3 {
    scale(v, 1.0 / dot(v, v).sqrt())
}

fn reflect(d: Vec3, n: Vec3) -> Vec3 {
    add(d, scale(n, -2.0 * dot(d, n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Material {
    Diffuse { albedo: [f64; 3] },
    Mirror,
    Glossy { exponent: f64, albedo: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sphere {
    pub center: [f64; 3],
    pub radius: f64,
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ground {
    pub albedo: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrthoCamera {
    pub width: usize,
    pub height: usize,
    /// World position of the image centre.
    pub center: [f64; 3],
    /// Half the world-space width covered by the image.
    pub half_width: f64,
    /// Downward tilt of the view direction in degrees.
    #[serde(default)]
    pub pitch_deg: f64,
}

impl OrthoCamera {
    fn frame(&self) -> (Vec3, Vec3, Vec3) {
        let (s, c) = self.pitch_deg.to_radians().sin_cos();
        let forward = [0.0, -c, -s];
        let up = [0.0, -s, c];
        let right = [-1.0, 0.0, 0.0];
        (forward, right, up)
    }
}

fn default_true() -> bool {
    true
}

fn default_glossy_samples() -> usize {
    DEFAULT_GLOSSY_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub camera: OrthoCamera,
    #[serde(default)]
    pub spheres: Vec<Sphere>,
    #[serde(default)]
    pub ground: Option<Ground>,
    /// Show the environment behind the scene; black otherwise.
    #[serde(default = "default_true")]
    pub background: bool,
    /// Glossy lobe grid is `glossy_samples x glossy_samples`.
    #[serde(default = "default_glossy_samples")]
    pub glossy_samples: usize,
}

fn check_albedo(a: [f64; 3], what: &str) -> Result<()> {
    if a.iter().all(|v| (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(Error::Scene(format!("{what} albedo must lie in [0, 1], got {a:?}")))
    }
}

impl SceneConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let scene: Self = toml::from_str(s).map_err(|e| Error::Scene(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Scene(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cam = &self.camera;
        if cam.width == 0 || cam.height == 0 {
            return Err(Error::Scene("camera dimensions must be positive".into()));
        }
        if !(cam.half_width > 0.0 && cam.half_width.is_finite()) {
            return Err(Error::Scene(format!("camera half_width must be > 0, got {}", cam.half_width)));
        }
        if !cam.center.iter().all(|v| v.is_finite()) || !(cam.pitch_deg.abs() < 90.0) {
            return Err(Error::Scene("camera centre must be finite and |pitch| < 90".into()));
        }
        if self.glossy_samples == 0 {
            return Err(Error::Scene("glossy_samples must be at least 1".into()));
        }
        for (k, s) in self.spheres.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                return Err(Error::Scene(format!("sphere {k}: radius must be > 0, got {}", s.radius)));
            }
            if !s.center.iter().all(|v| v.is_finite()) {
                return Err(Error::Scene(format!("sphere {k}: centre must be finite")));
            }
            match s.material {
                Material::Diffuse { albedo } => check_albedo(albedo, &format!("sphere {k}"))?,
                Material::Mirror => {}
                Material::Glossy { exponent, albedo } => {
                    if !(exponent >= 1.0 && exponent.is_finite()) {
                        return Err(Error::Scene(format!("sphere {k}: glossy exponent must be >= 1, got {exponent}")));
                    }
                    check_albedo(albedo, &format!("sphere {k}"))?;
                }
            }
        }
        if let Some(g) = self.ground {
            check_albedo(g.albedo, "ground")?;
        }
        Ok(())
    }

    /// Four balls on a grey floor: diffuse white, mirror, glossy, diffuse
    /// dark.
    pub fn default_scene() -> Self {
        let ball = |x: f64, material| Sphere {
            center: [x, 0.0, 0.5],
            radius: 0.5,
            material,
        };
        Self {
            camera: OrthoCamera {
                width: 256,
                height: 128,
                center: [0.0, 0.0, 0.6],
                half_width: 2.6,
                pitch_deg: 20.0,
            },
            spheres: vec![
                ball(-1.8, Material::Diffuse { albedo: [0.8; 3] }),
                ball(-0.6, Material::Mirror),
                ball(0.6, Material::Glossy { exponent: 50.0, albedo: [0.9; 3] }),
                ball(1.8, Material::Diffuse { albedo: [0.2, 0.2, 0.2] }),
            ],
            ground: Some(Ground { albedo: [0.5; 3] }),
            background: true,
            glossy_samples: DEFAULT_GLOSSY_SAMPLES,
        }
    }
}

/// Texel directions and `L dOmega` of an environment.
struct EnvTexels {
    dirs: Vec<Vec3>,
    weighted: Vec<Vec3>,
}

impl EnvTexels {
    fn new<T: Scalar>(env: &HdrImage<T>) -> Self {
        let (w, h) = env.dims();
        let band = (std::f64::consts::TAU / w as f64) * (std::f64::consts::PI / h as f64);
        let mut dirs = Vec::with_capacity(w * h);
        let mut weighted = Vec::with_capacity(w * h);
        for y in 0..h {
            let theta = std::f64::consts::PI * (y as f64 + 0.5) / h as f64;
            let d_omega = band * theta.sin();
            for x in 0..w {
                let l = env.pixel(x, y);
                dirs.push(equirect_dir(x as f64, y as f64, w, h));
                weighted.push([l[0].as_f64() * d_omega, l[1].as_f64() * d_omega, l[2].as_f64() * d_omega]);
            }
        }
        Self { dirs, weighted }
    }

    fn irradiance(&self, n: Vec3) -> Vec3 {
        let mut acc = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
        for (d, lw) in self.dirs.iter().zip(&self.weighted) {
            let c = dot(n, *d);
            if c > 0.0 {
                for k in 0..3 {
                    acc[k].add(lw[k] * c);
                }
            }
        }
        [acc[0].value(), acc[1].value(), acc[2].value()]
    }
}

fn check_env<T>(env: &HdrImage<T>) -> Result<()> {
    let (w, h) = env.dims();
    if w == 0 || w != 2 * h {
        return Err(Error::InvalidImage(format!("environment must be a 2:1 panorama, got {w}x{h}")));
    }
    Ok(())
}

/// Irradiance `E(n)` by direct summation over the environment texels.
pub fn diffuse_irradiance<T: Scalar>(normal: [f64; 3], env: &HdrImage<T>) -> Result<[f64; 3]> {
    check_env(env)?;
    Ok(EnvTexels::new(env).irradiance(normalize(normal)))
}

/// Outgoing radiance `albedo * E(n) / pi` of a Lambertian surface.
pub fn diffuse_radiance<T: Scalar>(normal: [f64; 3], albedo: [f64; 3], env: &HdrImage<T>) -> Result<[f64; 3]> {
    let e = diffuse_irradiance(normal, env)?;
    Ok([0, 1, 2].map(|k| albedo[k] * e[k] / std::f64::consts::PI))
}

/// Irradiance tabulated over an equirectangular grid of normals.
#[derive(Debug, Clone)]
pub struct IrradianceMap {
    table: HdrImage<f64>,
}

impl IrradianceMap {
    pub fn new<T: Scalar>(env: &HdrImage<T>, width: usize) -> Result<Self> {
        check_env(env)?;
        if width < 2 || width % 2 != 0 {
            return Err(Error::InvalidParameter(format!("irradiance map width must be even and >= 2, got {width}")));
        }
        let height = width / 2;
        let texels = EnvTexels::new(env);
        let data: Vec<f64> = (0..width * height)
            .into_par_iter()
            .flat_map_iter(|i| texels.irradiance(equirect_dir((i % width) as f64, (i / width) as f64, width, height)))
            .collect();
        Ok(Self {
            table: HdrImage::new(width, height, data)?,
        })
    }

    pub fn lookup(&self, n: Vec3) -> Vec3 {
        let (w, h) = self.table.dims();
        let (x, y) = dir_equirect(n, w, h);
        sample_pano(&self.table, x, y)
    }
}

fn intersect_sphere(o: Vec3, d: Vec3, s: &Sphere) -> Option<f64> {
    // Unit d; the orthographic camera sees the whole line, so both roots
    // count and the nearer one along d wins.
    let oc = add(o, scale(s.center, -1.0));
    let b = dot(oc, d);
    let c = dot(oc, oc) - s.radius * s.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

struct Shader<'a> {
    env: HdrImage<f64>,
    irradiance: IrradianceMap,
    ground_e: Vec3,
    scene: &'a SceneConfig,
}

impl Shader<'_> {
    fn env_lookup(&self, d: Vec3) -> Vec3 {
        let (w, h) = self.env.dims();
        let (x, y) = dir_equirect(d, w, h);
        sample_pano(&self.env, x, y)
    }

    fn glossy(&self, r: Vec3, exponent: f64, albedo: [f64; 3]) -> Vec3 {
        let helper = if r[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let t1 = normalize(cross(helper, r));
        let t2 = cross(r, t1);
        let n = self.scene.glossy_samples;
        let mut acc = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
        for i in 0..n {
            let cos_a = ((i as f64 + 0.5) / n as f64).powf(1.0 / (exponent + 1.0));
            let sin_a = (1.0 - cos_a * cos_a).max(0.0).sqrt();
            for j in 0..n {
                let (sb, cb) = (std::f64::consts::TAU * (j as f64 + 0.5) / n as f64).sin_cos();
                let d = add(scale(r, cos_a), add(scale(t1, sin_a * cb), scale(t2, sin_a * sb)));
                let l = self.env_lookup(d);
                for k in 0..3 {
                    acc[k].add(l[k]);
                }
            }
        }
        let count = (n * n) as f64;
        [0, 1, 2].map(|k| albedo[k] * acc[k].value() / count)
    }

    fn shade(&self, o: Vec3, d: Vec3) -> Vec3 {
        let mut best: Option<(f64, usize)> = None;
        for (k, s) in self.scene.spheres.iter().enumerate() {
            if let Some(t) = intersect_sphere(o, d, s) {
                if best.map_or(true, |(bt, _)| t < bt) {
                    best = Some((t, k));
                }
            }
        }
        if let Some(g) = self.scene.ground {
            if d[2] < 0.0 {
                let t = -o[2] / d[2];
                if best.map_or(true, |(bt, _)| t < bt) {
                    return [0, 1, 2].map(|k| g.albedo[k] * self.ground_e[k] / std::f64::consts::PI);
                }
            }
        }
        let Some((t, k)) = best else {
            return if self.scene.background { self.env_lookup(d) } else { [0.0; 3] };
        };
        let s = &self.scene.spheres[k];
        let n = normalize(add(add(o, scale(d, t)), scale(s.center, -1.0)));
        match s.material {
            Material::Diffuse { albedo } => {
                let e = self.irradiance.lookup(n);
                [0, 1, 2].map(|c| albedo[c] * e[c] / std::f64::consts::PI)
            }
            Material::Mirror => self.env_lookup(reflect(d, n)),
            Material::Glossy { exponent, albedo } => self.glossy(normalize(reflect(d, n)), exponent, albedo),
        }
    }
}

/// Renders the scene under the environment. Deterministic; rows are shaded
/// independently in parallel.
pub fn render<T: Scalar>(scene: &SceneConfig, env: &HdrImage<T>) -> Result<HdrImage<T>> {
    scene.validate()?;
    check_env(env)?;
    let env64 = env.cast::<f64>()?;
    let texels = EnvTexels::new(&env64);
    let shader = Shader {
        irradiance: IrradianceMap::new(&env64, IRRADIANCE_MAP_WIDTH)?,
        ground_e: texels.irradiance([0.0, 0.0, 1.0]),
        env: env64,
        scene,
    };
    let cam = &scene.camera;
    let (forward, right, up) = cam.frame();
    let (w, h) = (cam.width, cam.height);
    let pixel = 2.0 * cam.half_width / w as f64;
    let mut data = vec![T::zero(); w * h * 3];
    data.par_chunks_mut(w * 3).enumerate().for_each(|(j, row)| {
        let v = (0.5 * h as f64 - (j as f64 + 0.5)) * pixel;
        for i in 0..w {
            let u = (i as f64 + 0.5 - 0.5 * w as f64) * pixel;
            let o = add(cam.center, add(scale(right, u), scale(up, v)));
            let c = shader.shade(o, forward);
            for k in 0..3 {
                row[i * 3 + k] = T::lit(c[k]);
            }
        }
    });
    HdrImage::new(w, h, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderComparison {
    pub mse: f64,
    pub log_psnr: f64,
    pub ssim: f64,
}

/// Compares render `a` against reference `b`: linear MSE, log PSNR, and SSIM
/// of previews exposed so that `b` has mean 0.18.
pub fn compare_renders<T: Scalar>(a: &HdrImage<T>, b: &HdrImage<T>) -> Result<RenderComparison> {
    ensure_same_dims(a, b)?;
    let mean = b.mean_value();
    let ev = if mean > 0.0 { (0.18 / mean).log2() } else { 0.0 };
    let pa: LdrImage = exposure_preview(a, ev, DEFAULT_WINDOW_EV)?;
    let pb = exposure_preview(b, ev, DEFAULT_WINDOW_EV)?;
    Ok(RenderComparison {
        mse: mse(a, b)?,
        log_psnr: log_psnr(a, b, DEFAULT_EPSILON)?,
        ssim: ssim(&pa, &pb)?,
    })
}

/// Renders of both panoramas after calibrating them against the linear LDR
/// panorama, prediction first.
pub fn ibl_renders<T: Scalar>(
    pred: &HdrImage<T>,
    gt: &HdrImage<T>,
    ldr: &LinearLdr<T>,
    scene: &SceneConfig,
    tau: f64,
) -> Result<(HdrImage<T>, HdrImage<T>)> {
    let pred = calibrate_hdr(pred, ldr, tau)?.calibrated;
    let gt = calibrate_hdr(gt, ldr, tau)?.calibrated;
    Ok((render(scene, &pred)?, render(scene, &gt)?))
}

/// Calibrates both panoramas against the LDR panorama, renders the scene
/// under each, and compares the prediction's render with the reference's.
pub fn eval_ibl<T: Scalar>(
    pred: &HdrImage<T>,
    gt: &HdrImage<T>,
    ldr: &LinearLdr<T>,
    scene: &SceneConfig,
    tau: f64,
) -> Result<RenderComparison> {
    let (a, b) = ibl_renders(pred, gt, ldr, scene, tau)?;
    compare_renders(&a, &b)
}
