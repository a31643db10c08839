//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hdrcal::calibration::{calibrate_hdr, overexposure_mask, DEFAULT_TAU};
use hdrcal::camera::{derive_seed, sample_camera, synth_ldr, CameraSample, ResponseCurve, DEFAULT_TARGET_MEAN};
use hdrcal::ibl::{render, Material, SceneConfig, Sphere};
use hdrcal::image::{linear_to_srgb, srgb_decode, srgb_encode, srgb_to_linear, quantize_unit};
use hdrcal::io::rgbe::{decode_pixel, encode_pixel};
use hdrcal::io::{read_pfm, read_rgbe, write_pfm, write_ppm, write_rgbe};
use hdrcal::losses::{log_differences, pano_loss, si_loss, LossConfig};
use hdrcal::pano::{c2p, equirect_dir, merge_mask, merge_panorama, merge_weight, p2c, plane_to_sphere, sphere_to_plane, MergeMask, PanoProjection};
use hdrcal::{HdrImage, LinearLdr, Plane, RgbImage};

type Outcome = Result<String, String>;

/// Uniform in [0, 1) from a hashed counter.
struct Stream {
    seed: u64,
    i: u64,
}

impl Stream {
    fn new(seed: u64) -> Self {
        Self { seed, i: 0 }
    }

    fn unit(&mut self) -> f64 {
        self.i += 1;
        (derive_seed(self.seed, self.i) >> 11) as f64 * (-53f64).exp2()
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn log_range(&mut self, lo: f64, hi: f64) -> f64 {
        self.range(lo.ln(), hi.ln()).exp()
    }
}

/// Random HDR with mild colour and a few bright spots.
fn random_hdr(rng: &mut Stream, w: usize, h: usize) -> HdrImage<f64> {
    HdrImage::from_fn(w, h, |_, _| {
        let base = if rng.unit() < 0.05 { rng.log_range(20.0, 2000.0) } else { rng.log_range(0.01, 5.0) };
        [base * rng.range(0.85, 1.15), base * rng.range(0.85, 1.15), base * rng.range(0.85, 1.15)]
    })
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.2?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn calibration_scale_invariance() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream::new(1);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let h = random_hdr(&mut rng, 32, 24);
        let (ldr, _) = synth_ldr(&h, &sample_camera(k), DEFAULT_TARGET_MEAN).map_err(|e| e.to_string())?;
        let i = srgb_to_linear::<f64>(&ldr);
        let base = calibrate_hdr(&h, &i, DEFAULT_TAU).map_err(|e| e.to_string())?;
        for kappa in [1e-3, 1.0, 1e3] {
            let c = calibrate_hdr(&h.scaled(kappa).unwrap(), &i, DEFAULT_TAU).map_err(|e| e.to_string())?;
            for (a, b) in c.calibrated.data().iter().zip(base.calibrated.data()) {
                worst = worst.max(rel(*a, *b));
            }
        }
    }
    check(worst <= 1e-6, || format!("max relative difference {worst:e}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("50 pairs x 3 scales, max rel diff {worst:.1e}, {:.2?}", start.elapsed()))
}

fn calibration_synthesis_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream::new(2);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for k in 0..50 {
        let h = random_hdr(&mut rng, 32, 24);
        let sample = CameraSample {
            crf: ResponseCurve::Identity,
            ..sample_camera(k)
        };
        let (ldr, _) = synth_ldr(&h, &sample, DEFAULT_TARGET_MEAN).map_err(|e| e.to_string())?;
        let i = hdrcal::camera::dequantize::<f64>(&ldr);
        let cal = calibrate_hdr(&h, &i, DEFAULT_TAU).map_err(|e| e.to_string())?;
        let mask = overexposure_mask(&i, DEFAULT_TAU).map_err(|e| e.to_string())?;
        for ((&m, c), l) in mask.mask.data().iter().zip(cal.calibrated.data().chunks_exact(3)).zip(i.data().chunks_exact(3)) {
            if m == 1 {
                checked += 1;
                for ch in 0..3 {
                    worst = worst.max((c[ch] - l[ch]).abs());
                }
            }
        }
    }
    let limit = 1.0 / 255.0 + 1e-6;
    check(worst <= limit, || format!("max abs difference {worst:e} > {limit:e}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("{checked} masked pixels, max abs diff {worst:.2e} (limit {limit:.2e}), {:.2?}", start.elapsed()))
}

/// Golden-section minimum of mean((t + d)^2) over t = ln kappa.
fn golden_min(d: &[f64]) -> f64 {
    let f = |t: f64| d.iter().map(|v| (t + v) * (t + v)).sum::<f64>() / d.len() as f64;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-(1e6f64.ln()), 1e6f64.ln());
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > 1e-10 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    f(0.5 * (a + b))
}

fn closed_form_kappa() -> Outcome {
    let start = Instant::now();
    let mut rng = Stream::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_hdr(&mut rng, 16, 16);
        let g = random_hdr(&mut rng, 16, 16);
        let eps = 1e-6;
        let d = log_differences(&p, &g, eps).map_err(|e| e.to_string())?;
        let closed = si_loss(&p, &g, eps).map_err(|e| e.to_string())?;
        worst = worst.max((closed - golden_min(&d)).abs());
    }
    check(worst <= 1e-6, || format!("max difference {worst:e}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("100 pairs, max |closed - golden| {worst:.1e}, {:.2?}", start.elapsed()))
}

fn loss_scale_invariance() -> Outcome {
    let mut rng = Stream::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_hdr(&mut rng, 16, 16);
        let g = random_hdr(&mut rng, 16, 16);
        for kappa in [1e-3, 1e3] {
            let floor = p.data().iter().chain(g.data()).fold(f64::INFINITY, |m, &v| m.min(v)) * f64::min(kappa, 1.0);
            let eps = 1e-12 * floor;
            let base = si_loss(&p, &g, eps).map_err(|e| e.to_string())?;
            let scaled = si_loss(&p.scaled(kappa).unwrap(), &g, eps).map_err(|e| e.to_string())?;
            worst = worst.max((scaled - base).abs());
        }
    }
    check(worst < 1e-9, || format!("max change {worst:e}"))?;
    Ok(format!("100 pairs x 2 scales, max |change| {worst:.1e}"))
}

fn hand_oracles() -> Outcome {
    let i = LinearLdr::new(2, 1, vec![0.2, 0.2, 0.2, 1.0, 1.0, 1.0]).unwrap();
    let h = HdrImage::new(2, 1, vec![0.4, 0.4, 0.4, 8.0, 8.0, 8.0]).unwrap();
    let scale = calibrate_hdr(&h, &i, DEFAULT_TAU).map_err(|e| e.to_string())?.scale_factor;
    let e2 = 2f64.exp();
    let pred = HdrImage::new(2, 1, vec![1.0, 1.0, 1.0, e2, e2, e2]).unwrap();
    let gt = HdrImage::filled(2, 1, [1.0; 3]).unwrap();
    let si = si_loss(&pred, &gt, 1e-300).map_err(|e| e.to_string())?;
    let m = merge_weight(0.565, 0.13);
    let crf = ResponseCurve::parametric(0.3, 1.0).map_err(|e| e.to_string())?.eval(0.5f64);
    let got = [("scale", scale, 0.5), ("si_loss", si, 1.0), ("merge", m, 0.5), ("crf", crf, 0.8125)];
    for (name, v, want) in got {
        check((v - want).abs() <= 1e-12, || format!("{name}: {v} != {want}"))?;
    }
    Ok("scale 0.5, si_loss 1.0, merge mask 0.5, CRF 0.8125".into())
}

fn band_limited_pano(w: usize) -> HdrImage<f64> {
    HdrImage::from_fn(w, w / 2, |x, y| {
        let d = equirect_dir(x as f64, y as f64, w, w / 2);
        [
            2.0 + 0.5 * d[0] + 0.3 * d[2],
            2.0 + 0.4 * d[1] * d[2] - 0.2 * d[0] * d[1],
            2.0 + 0.6 * d[2] + 0.3 * (d[0] * d[0] - d[1] * d[1]),
        ]
    })
    .unwrap()
}

fn p2c_round_trip() -> Outcome {
    let pano = band_limited_pano(512);
    let proj = PanoProjection::new(512).map_err(|e| e.to_string())?;
    let ceil = p2c(&pano, &proj).map_err(|e| e.to_string())?;
    let (back, valid) = c2p(&ceil, &proj).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for y in 0..256 {
        for x in 0..512 {
            if valid.get(x, y) == 1 {
                n += 1;
                for (a, b) in back.pixel(x, y).iter().zip(pano.pixel(x, y)) {
                    worst = worst.max(rel(*a, b));
                }
            }
        }
    }
    check(n > 0 && worst <= 0.02, || format!("max relative error {worst:e} over {n} pixels"))?;
    let mut analytic: f64 = 0.0;
    let cases = [([0.0, 0.0], [0.0, 0.0, 1.0]), ([1.0, 0.0], [1.0, 0.0, 0.0]), ([0.0, -1.0], [0.0, -1.0, 0.0])];
    for (c, p) in cases {
        let s = plane_to_sphere(c, 1.0).ok_or("analytic point rejected")?;
        let back = sphere_to_plane(p, 1.0).ok_or("analytic point rejected")?;
        for k in 0..3 {
            analytic = analytic.max((s[k] - p[k]).abs());
        }
        analytic = analytic.max((back[0] - c[0]).abs()).max((back[1] - c[1]).abs());
    }
    let mut rng = Stream::new(6);
    for _ in 0..1000 {
        let c = [rng.range(-0.7, 0.7), rng.range(-0.7, 0.7)];
        let rho2 = c[0] * c[0] + c[1] * c[1];
        let want = [2.0 * c[0] / (1.0 + rho2), 2.0 * c[1] / (1.0 + rho2), (1.0 - rho2) / (1.0 + rho2)];
        let got = plane_to_sphere(c, 1.0).ok_or("inside point rejected")?;
        for k in 0..3 {
            analytic = analytic.max((got[k] - want[k]).abs());
        }
    }
    check(analytic <= 1e-9, || format!("stereographic error {analytic:e}"))?;
    Ok(format!("{n} valid pixels, max rel err {:.2}%, stereographic err {analytic:.1e}", worst * 100.0))
}

fn merge_identities() -> Outcome {
    let proj = PanoProjection::new(128).map_err(|e| e.to_string())?;
    let mut rng = Stream::new(7);
    let h_p = random_hdr(&mut rng, 128, 64);
    let h_c = random_hdr(&mut rng, 128, 128);
    let zero = MergeMask {
        weights: Plane::filled(128, 64, 0.0).unwrap(),
        tau: 0.13,
    };
    let merged = merge_panorama(&h_c, &h_p, &zero, &proj).map_err(|e| e.to_string())?;
    check(merged == h_p, || "m = 0 is not the identity".into())?;
    for _ in 0..5 {
        let ldr = LinearLdr::from_fn(128, 128, |_, _| [rng.unit(), rng.unit(), rng.unit()]).unwrap();
        let m = merge_mask(&ldr, &proj, 0.13).map_err(|e| e.to_string())?;
        check(m.weights.data().iter().all(|w| (0.0..=1.0).contains(w)), || "mask outside [0, 1]".into())?;
    }
    let cfg = LossConfig::default();
    let swapped_cfg = LossConfig {
        beta_high: cfg.beta_low,
        beta_low: cfg.beta_high,
        ..cfg
    };
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = random_hdr(&mut rng, 16, 8);
        let g = random_hdr(&mut rng, 16, 8);
        let d = log_differences(&p, &g, cfg.epsilon).map_err(|e| e.to_string())?;
        let mean_d2 = d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64;
        let soft = Plane::new(16, 8, (0..128).map(|_| rng.unit()).collect()).unwrap();
        let hard = Plane::new(16, 8, (0..128).map(|_| if rng.unit() < 0.5 { 0.0 } else { 1.0 }).collect()).unwrap();
        for m in [&soft, &hard] {
            let inv = m.map(|v| 1.0 - v);
            let a = pano_loss(&p, &g, m, &cfg).map_err(|e| e.to_string())?;
            let b = pano_loss(&p, &g, &inv, &swapped_cfg).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
        let inv = hard.map(|v| 1.0 - v);
        let sum = pano_loss(&p, &g, &hard, &cfg).map_err(|e| e.to_string())? + pano_loss(&p, &g, &inv, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max((sum - (cfg.beta_high + cfg.beta_low) * mean_d2).abs());
    }
    check(worst <= 1e-9, || format!("mask-swap identity off by {worst:e}"))?;
    Ok(format!("m=0 bit-exact, m in [0,1], mask-swap identities within {worst:.1e}"))
}

fn codecs() -> Outcome {
    let mut rng = Stream::new(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1_000_000 {
        let top = rng.log_range(1e-30, 1e30);
        let px = [top * rng.unit(), top * rng.unit(), top];
        let back = decode_pixel(encode_pixel(px).map_err(|e| e.to_string())?);
        for k in 0..3 {
            worst = worst.max((back[k] - px[k]).abs() / top);
        }
    }
    let limit = (-7f64).exp2();
    check(worst <= limit, || format!("RGBE error {worst:e} > {limit:e}"))?;
    let img = random_hdr(&mut rng, 300, 7);
    let file = read_rgbe::<f64>(&write_rgbe(&img).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for (a, b) in file.data().iter().zip(img.data()) {
        let px_max = b.max(1e-300);
        check((a - b).abs() <= limit * px_max.max(*a) * 2.0, || format!("file round trip {a} vs {b}"))?;
    }
    let f32img: HdrImage<f32> = random_hdr(&mut rng, 33, 17).cast().map_err(|e| e.to_string())?;
    let pfm = read_pfm::<f32>(&write_pfm(&f32img).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    check(
        pfm.data().iter().zip(f32img.data()).all(|(a, b)| a.to_bits() == b.to_bits()),
        || "PFM round trip is not bit-exact".into(),
    )?;
    for code in 0..=255u8 {
        let back = quantize_unit(srgb_encode(srgb_decode(code as f64 / 255.0)));
        check(back == code, || format!("sRGB code {code} -> {back}"))?;
    }
    Ok(format!("1e6 RGBE pixels max err {worst:.2e} (limit {limit:.2e}), PFM bit-exact, 256 sRGB codes exact"))
}

fn ibl_analytic() -> Outcome {
    let start = Instant::now();
    let l0 = 1.7;
    let env = HdrImage::filled(512, 256, [l0; 3]).unwrap();
    let mut scene = SceneConfig::default_scene();
    scene.ground = None;
    scene.background = false;
    scene.camera.width = 96;
    scene.camera.height = 48;
    scene.camera.pitch_deg = 0.0;
    scene.camera.center = [0.0, 0.0, 1.0];
    scene.spheres = vec![
        Sphere {
            center: [-1.2, 0.0, 1.0],
            radius: 0.9,
            material: Material::Diffuse { albedo: [0.7, 0.5, 0.3] },
        },
        Sphere {
            center: [1.2, 0.0, 1.0],
            radius: 0.9,
            material: Material::Mirror,
        },
    ];
    let img = render(&scene, &env).map_err(|e| e.to_string())?;
    let (w, h) = img.dims();
    let mut diffuse_worst: f64 = 0.0;
    let (mut nd, mut nm) = (0, 0);
    for y in 0..h {
        for x in 0..w {
            let p = img.pixel(x, y);
            if p == [0.0; 3] {
                continue;
            }
            // Camera right is -x: the left half of the image shows the mirror.
            if x < w / 2 {
                nm += 1;
                check(p == [l0; 3], || format!("mirror pixel {p:?}"))?;
            } else {
                nd += 1;
                for (v, a) in p.iter().zip([0.7, 0.5, 0.3]) {
                    diffuse_worst = diffuse_worst.max(rel(*v, a * l0));
                }
            }
        }
    }
    check(nd > 0 && nm > 0, || "spheres not visible".into())?;
    check(diffuse_worst <= 0.01, || format!("diffuse error {:.3}%", diffuse_worst * 100.0))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!(
        "diffuse max rel err {:.4}% over {nd} px, mirror exact over {nm} px, {:.2?}",
        diffuse_worst * 100.0,
        start.elapsed()
    ))
}

fn hdrcal_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hdrcal"))
}

fn run_json(args: &[&str]) -> Result<serde_json::Value, String> {
    let out = hdrcal_bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn end_to_end_ordering() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (w, h) = (256, 128);
    let gt = HdrImage::from_fn(w, h, |x, y| {
        let d = equirect_dir(x as f64, y as f64, w, h);
        let sun = if d[2] > 0.97 { 800.0 } else { 0.0 };
        let sky = 0.4 + 0.3 * d[2].max(0.0);
        let floor = if d[2] < 0.0 { 0.15 + 0.05 * (x % 16) as f64 / 16.0 } else { 0.0 };
        [sky + sun + floor, sky * 0.9 + sun * 0.95 + floor, sky * 1.2 + sun * 0.9 + floor]
    })
    .unwrap();
    let ldr = linear_to_srgb(&gt.clamp_unit());
    let clipped = srgb_to_linear::<f64>(&ldr).to_hdr();
    let paths = ["gt.hdr", "clipped.hdr", "ldr.ppm", "scene.toml"].map(|n| dir.path().join(n));
    std::fs::write(&paths[0], write_rgbe(&gt).unwrap()).map_err(|e| e.to_string())?;
    std::fs::write(&paths[1], write_rgbe(&clipped).unwrap()).map_err(|e| e.to_string())?;
    std::fs::write(&paths[2], write_ppm(&ldr)).map_err(|e| e.to_string())?;
    let mut scene = SceneConfig::default_scene();
    scene.camera.width = 128;
    scene.camera.height = 64;
    std::fs::write(&paths[3], scene.to_toml_string().unwrap()).map_err(|e| e.to_string())?;
    let good = run_json(&["eval-ibl", s(&paths[0]), s(&paths[0]), s(&paths[2]), s(&paths[3])])?;
    let bad = run_json(&["eval-ibl", s(&paths[1]), s(&paths[0]), s(&paths[2]), s(&paths[3])])?;
    let f = |v: &serde_json::Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
    let (gm, bm, gs, bs) = (f(&good, "mse"), f(&bad, "mse"), f(&good, "ssim"), f(&bad, "ssim"));
    check(gm < bm && gs > bs, || format!("gt mse {gm:e} ssim {gs:.4}; clipped mse {bm:e} ssim {bs:.4}"))?;
    Ok(format!("GT: mse {gm:.2e}, ssim {gs:.4}; clipped LDR: mse {bm:.2e}, ssim {bs:.4}"))
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let src = dir.path().join("src");
    std::fs::create_dir(&src).map_err(|e| e.to_string())?;
    let mut rng = Stream::new(11);
    for k in 0..6 {
        let img = random_hdr(&mut rng, 40 + k, 30);
        std::fs::write(src.join(format!("h{k}.hdr")), write_rgbe(&img).unwrap()).map_err(|e| e.to_string())?;
    }
    let env = band_limited_pano(128);
    let env_path = dir.path().join("env.hdr");
    std::fs::write(&env_path, write_rgbe(&env).unwrap()).map_err(|e| e.to_string())?;
    let mut scene = SceneConfig::default_scene();
    scene.camera.width = 96;
    scene.camera.height = 48;
    let scene_path = dir.path().join("scene.toml");
    std::fs::write(&scene_path, scene.to_toml_string().unwrap()).map_err(|e| e.to_string())?;

    let out = dir.path().join("out");
    let mut snapshots = Vec::new();
    for jobs in ["1", "8", "1", "8"] {
        run_json(&["--jobs", jobs, "synth", s(&src), "--seed", "42", "--out-dir", s(&out.join("synth"))])?;
        let st = hdrcal_bin()
            .args(["--jobs", jobs, "render", s(&scene_path), s(&env_path), "-o", s(&out.join("render.hdr"))])
            .status()
            .map_err(|e| e.to_string())?;
        check(st.success(), || "render failed".into())?;
        snapshots.push(read_tree(&out));
        std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    }
    let files = snapshots[0].len();
    check(files == 6 * 2 + 1 + 2, || format!("unexpected output count {files}"))?;
    check(snapshots.iter().all(|s| *s == snapshots[0]), || "outputs differ between runs".into())?;
    Ok(format!("{files} files byte-identical over 4 runs (jobs 1, 8, 1, 8)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("calibration scale invariance", calibration_scale_invariance),
        ("calibration-synthesis consistency", calibration_synthesis_consistency),
        ("closed-form kappa optimality", closed_form_kappa),
        ("loss scale invariance", loss_scale_invariance),
        ("hand-computed oracles", hand_oracles),
        ("P2C/C2P round trip", p2c_round_trip),
        ("merge identities", merge_identities),
        ("RGBE/PFM/sRGB codecs", codecs),
        ("IBL analytic check", ibl_analytic),
        ("end-to-end ordering", end_to_end_ordering),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
