use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use hdrcal::calibration::{calibrate_hdr, luminance_seg_labels, SegMask, DEFAULT_T_HIGH, DEFAULT_T_LOW, DEFAULT_TAU};
use hdrcal::camera::{derive_seed, sample_camera, synth_ldr, ResponseCurve, DEFAULT_TARGET_MEAN};
use hdrcal::ibl::{compare_renders, ibl_renders, render, SceneConfig};
use hdrcal::image::{exposure_preview, DEFAULT_WINDOW_EV};
use hdrcal::io::FileFormat;
use hdrcal::losses::{display_anchor, si_loss, si_scale_kappa, DEFAULT_EPSILON};
use hdrcal::metrics::{log_psnr, ssim, SSIM_RADIUS};
use hdrcal::pano::{c2p, crop_set, merge_mask, merge_panorama, p2c, CropScheme, PanoProjection, DEFAULT_CROP_HFOV_DEG, DEFAULT_MERGE_TAU};
use hdrcal::{HdrImage, LdrImage, RgbImage};

use crate::args::{Command, GeometryArgs, HdrFormat, LdrEncoding};
use crate::error::{CliError, Context};
use crate::files::{
    expand_inputs, ext_of, linearize, plan_outputs, read_hdr, read_ldr, read_ldr_linear, sidecar, write_hdr, write_json,
    write_ldr, Input,
};
use crate::manifest::{FileRecord, JobManifest, Status};
use crate::params::{Params, Resolver};

const HDR_EXTS: &[&str] = &["hdr", "pic", "rgbe", "pfm"];
const ALL_EXTS: &[&str] = &["hdr", "pic", "rgbe", "pfm", "ppm"];
const DEFAULT_CROP_WIDTH: usize = 320;

/// What a finished command hands back to `main`.
pub struct Outcome {
    pub stdout: Option<Value>,
    /// Per-file failures of a batch, already recorded in its manifest.
    pub failures: Vec<CliError>,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Self {
            stdout: Some(v),
            failures: Vec::new(),
        }
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn hdr_ext(format: HdrFormat) -> &'static str {
    match format {
        HdrFormat::Hdr => "hdr",
        HdrFormat::Pfm => "pfm",
    }
}

fn write_manifest(output: &Path, subcommand: &str, params: Params, record: FileRecord) -> Result<(), CliError> {
    write_json(&sidecar(output), &JobManifest::new(subcommand, params, vec![record]))
}

/// Runs `f` over the inputs in parallel. Each success gets a sidecar
/// manifest; failures are recorded and do not stop the rest. With
/// `--out-dir` the directory also receives `manifest.json` for the batch.
fn run_batch<F>(
    subcommand: &str,
    params: &Params,
    inputs: &[Input],
    outputs: &[PathBuf],
    out_dir: Option<&Path>,
    f: F,
) -> Result<Outcome, CliError>
where
    F: Fn(usize, &Input, &Path) -> Result<(Value, Params), CliError> + Sync,
{
    let records: Vec<(FileRecord, Option<CliError>)> = inputs
        .par_iter()
        .zip(outputs)
        .enumerate()
        .map(|(i, (input, output))| {
            let names = vec![path_str(&input.path)];
            let done = f(i, input, output).and_then(|(result, file_params)| {
                let record = FileRecord::ok(names.clone(), vec![path_str(output)], result);
                write_manifest(output, subcommand, file_params, record.clone())?;
                Ok(record)
            });
            match done {
                Ok(r) => (r, None),
                Err(e) => {
                    let e = e.at(&input.path);
                    (FileRecord::failed(names, &e), Some(e))
                }
            }
        })
        .collect();
    let failures: Vec<CliError> = records.iter().filter_map(|(_, e)| e.clone()).collect();
    let files: Vec<FileRecord> = records.into_iter().map(|(r, _)| r).collect();
    let manifest = JobManifest::new(subcommand, params.clone(), files);
    if let Some(dir) = out_dir {
        write_json(&dir.join("manifest.json"), &manifest)?;
    }
    let ok = manifest.files.iter().filter(|r| r.status == Status::Ok).count();
    Ok(Outcome {
        stdout: Some(json!({ "subcommand": subcommand, "succeeded": ok, "failed": failures.len() })),
        failures,
    })
}

fn projection(r: &mut Resolver, g: &GeometryArgs, pano_width: usize, ceil_default: usize) -> Result<PanoProjection, CliError> {
    let proj = PanoProjection {
        pano_width,
        pano_height: pano_width / 2,
        ceil_size: r.ceil_size(g.ceil_size, ceil_default),
        camera_offset: r.camera_offset(g.camera_offset, 1.0),
        plane_extent: r.plane_extent(g.plane_extent, 1.0),
    };
    proj.validate()?;
    Ok(proj)
}

fn seg_image(mask: &SegMask) -> Result<LdrImage, CliError> {
    let data = mask.one_hot::<f64>().into_iter().map(|v| if v > 0.5 { 255 } else { 0 }).collect();
    Ok(LdrImage::new(mask.width(), mask.height(), data)?)
}

fn load_scene(path: &Path) -> Result<SceneConfig, CliError> {
    let text = std::fs::read_to_string(path).at(path)?;
    SceneConfig::from_toml_str(&text).at(path)
}

fn comparison_json(c: &hdrcal::ibl::RenderComparison) -> Value {
    json!({ "mse": c.mse, "log_psnr": c.log_psnr, "ssim": c.ssim })
}

pub fn run(command: Command, config: &Params) -> Result<Outcome, CliError> {
    let mut r = Resolver::new(config);
    match command {
        Command::Calibrate {
            hdr,
            ldr,
            output,
            tau,
            ldr_encoding,
        } => {
            let tau = r.tau(tau, DEFAULT_TAU);
            let enc = r.ldr_encoding(ldr_encoding, LdrEncoding::Srgb);
            let h = read_hdr(&hdr)?;
            let i = read_ldr_linear(&ldr, enc)?;
            let res = calibrate_hdr(&h, &i, tau)?;
            write_hdr(&output, &res.calibrated)?;
            let result = json!({ "scale_factor": res.scale_factor, "masked_pixels": res.masked_pixels });
            let record = FileRecord::ok(vec![path_str(&hdr), path_str(&ldr)], vec![path_str(&output)], result.clone());
            write_manifest(&output, "calibrate", r.used, record)?;
            Ok(Outcome::json(result))
        }
        Command::Segment { inputs, out, t_low, t_high } => {
            let t_low = r.t_low(t_low, DEFAULT_T_LOW);
            let t_high = r.t_high(t_high, DEFAULT_T_HIGH);
            let inputs = expand_inputs(&inputs, HDR_EXTS)?;
            let outputs = plan_outputs(&inputs, &out, "ppm")?;
            let params = r.used;
            run_batch("segment", &params, &inputs, &outputs, out.out_dir.as_deref(), |_, input, output| {
                let mask = luminance_seg_labels(&read_hdr(&input.path)?, t_low, t_high)?;
                write_ldr(output, &seg_image(&mask)?)?;
                let counts = [0u8, 1, 2].map(|c| mask.classes.data().iter().filter(|&&v| v == c).count());
                Ok((json!({ "class_counts": counts }), params.clone()))
            })
        }
        Command::Synth {
            inputs,
            out,
            seed,
            target_mean,
            dynamic_range_ev,
            crf_sigma,
            crf_n,
            identity_crf,
        } => {
            let master = r.seed(seed, 0);
            let first = r.first_index(None, 0);
            let target = r.target_mean(target_mean, DEFAULT_TARGET_MEAN);
            let dr = r.dynamic_range_override(dynamic_range_ev);
            let sigma = r.crf_sigma_override(crf_sigma);
            let n = r.crf_n_override(crf_n);
            let identity = r.switch(identity_crf, |p| p.identity_crf, |p, v| p.identity_crf = Some(v));
            let inputs = expand_inputs(&inputs, HDR_EXTS)?;
            let outputs = plan_outputs(&inputs, &out, "ppm")?;
            let params = r.used;
            run_batch("synth", &params, &inputs, &outputs, out.out_dir.as_deref(), |i, input, output| {
                let index = first + i as u64;
                let seed = derive_seed(master, index);
                let mut sample = sample_camera(seed);
                if let Some(dr) = dr {
                    sample.dynamic_range_ev = dr;
                }
                if let ResponseCurve::Parametric { sigma: s0, n: n0 } = sample.crf {
                    sample.crf = ResponseCurve::parametric(sigma.unwrap_or(s0), n.unwrap_or(n0))?;
                }
                if identity {
                    sample.crf = ResponseCurve::Identity;
                }
                let (ldr, resolved) = synth_ldr(&read_hdr(&input.path)?, &sample, target)?;
                write_ldr(output, &ldr)?;
                let result = json!({
                    "source": path_str(&input.path),
                    "index": index,
                    "seed": resolved.seed,
                    "dynamic_range_ev": resolved.dynamic_range_ev,
                    "crf": resolved.crf,
                    "exposure": resolved.exposure,
                    "exposure_metered": "before_noise_floor",
                    "tau": DEFAULT_TAU,
                    "t_low": DEFAULT_T_LOW,
                    "t_high": DEFAULT_T_HIGH,
                });
                let file_params = Params {
                    first_index: Some(index),
                    ..params.clone()
                };
                Ok((result, file_params))
            })
        }
        Command::Metrics {
            pred,
            gt,
            ldr,
            epsilon,
            ldr_encoding,
        } => {
            let eps = r.epsilon(epsilon, DEFAULT_EPSILON);
            let p = read_hdr(&pred)?;
            let g = read_hdr(&gt)?;
            let kappa = si_scale_kappa(&p, &g, eps)?;
            let si = si_loss(&p, &g, eps)?;
            let (pa, ga, ev) = match &ldr {
                Some(path) => {
                    let enc = r.ldr_encoding(ldr_encoding, LdrEncoding::Srgb);
                    let lin = read_ldr_linear(path, enc)?;
                    let (pa, ga) = display_anchor(&p, &g, &lin, eps)?;
                    (pa, ga, -(hdrcal::losses::DISPLAY_PEAK.log2()))
                }
                None => {
                    let mean = g.mean_value();
                    let ev = if mean > 0.0 { (0.18 / mean).log2() } else { 0.0 };
                    (p.scaled(kappa)?, g, ev)
                }
            };
            let win = 2 * SSIM_RADIUS + 1;
            let s = if pa.width() >= win && pa.height() >= win {
                let a = exposure_preview(&pa, ev, DEFAULT_WINDOW_EV)?;
                let b = exposure_preview(&ga, ev, DEFAULT_WINDOW_EV)?;
                Some(ssim(&a, &b)?)
            } else {
                None
            };
            Ok(Outcome::json(json!({
                "si_mse": si,
                "log_psnr": log_psnr(&pa, &ga, eps)?,
                "ssim": s,
                "kappa": kappa,
                "anchored": ldr.is_some(),
                "parameters": r.used,
            })))
        }
        Command::P2c { pano, output, geometry } => {
            let img = read_hdr(&pano)?;
            let proj = projection(&mut r, &geometry, img.width(), img.width())?;
            if img.height() != proj.pano_height {
                return Err(CliError::usage("panorama must be 2:1").at(&pano));
            }
            write_hdr(&output, &p2c(&img, &proj)?)?;
            let record = FileRecord::ok(vec![path_str(&pano)], vec![path_str(&output)], json!({}));
            write_manifest(&output, "p2c", r.used, record)?;
            Ok(Outcome { stdout: None, failures: Vec::new() })
        }
        Command::C2p {
            ceil,
            output,
            pano_width,
            validity,
            geometry,
        } => {
            let img = read_hdr(&ceil)?;
            if img.width() != img.height() {
                return Err(CliError::usage("ceiling view must be square").at(&ceil));
            }
            let w = r.pano_width(pano_width, img.width());
            let proj = projection(&mut r, &geometry, w, img.width())?;
            let (pano, valid) = c2p(&img, &proj)?;
            write_hdr(&output, &pano)?;
            let mut outputs = vec![path_str(&output)];
            if let Some(v) = &validity {
                let data = valid.data().iter().flat_map(|&m| [m * 255; 3]).collect();
                write_ldr(v, &LdrImage::new(valid.width(), valid.height(), data)?)?;
                outputs.push(path_str(v));
            }
            let covered = valid.data().iter().filter(|&&m| m == 1).count();
            let record = FileRecord::ok(vec![path_str(&ceil)], outputs, json!({ "valid_pixels": covered }));
            write_manifest(&output, "c2p", r.used, record)?;
            Ok(Outcome { stdout: None, failures: Vec::new() })
        }
        Command::Merge {
            ceil_hdr,
            pano_hdr,
            ceil_ldr,
            output,
            merge_tau,
            ldr_encoding,
            geometry,
        } => {
            let tau = r.merge_tau(merge_tau, DEFAULT_MERGE_TAU);
            let enc = r.ldr_encoding(ldr_encoding, LdrEncoding::Srgb);
            let h_c = read_hdr(&ceil_hdr)?;
            let h_p = read_hdr(&pano_hdr)?;
            let i_c = read_ldr_linear(&ceil_ldr, enc)?;
            let proj = projection(&mut r, &geometry, h_p.width(), h_c.width())?;
            let mask = merge_mask(&i_c, &proj, tau)?;
            write_hdr(&output, &merge_panorama(&h_c, &h_p, &mask, &proj)?)?;
            let record = FileRecord::ok(
                vec![path_str(&ceil_hdr), path_str(&pano_hdr), path_str(&ceil_ldr)],
                vec![path_str(&output)],
                json!({}),
            );
            write_manifest(&output, "merge", r.used, record)?;
            Ok(Outcome { stdout: None, failures: Vec::new() })
        }
        Command::CropSet {
            inputs,
            out_dir,
            outdoor,
            hfov,
            crop_width,
            format,
        } => {
            let scheme = CropScheme {
                outdoor: r.switch(outdoor, |p| p.outdoor, |p, v| p.outdoor = Some(v)),
                hfov_deg: r.hfov(hfov, DEFAULT_CROP_HFOV_DEG),
                width: r.crop_width(crop_width, DEFAULT_CROP_WIDTH),
            };
            let ext = hdr_ext(r.format(format, HdrFormat::Hdr));
            let inputs = expand_inputs(&inputs, HDR_EXTS)?;
            // Each input gets a directory of crops; its manifest sits inside.
            let dirs: Vec<PathBuf> = inputs.iter().map(|i| out_dir.join(i.relative.with_extension(""))).collect();
            let manifests: Vec<PathBuf> = dirs.iter().map(|d| d.join("crops")).collect();
            let params = r.used;
            run_batch("crop-set", &params, &inputs, &manifests, Some(&out_dir), |k, input, _| {
                let crops = crop_set(&read_hdr(&input.path)?, &scheme)?;
                let mut names = Vec::new();
                for c in &crops {
                    let p = dirs[k].join(format!("yaw{:03}_pitch{:02}.{ext}", c.yaw_deg.round() as i64, c.pitch_deg.round() as i64));
                    write_hdr(&p, &c.image)?;
                    names.push(path_str(&p));
                }
                Ok((json!({ "crops": names }), params.clone()))
            })
        }
        Command::Render { scene, env, output, reference } => {
            let sc = load_scene(&scene)?;
            let img = render(&sc, &read_hdr(&env)?)?;
            write_hdr(&output, &img)?;
            let result = match &reference {
                Some(p) => comparison_json(&compare_renders(&img, &read_hdr(p)?).at(p)?),
                None => json!({}),
            };
            let mut inputs = vec![path_str(&scene), path_str(&env)];
            inputs.extend(reference.as_deref().map(path_str));
            let record = FileRecord::ok(inputs, vec![path_str(&output)], json!({ "scene": sc, "comparison": result }));
            write_manifest(&output, "render", r.used, record)?;
            Ok(Outcome {
                stdout: reference.map(|_| result),
                failures: Vec::new(),
            })
        }
        Command::EvalIbl {
            pred_env,
            gt_env,
            ldr_env,
            scene,
            save_renders,
            tau,
            ldr_encoding,
        } => {
            let tau = r.tau(tau, DEFAULT_TAU);
            let enc = r.ldr_encoding(ldr_encoding, LdrEncoding::Srgb);
            let sc = load_scene(&scene)?;
            let pred = read_hdr(&pred_env)?;
            let gt = read_hdr(&gt_env)?;
            let ldr = read_ldr_linear(&ldr_env, enc)?;
            let (a, b) = ibl_renders(&pred, &gt, &ldr, &sc, tau)?;
            let report = comparison_json(&compare_renders(&a, &b)?);
            if let Some(dir) = &save_renders {
                let (pa, pb) = (dir.join("pred_render.hdr"), dir.join("gt_render.hdr"));
                write_hdr(&pa, &a)?;
                write_hdr(&pb, &b)?;
                let record = FileRecord::ok(
                    vec![path_str(&pred_env), path_str(&gt_env), path_str(&ldr_env), path_str(&scene)],
                    vec![path_str(&pa), path_str(&pb)],
                    report.clone(),
                );
                write_json(&dir.join("manifest.json"), &JobManifest::new("eval-ibl", r.used.clone(), vec![record]))?;
            }
            Ok(Outcome::json(report))
        }
        Command::Preview { inputs, out, ev, window } => {
            let ev = r.ev(ev, 0.0);
            let window = r.window(window, DEFAULT_WINDOW_EV);
            let inputs = expand_inputs(&inputs, HDR_EXTS)?;
            let outputs = plan_outputs(&inputs, &out, "ppm")?;
            let params = r.used;
            run_batch("preview", &params, &inputs, &outputs, out.out_dir.as_deref(), |_, input, output| {
                write_ldr(output, &exposure_preview(&read_hdr(&input.path)?, ev, window)?)?;
                Ok((json!({}), params.clone()))
            })
        }
        Command::Convert {
            inputs,
            out,
            to,
            ldr_encoding,
        } => {
            let to = r.target_format(to);
            let enc = r.ldr_encoding(ldr_encoding, LdrEncoding::Srgb);
            let ext = match (&to, &out.output) {
                (Some(t), _) => t.to_ascii_lowercase(),
                (None, Some(o)) => ext_of(o).unwrap_or_default(),
                (None, None) => return Err(CliError::usage("convert --out-dir needs --to")),
            };
            if FileFormat::from_path(Path::new(&format!("x.{ext}"))).is_none() {
                return Err(CliError::usage(format!("unknown target format {ext:?}")));
            }
            let inputs = expand_inputs(&inputs, ALL_EXTS)?;
            let outputs = plan_outputs(&inputs, &out, &ext)?;
            let params = r.used;
            run_batch("convert", &params, &inputs, &outputs, out.out_dir.as_deref(), |_, input, output| {
                convert_one(&input.path, output, enc)?;
                Ok((json!({}), params.clone()))
            })
        }
        Command::DefaultScene { output } => {
            let text = SceneConfig::default_scene().to_toml_string()?;
            crate::files::atomic_write(&output, text.as_bytes())?;
            Ok(Outcome { stdout: None, failures: Vec::new() })
        }
    }
}

fn convert_one(input: &Path, output: &Path, enc: LdrEncoding) -> Result<(), CliError> {
    let bytes = std::fs::read(input).at(input)?;
    let src = FileFormat::detect(&bytes).ok_or_else(|| CliError::from(hdrcal::Error::UnknownFormat).at(input))?;
    let dst = FileFormat::from_path(output).ok_or_else(|| CliError::usage("unknown output extension").at(output))?;
    match (src.is_hdr(), dst.is_hdr()) {
        (true, true) => write_hdr(output, &hdrcal::io::decode_hdr(&bytes).at(input)?),
        (false, true) => write_hdr(output, &linearize(&read_ldr(input)?, enc).to_hdr()),
        (false, false) => write_ldr(output, &read_ldr(input)?),
        (true, false) => {
            let h: HdrImage<f64> = hdrcal::io::decode_hdr(&bytes).at(input)?;
            write_ldr(output, &exposure_preview(&h, 0.0, DEFAULT_WINDOW_EV)?)
        }
    }
}
