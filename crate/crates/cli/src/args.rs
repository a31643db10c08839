use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hdrcal", version, about = "HDR calibration, synthesis, panorama and lighting tools")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Parameter file (TOML or JSON). A job manifest works too.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LdrEncoding {
    /// 8-bit sRGB, decoded with the sRGB transfer curve.
    Srgb,
    /// Codes are linear: value = code / 255.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HdrFormat {
    Hdr,
    Pfm,
}

/// Where results go: one file, or a directory for batches.
#[derive(Debug, Args)]
pub struct Outputs {
    /// Output file (single input only).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Output directory; input names are kept, extensions replaced.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long)]
    pub ceil_size: Option<usize>,
    #[arg(long)]
    pub camera_offset: Option<f64>,
    #[arg(long)]
    pub plane_extent: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rescale an HDR image to match its LDR on non-over-exposed pixels.
    Calibrate {
        hdr: PathBuf,
        ldr: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        ldr_encoding: Option<LdrEncoding>,
    },
    /// Three-class luminance labels of calibrated HDR images (PPM, one-hot).
    Segment {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Outputs,
        #[arg(long)]
        t_low: Option<f64>,
        #[arg(long)]
        t_high: Option<f64>,
    },
    /// Synthesize 8-bit LDR images through a randomized virtual camera.
    Synth {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Outputs,
        /// Master seed; file i uses derive_seed(seed, i).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        target_mean: Option<f64>,
        /// Override the sampled dynamic range (EV).
        #[arg(long)]
        dynamic_range_ev: Option<f64>,
        #[arg(long)]
        crf_sigma: Option<f64>,
        #[arg(long)]
        crf_n: Option<f64>,
        /// Skip the response curve: codes are linear.
        #[arg(long)]
        identity_crf: bool,
    },
    /// Scale-invariant metrics of a prediction against ground truth (JSON).
    Metrics {
        pred: PathBuf,
        gt: PathBuf,
        /// Anchor both images to display luminance using this LDR.
        #[arg(long)]
        ldr: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        ldr_encoding: Option<LdrEncoding>,
    },
    /// Panorama to ceiling view.
    P2c {
        pano: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Ceiling view back to a panorama.
    C2p {
        ceil: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Panorama width (height is half).
        #[arg(long)]
        pano_width: Option<usize>,
        /// Also write the validity mask (PPM).
        #[arg(long)]
        validity: Option<PathBuf>,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Blend a ceiling-view reconstruction into a panorama reconstruction.
    Merge {
        ceil_hdr: PathBuf,
        pano_hdr: PathBuf,
        /// Ceiling-view LDR input that drives the blend mask.
        ceil_ldr: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        merge_tau: Option<f64>,
        #[arg(long, value_enum)]
        ldr_encoding: Option<LdrEncoding>,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Perspective crops of panoramas.
    CropSet {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        outdoor: bool,
        #[arg(long)]
        hfov: Option<f64>,
        #[arg(long)]
        crop_width: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<HdrFormat>,
    },
    /// Render a scene lit by a panorama.
    Render {
        scene: PathBuf,
        env: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Reference render; prints comparison metrics.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Calibrate two panoramas against an LDR panorama, render, and compare.
    EvalIbl {
        pred_env: PathBuf,
        gt_env: PathBuf,
        ldr_env: PathBuf,
        scene: PathBuf,
        /// Keep the two renders in this directory.
        #[arg(long)]
        save_renders: Option<PathBuf>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum)]
        ldr_encoding: Option<LdrEncoding>,
    },
    /// Exposure-windowed 8-bit preview.
    Preview {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Outputs,
        #[arg(long, allow_hyphen_values = true)]
        ev: Option<f64>,
        #[arg(long)]
        window: Option<f64>,
    },
    /// Convert between RGBE, PFM and PPM.
    Convert {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        out: Outputs,
        /// Target format for --out-dir (hdr, pfm or ppm).
        #[arg(long)]
        to: Option<String>,
        #[arg(long, value_enum)]
        ldr_encoding: Option<LdrEncoding>,
    },
    /// Write the default scene file.
    DefaultScene {
        #[arg(short, long)]
        output: PathBuf,
    },
}
