use std::io::Write;
use std::path::{Path, PathBuf};

use hdrcal::image::srgb_to_linear;
use hdrcal::io::{encode_hdr, load_hdr, load_ldr, write_ppm, FileFormat};
use hdrcal::{HdrImage, LdrImage, LinearLdr};

use crate::args::{LdrEncoding, Outputs};
use crate::error::{CliError, Context};

/// Writes through a temporary file in the target directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).at(parent)?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).at(parent)?;
    tmp.write_all(bytes).at(path)?;
    tmp.as_file().sync_all().at(path)?;
    tmp.persist(path).map_err(|e| CliError::io(e.error.to_string()).at(path))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Sidecar manifest path: `<output>.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn hdr_format(path: &Path) -> Result<FileFormat, CliError> {
    match FileFormat::from_path(path) {
        Some(f) if f.is_hdr() => Ok(f),
        _ => Err(CliError::usage("HDR output needs a .hdr or .pfm extension").at(path)),
    }
}

pub fn read_hdr(path: &Path) -> Result<HdrImage<f64>, CliError> {
    load_hdr(path).at(path)
}

pub fn write_hdr(path: &Path, img: &HdrImage<f64>) -> Result<(), CliError> {
    let bytes = encode_hdr(img, hdr_format(path)?).at(path)?;
    atomic_write(path, &bytes)
}

pub fn write_ldr(path: &Path, img: &LdrImage) -> Result<(), CliError> {
    if FileFormat::from_path(path) != Some(FileFormat::Ppm) {
        return Err(CliError::usage("8-bit output needs a .ppm extension").at(path));
    }
    atomic_write(path, &write_ppm(img))
}

pub fn read_ldr(path: &Path) -> Result<LdrImage, CliError> {
    load_ldr(path).at(path)
}

pub fn linearize(img: &LdrImage, encoding: LdrEncoding) -> LinearLdr<f64> {
    match encoding {
        LdrEncoding::Srgb => srgb_to_linear(img),
        LdrEncoding::Linear => hdrcal::camera::dequantize(img),
    }
}

pub fn read_ldr_linear(path: &Path, encoding: LdrEncoding) -> Result<LinearLdr<f64>, CliError> {
    Ok(linearize(&read_ldr(path)?, encoding))
}

/// One input of a batch and the name it keeps under `--out-dir`.
#[derive(Debug, Clone)]
pub struct Input {
    pub path: PathBuf,
    pub relative: PathBuf,
}

fn walk(dir: &Path, rel: &Path, exts: &[&str], out: &mut Vec<Input>) -> Result<(), CliError> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .at(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .at(dir)?;
    entries.sort();
    for p in entries {
        let name = p.file_name().map(PathBuf::from).unwrap_or_default();
        if p.is_dir() {
            walk(&p, &rel.join(&name), exts, out)?;
        } else if p
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| exts.contains(&e.to_ascii_lowercase().as_str()))
        {
            out.push(Input {
                relative: rel.join(name),
                path: p,
            });
        }
    }
    Ok(())
}

/// Expands directories (recursively, sorted) into files with the given
/// extensions. Files named explicitly are kept whatever their extension.
pub fn expand_inputs(inputs: &[PathBuf], exts: &[&str]) -> Result<Vec<Input>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            walk(p, Path::new(""), exts, &mut out)?;
        } else {
            out.push(Input {
                path: p.clone(),
                relative: p.file_name().map(PathBuf::from).unwrap_or_else(|| p.clone()),
            });
        }
    }
    let mut names: Vec<&PathBuf> = out.iter().map(|i| &i.relative).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0].with_extension("") == w[1].with_extension("")) {
        return Err(CliError::usage(format!("two inputs map to the same output name: {}", w[0].display())));
    }
    Ok(out)
}

/// Output path per input: `-o` for a single input, else `--out-dir`.
pub fn plan_outputs(inputs: &[Input], out: &Outputs, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    match (&out.output, &out.out_dir) {
        (Some(_), Some(_)) => Err(CliError::usage("use either --output or --out-dir")),
        (Some(o), None) if inputs.len() == 1 => Ok(vec![o.clone()]),
        (Some(_), None) => Err(CliError::usage("--output takes a single input; use --out-dir for batches")),
        (None, Some(d)) => Ok(inputs.iter().map(|i| d.join(i.relative.with_extension(ext))).collect()),
        (None, None) => Err(CliError::usage("missing --output or --out-dir")),
    }
}

pub fn ext_of(path: &Path) -> Option<String> {
    path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase)
}
