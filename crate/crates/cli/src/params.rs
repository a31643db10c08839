//! Job parameters. Flags win over the config file, which wins over defaults.
//! Manifests record the resolved values under the same keys, so a manifest
//! can be fed back as `--config`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::args::{HdrFormat, LdrEncoding};
use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ldr_encoding: Option<LdrEncoding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Seed index of the first input; file `i` uses `derive_seed(seed, first_index + i)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dynamic_range_ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crf_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crf_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_crf: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ev: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pano_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceil_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub camera_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plane_extent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hfov: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crop_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outdoor: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<HdrFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
}

impl Params {
    /// Reads a TOML or JSON parameter file. A top-level `parameters` table
    /// (as in manifests) is used when present.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(e.to_string()).at(path))?;
        let json = path.extension().and_then(|e| e.to_str()) == Some("json");
        let value: serde_json::Value = if json {
            serde_json::from_str(&text).map_err(|e| CliError::usage(format!("config: {e}")).at(path))?
        } else {
            toml::from_str(&text).map_err(|e| CliError::usage(format!("config: {e}")).at(path))?
        };
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("parameters") => map.remove("parameters").unwrap(),
            v => v,
        };
        serde_json::from_value(value).map_err(|e| CliError::usage(format!("config: {e}")).at(path))
    }
}

/// Picks flag, then config, then default, and records the choice.
pub struct Resolver<'a> {
    pub config: &'a Params,
    pub used: Params,
}

macro_rules! resolve_fn {
    ($name:ident, $ty:ty) => {
        pub fn $name(&mut self, flag: Option<$ty>, default: $ty) -> $ty {
            let v = flag.or_else(|| self.config.$name.clone()).unwrap_or(default);
            self.used.$name = Some(v.clone());
            v
        }
    };
}

macro_rules! resolve_opt_fn {
    ($fn_name:ident, $field:ident, $ty:ty) => {
        pub fn $fn_name(&mut self, flag: Option<$ty>) -> Option<$ty> {
            let v = flag.or_else(|| self.config.$field.clone());
            self.used.$field = v.clone();
            v
        }
    };
}

impl<'a> Resolver<'a> {
    pub fn new(config: &'a Params) -> Self {
        Self {
            config,
            used: Params::default(),
        }
    }

    resolve_fn!(tau, f64);
    resolve_fn!(t_low, f64);
    resolve_fn!(t_high, f64);
    resolve_fn!(ldr_encoding, LdrEncoding);
    resolve_fn!(seed, u64);
    resolve_fn!(first_index, u64);
    resolve_fn!(target_mean, f64);
    resolve_fn!(epsilon, f64);
    resolve_fn!(ev, f64);
    resolve_fn!(window, f64);
    resolve_fn!(pano_width, usize);
    resolve_fn!(ceil_size, usize);
    resolve_fn!(camera_offset, f64);
    resolve_fn!(plane_extent, f64);
    resolve_fn!(merge_tau, f64);
    resolve_fn!(hfov, f64);
    resolve_fn!(crop_width, usize);
    resolve_fn!(format, HdrFormat);
    resolve_opt_fn!(dynamic_range_override, dynamic_range_ev, f64);
    resolve_opt_fn!(crf_sigma_override, crf_sigma, f64);
    resolve_opt_fn!(crf_n_override, crf_n, f64);
    resolve_opt_fn!(target_format, to, String);

    /// Switch flags: set on the command line, or true in the config.
    pub fn switch(&mut self, flag: bool, pick: fn(&Params) -> Option<bool>, store: fn(&mut Params, bool)) -> bool {
        let v = flag || pick(self.config).unwrap_or(false);
        store(&mut self.used, v);
        v
    }
}
