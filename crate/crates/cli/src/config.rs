//! Run configurations: a JSON file overlaid with command-line flags.
//!
//! Precedence, lowest to highest: built-in defaults, `--config` file, flags.
//! Every flag has the same name as its config key (`--lambda-max` is
//! `lambda_max`), so the overlay is a plain key-by-key merge of JSON objects.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use torus_galerkin::LaplacianVariant;

/// Malformed input: bad flags, unreadable config, invalid values. Exit 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Keys naming output locations; they do not enter the digest, so the same
/// computation written to two places produces identical bytes.
const OUTPUT_KEYS: [&str; 3] = ["out", "svg", "manifest"];

/// Merges `flags` over the object in `file` and deserializes the result.
pub fn load<C: DeserializeOwned, F: Serialize>(
    file: Option<&Path>,
    flags: &F,
) -> anyhow::Result<C> {
    let mut merged = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(map)) => map,
                Ok(_) => {
                    return Err(usage(format!(
                        "config {} must be a JSON object",
                        path.display()
                    )))
                }
                Err(e) => return Err(usage(format!("config {}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    match serde_json::to_value(flags)? {
        Value::Object(over) => merged.extend(over),
        _ => unreachable!("flag structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| usage(format!("invalid configuration: {e}")))
}

/// Hex SHA-256 of the command name and the canonical JSON of its configuration.
pub fn digest<C: Serialize>(command: &str, config: &C) -> String {
    let mut v = serde_json::to_value(config).expect("configs serialize");
    if let Value::Object(map) = &mut v {
        for k in OUTPUT_KEYS {
            map.remove(k);
        }
    }
    let canonical = serde_json::json!({ "command": command, "config": v });
    format!("{:x}", Sha256::digest(canonical.to_string().as_bytes()))
}

fn default_m6() -> f64 {
    6.0
}
fn default_n8() -> usize {
    8
}
fn default_out() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "default_n8")]
    pub n: usize,
    #[serde(default = "default_m6")]
    pub m: f64,
    pub lambda: f64,
    #[serde(default)]
    pub variant: LaplacianVariant,
    #[serde(default = "SolveConfig::default_max_iter")]
    pub max_iter: usize,
    /// Fixed-point stopping threshold; default `1e-10 lambda^(1 - 1/m)`.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Newton residual target; default `1e-10 max(1, lambda)`.
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl SolveConfig {
    fn default_max_iter() -> usize {
        100
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default = "BoundsConfig::default_m")]
    pub m: f64,
    #[serde(default = "BoundsConfig::default_l")]
    pub l: Vec<usize>,
    pub lambdas: Vec<f64>,
    #[serde(default = "BoundsConfig::default_n")]
    pub n: Vec<usize>,
    #[serde(default = "BoundsConfig::default_slope_tolerance")]
    pub slope_tolerance: f64,
    #[serde(default = "BoundsConfig::default_n_tolerance")]
    pub n_tolerance: f64,
    #[serde(default = "BoundsConfig::default_out")]
    pub out: PathBuf,
}

impl BoundsConfig {
    fn default_m() -> f64 {
        2.0
    }
    fn default_l() -> Vec<usize> {
        vec![1]
    }
    fn default_n() -> Vec<usize> {
        vec![64]
    }
    fn default_slope_tolerance() -> f64 {
        0.05
    }
    fn default_n_tolerance() -> f64 {
        0.01
    }
    fn default_out() -> PathBuf {
        PathBuf::from("bounds.json")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifurcateConfig {
    #[serde(default = "default_n8")]
    pub n: usize,
    #[serde(default = "default_m6")]
    pub m: f64,
    #[serde(default)]
    pub variant: LaplacianVariant,
    #[serde(default = "BifurcateConfig::default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "BifurcateConfig::default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "BifurcateConfig::default_max_step")]
    pub max_step: f64,
    #[serde(default = "BifurcateConfig::default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub svg: Option<PathBuf>,
    /// Defaults to the CSV path with a `.manifest.json` extension.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
}

impl BifurcateConfig {
    fn default_lambda_max() -> f64 {
        12.0
    }
    fn default_initial_step() -> f64 {
        0.1
    }
    fn default_max_step() -> f64 {
        1.0
    }
    fn default_out() -> PathBuf {
        PathBuf::from("diagram.csv")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.out.with_extension("manifest.json"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "VerifyConfig::default_seed")]
    pub seed: u64,
    #[serde(default = "VerifyConfig::default_samples")]
    pub samples: usize,
    #[serde(default = "VerifyConfig::default_n")]
    pub n: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl VerifyConfig {
    fn default_seed() -> u64 {
        0x5eed
    }
    fn default_samples() -> usize {
        100
    }
    fn default_n() -> usize {
        4
    }
}
