//! Run configuration: JSON file with rationals as strings, validated into
//! the core chain types at load time.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bethe_core::monodromy::ChainSpec;
use bethe_core::partitions::BetheParams;
use bethe_core::rmatrix::ModelParams;
use bethe_core::scalar::Rat;
use serde::{Deserialize, Serialize};

/// Numeric backend selector.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

/// On-disk configuration; every rational is a string "p/q" (or "p").
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: u8,
    #[serde(rename = "L")]
    pub sites: usize,
    pub c: String,
    pub xi: Vec<String>,
    pub chi: Vec<String>,
    pub t: Vec<Vec<String>>,
    pub z: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_backend")]
    pub backend: Backend,
}

fn default_backend() -> Backend {
    Backend::Exact
}

/// A configuration error; always names the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully validated configuration.
pub struct Loaded {
    pub config: RunConfig,
    pub spec: ChainSpec,
    pub t: BetheParams,
    pub z: Rat,
}

fn parse_rat(field: &str, s: &str) -> Result<Rat, ConfigError> {
    Rat::from_str(s).map_err(|e| ConfigError(format!("field '{field}': {e}")))
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read '{}': {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&raw)
        .map_err(|e| ConfigError(format!("invalid JSON in '{}': {e}", path.display())))?;
    if config.xi.len() != config.sites {
        return Err(ConfigError(format!(
            "field 'xi': expected {} inhomogeneities for L = {}, got {}",
            config.sites,
            config.sites,
            config.xi.len()
        )));
    }
    if config.t.len() != config.n as usize {
        return Err(ConfigError(format!(
            "field 't': expected {} parameter levels for n = {}, got {}",
            config.n,
            config.n,
            config.t.len()
        )));
    }
    let c = parse_rat("c", &config.c)?;
    let params =
        ModelParams::new(config.n, c.clone()).map_err(|e| ConfigError(format!("field 'c': {e}")))?;
    let xi = config
        .xi
        .iter()
        .enumerate()
        .map(|(k, s)| parse_rat(&format!("xi[{k}]"), s))
        .collect::<Result<Vec<_>, _>>()?;
    let chi = config
        .chi
        .iter()
        .enumerate()
        .map(|(k, s)| parse_rat(&format!("chi[{k}]"), s))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = ChainSpec::new(params, xi, chi)
        .map_err(|e| ConfigError(format!("fields 'xi'/'chi': {e}")))?;
    let sets = config
        .t
        .iter()
        .enumerate()
        .map(|(s, lvl)| {
            lvl.iter()
                .enumerate()
                .map(|(k, v)| parse_rat(&format!("t[{s}][{k}]"), v))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let t = BetheParams::new(sets, &c).map_err(|e| ConfigError(format!("field 't': {e}")))?;
    let z = parse_rat("z", &config.z)?;
    t.check_with_point(&c, &z, config.n as usize)
        .map_err(|e| ConfigError(format!("fields 't'/'z': {e}")))?;
    Ok(Loaded { config, spec, t, z })
}
