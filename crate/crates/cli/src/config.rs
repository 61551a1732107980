//! TOML run configuration. Keys follow the parameter symbols (`a`, `eta`, `R`, `R_prime`, ...).

use std::path::{Path, PathBuf};

use diamond_bell::correlators::{Dressing, FormulaMode};
use diamond_bell::kernel::Mass;
use diamond_bell::quad::QuadSettings;
use diamond_bell::search::{SearchConfig, DEFAULT_FIT_DEGREE};
use diamond_bell::testfn::{BellParameters, ClusterParameters, MerminParameters};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    pub output_dir: PathBuf,
    pub formula_mode: FormulaMode,
    pub bob_dressing: Dressing,
    /// Persistent bilinear cache.
    pub cache_file: Option<PathBuf>,
    pub fit_degree: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            name: "run".into(),
            output_dir: PathBuf::from("."),
            formula_mode: FormulaMode::Derived,
            bob_dressing: Dressing::Adjoint,
            cache_file: None,
            fit_degree: DEFAULT_FIT_DEGREE,
        }
    }
}

/// Third-party functions; the Bell part comes from `[bell]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MerminSection {
    pub p: f64,
    pub p_prime: f64,
    pub zeta: f64,
    pub zeta_prime: f64,
    /// Defaults to `2R`.
    pub d: Option<f64>,
    /// Defaults to `2R`.
    pub d_prime: Option<f64>,
    pub pj_tolerance: Option<f64>,
}

/// Either `d` or `h_center` places `h`; with both missing it is an error.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub a: f64,
    pub eta: f64,
    pub p: f64,
    pub zeta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub m: Mass,
    pub d: Option<f64>,
    pub h_center: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub quadrature: QuadSettings,
    pub bell: Option<BellParameters>,
    pub mermin: Option<MerminSection>,
    pub cluster: Option<ClusterSection>,
    pub search: Option<SearchConfig>,
    #[serde(default)]
    pub sweep: Vec<BellParameters>,
}

/// A parsed config with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: Config,
    pub text: String,
    pub path: PathBuf,
}

impl LoadedConfig {
    /// SHA-256 of the config text with line endings normalized to `\n`.
    pub fn content_hash(&self) -> String {
        content_hash(&self.text)
    }
}

pub fn content_hash(text: &str) -> String {
    let normalized = text.replace("\r\n", "\n");
    Sha256::digest(normalized.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

const BELL_KEYS: [&str; 11] = [
    "a", "eta", "b", "sigma", "a_prime", "eta_prime", "b_prime", "sigma_prime", "m", "R", "R_prime",
];

/// The Bell parameter type is shared with the flattened Mermin one, so it cannot
/// deny unknown fields itself.
fn check_bell_keys(section: &str, value: &toml::Value) -> Result<(), CliError> {
    if let Some(t) = value.as_table() {
        if let Some(k) = t.keys().find(|k| !BELL_KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("{section}: unknown key `{k}`")));
        }
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    let raw: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(v) = raw.get("bell") {
        check_bell_keys("[bell]", v)?;
    }
    for v in raw.get("sweep").and_then(toml::Value::as_array).into_iter().flatten() {
        check_bell_keys("[[sweep]]", v)?;
    }
    let config: Config = raw.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    config
        .quadrature
        .validate()
        .map_err(|e| CliError::Config(format!("[quadrature]: {e}")))?;
    Ok(config)
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = parse(&text)?;
    Ok(LoadedConfig {
        config,
        text,
        path: path.to_path_buf(),
    })
}

impl Config {
    pub fn bell(&self) -> Result<BellParameters, CliError> {
        let p = self.bell.ok_or_else(|| CliError::Config("missing [bell] section".into()))?;
        p.validate().map_err(|e| CliError::Config(format!("[bell]: {e}")))?;
        Ok(p)
    }

    pub fn mermin(&self) -> Result<(MerminParameters, Option<f64>), CliError> {
        let bell = self.bell()?;
        let s = self.mermin.ok_or_else(|| CliError::Config("missing [mermin] section".into()))?;
        let p = MerminParameters {
            bell,
            p: s.p,
            p_prime: s.p_prime,
            zeta: s.zeta,
            zeta_prime: s.zeta_prime,
            d: s.d.unwrap_or(2.0 * bell.r),
            d_prime: s.d_prime.unwrap_or(2.0 * bell.r),
        };
        p.validate().map_err(|e| CliError::Config(format!("[mermin]: {e}")))?;
        Ok((p, s.pj_tolerance))
    }

    pub fn cluster(&self) -> Result<ClusterParameters, CliError> {
        let s = self.cluster.ok_or_else(|| CliError::Config("missing [cluster] section".into()))?;
        let p = match (s.d, s.h_center) {
            (Some(d), _) => ClusterParameters::with_gap(s.a, s.eta, s.p, s.zeta, s.r, s.m, d),
            (None, Some(h_center)) => ClusterParameters {
                a: s.a,
                eta: s.eta,
                p: s.p,
                zeta: s.zeta,
                r: s.r,
                m: s.m,
                h_center,
            },
            (None, None) => return Err(CliError::Config("[cluster] needs d or h_center".into())),
        };
        let gap = p.gap().map_err(|e| CliError::Config(format!("[cluster]: {e}")))?;
        p.h().map_err(|e| CliError::Config(format!("[cluster]: {e}")))?;
        if gap < 0.0 {
            return Err(CliError::Config(format!("[cluster]: supports overlap (gap {gap})")));
        }
        Ok(p)
    }

    pub fn search(&self) -> Result<SearchConfig, CliError> {
        let mut s = self.search.ok_or_else(|| CliError::Config("missing [search] section".into()))?;
        s.quadrature = self.quadrature;
        s.bob_dressing = self.run.bob_dressing;
        s.validate().map_err(|e| CliError::Config(format!("[search]: {e}")))?;
        Ok(s)
    }

    pub fn sweep(&self) -> Result<Vec<BellParameters>, CliError> {
        if self.sweep.is_empty() {
            return Err(CliError::Config("no [[sweep]] entries".into()));
        }
        for (i, p) in self.sweep.iter().enumerate() {
            p.validate().map_err(|e| CliError::Config(format!("[[sweep]] entry {i}: {e}")))?;
        }
        Ok(self.sweep.clone())
    }
}
