use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::classical::{ClassicalMap, DampingSymbol};
use crate::{Error, Result};

pub const DEFAULT_N_LIST: [usize; 4] = [200, 500, 1000, 2100];
pub const DEFAULT_DIM_CAP: usize = 4096;
pub const DEFAULT_SEED: u64 = 20_100_611;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Spectrum,
    WeylLaw,
    WidthScan,
    Angular,
    LargeDev,
    ClassicalStats,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Spectrum,
        Experiment::WeylLaw,
        Experiment::WidthScan,
        Experiment::Angular,
        Experiment::LargeDev,
        Experiment::ClassicalStats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::WeylLaw => "weyl-law",
            Experiment::WidthScan => "width-scan",
            Experiment::Angular => "angular",
            Experiment::LargeDev => "large-dev",
            Experiment::ClassicalStats => "classical-stats",
        }
    }

    /// Word lengths (classical experiments) or operator powers (the others).
    fn default_n_list(self) -> Vec<usize> {
        match self {
            Experiment::LargeDev | Experiment::ClassicalStats => vec![10, 20, 40, 80],
            Experiment::Angular => vec![1, 2, 3, 4, 5],
            _ => vec![1, 2, 3],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

impl Serialize for Experiment {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Experiment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub m: u32,
    pub alpha: f64,
}

impl MapConfig {
    pub fn classical(&self) -> ClassicalMap {
        ClassicalMap::new(self.m, self.alpha)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest acceptable relative eigensolver residual; rows above it are
    /// flagged in the CSV.
    #[serde(default = "default_residual")]
    pub residual: f64,
    /// Allowed decrease between consecutive entries of the rate table.
    #[serde(default = "default_rate_noise")]
    pub rate_noise: f64,
    /// Cached versus fresh spectrum, maximum absolute difference.
    #[serde(default = "default_cache")]
    pub cache: f64,
}

fn default_residual() -> f64 {
    1e-10
}
fn default_rate_noise() -> f64 {
    0.05
}
fn default_cache() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: default_residual(),
            rate_noise: default_rate_noise(),
            cache: default_cache(),
        }
    }
}

fn default_n_values() -> Vec<usize> {
    DEFAULT_N_LIST.to_vec()
}
fn default_c_list() -> Vec<f64> {
    vec![0.15]
}
fn default_samples() -> usize {
    10_000
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_delta() -> f64 {
    0.1
}
fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("qmap-out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub map: MapConfig,
    pub damping: DampingSymbol,
    #[serde(rename = "N_list", default = "default_n_values")]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default = "default_c_list")]
    pub c_list: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Half-width of the strip around `⟨a⟩`.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(rename = "N_cap", default = "default_cap")]
    pub dim_cap: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// `n_list` with the experiment's default filled in.
    pub fn powers(&self) -> Vec<usize> {
        self.n_list
            .clone()
            .unwrap_or_else(|| self.experiment.default_n_list())
    }

    /// Fills defaults that depend on other fields and checks ranges.
    pub fn validate(&mut self) -> Result<()> {
        if self.n_list.is_none() {
            self.n_list = Some(self.experiment.default_n_list());
        }
        if self.map.m == 0 {
            return Err(config_err("map.m", "cat parameter must be at least 1"));
        }
        if !(self.map.alpha >= 0.0 && self.map.alpha.is_finite()) {
            return Err(config_err("map.alpha", format!("must be finite and ≥ 0, got {}", self.map.alpha)));
        }
        self.damping
            .validate()
            .map_err(|e| config_err("damping", e.to_string()))?;
        if self.experiment != Experiment::ClassicalStats && self.dims.is_empty() {
            return Err(config_err("N_list", "must not be empty"));
        }
        for (i, &n) in self.dims.iter().enumerate() {
            if n < 4 || n > self.dim_cap {
                return Err(config_err(
                    format!("N_list[{i}]"),
                    format!("N = {n} outside [4, {}]", self.dim_cap),
                ));
            }
        }
        for (i, &n) in self.powers().iter().enumerate() {
            if n == 0 {
                return Err(config_err(format!("n_list[{i}]"), "must be at least 1"));
            }
        }
        for (i, &c) in self.c_list.iter().enumerate() {
            if !(c > 0.0) {
                return Err(config_err(format!("c_list[{i}]"), format!("must be positive, got {c}")));
            }
        }
        if self.samples == 0 {
            return Err(config_err("samples", "must be at least 1"));
        }
        if !(self.delta > 0.0) {
            return Err(config_err("delta", "must be positive"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON echo, leaving out where files go.
    pub fn hash(&self) -> String {
        let mut echo = self.clone();
        echo.output_dir = PathBuf::new();
        echo.cache_dir = None;
        let text = serde_json::to_string(&echo).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Strict JSON parsing with key paths in errors; defaults are filled and the
/// result validated.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    parse_config_str_for(text, None)
}

/// As [`parse_config_str`], with `experiment` replacing the document's
/// choice before experiment-dependent defaults are filled.
pub fn parse_config_str_for(text: &str, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        config_err(if path == "." { "<root>".to_string() } else { path }, inner.to_string())
    })?;
    de.end().map_err(|e| config_err("<root>", e.to_string()))?;
    if let Some(e) = experiment {
        cfg.experiment = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file, or standard input when `path` is `-`.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_for(path, None)
}

pub fn parse_config_for(path: &Path, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?
    };
    parse_config_str_for(&text, experiment)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        r#"{"experiment":"spectrum","map":{"m":1,"alpha":0.05},"damping":{"kind":"a2"},"N_list":[64]}"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.experiment, Experiment::Spectrum);
        assert_eq!(cfg.dims, vec![64]);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.c_list, vec![0.15]);
        assert_eq!(cfg.n_list, Some(vec![1, 2, 3]));
        assert_eq!(cfg.dim_cap, 4096);
        assert!(cfg.to_json().contains("\"seed\""));
        let cfg = parse_config_str(r#"{"experiment":"width-scan","map":{"m":1,"alpha":0.05},"damping":{"kind":"a2"}}"#)
            .unwrap();
        assert_eq!(cfg.dims, DEFAULT_N_LIST.to_vec());
        let cfg = parse_config_str_for(MINIMAL, Some(Experiment::LargeDev)).unwrap();
        assert_eq!(cfg.experiment, Experiment::LargeDev);
        assert_eq!(cfg.n_list, Some(vec![10, 20, 40, 80]));
    }

    fn err_of(text: &str) -> (String, String) {
        match parse_config_str(text) {
            Err(Error::Config { path, message }) => (path, message),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_experiment() {
        let (path, msg) = err_of(&MINIMAL.replace("spectrum", "nope"));
        assert_eq!(path, "experiment");
        assert!(msg.contains("unknown experiment 'nope'"), "{msg}");
    }

    #[test]
    fn malformed_documents() {
        let (_, msg) = err_of(&MINIMAL.replace(r#""N_list":[64]"#, r#""N_list":[64],"seed":1,"seed":2"#));
        assert!(msg.contains("duplicate field `seed`") && msg.contains("line 1"), "{msg}");
        let (_, msg) = err_of(&format!("{MINIMAL} garbage"));
        assert!(msg.contains("trailing characters") && msg.contains("column"), "{msg}");
        let (path, msg) = err_of(&MINIMAL.replace(r#""m":1"#, r#""m":1,"beta":2"#));
        assert_eq!(path, "map.beta");
        assert!(msg.contains("unknown field `beta`"), "{msg}");
        let (path, _) = err_of(&MINIMAL.replace("[64]", "[64, 2]"));
        assert_eq!(path, "N_list[1]");
        let (path, _) = err_of(&MINIMAL.replace("[64]", "[5000]"));
        assert_eq!(path, "N_list[0]");
        let (path, _) = err_of(&MINIMAL.replace(r#"{"kind":"a2"}"#, r#"{"kind":"constant","value":0}"#));
        assert_eq!(path, "damping");
        let (path, _) = err_of(&MINIMAL.replace("[64]", "[\"x\"]"));
        assert_eq!(path, "N_list[0]");
    }

    #[test]
    fn hash_ignores_locations() {
        let a = parse_config_str(MINIMAL).unwrap();
        let mut b = a.clone();
        b.output_dir = "elsewhere".into();
        b.cache_dir = Some("cache".into());
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
