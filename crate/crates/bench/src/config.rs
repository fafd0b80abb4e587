//! Experiment configuration and its flat `key = value` file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use eel_core::{
    BoostConfig, DedupMode, FitnessParams, GaConfig, LmsConfig, LmsSign, MutationScope,
    Normalization,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Lms,
    Ga,
    Boost,
    OffEel,
    OnEel,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Lms,
        Method::Ga,
        Method::Boost,
        Method::OffEel,
        Method::OnEel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lms => "lms",
            Method::Ga => "ga",
            Method::Boost => "boost",
            Method::OffEel => "off-eel",
            Method::OnEel => "on-eel",
        }
    }

    /// Whether the method produces an ensemble with a meaningful size.
    pub fn has_ensemble(self) -> bool {
        matches!(self, Method::Boost | Method::OffEel | Method::OnEel)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| BenchError::Config(format!("unknown method {s:?}")))
    }
}

/// Named bundles of settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Population 500, 100,000 evaluations, 10 folds x 10 runs, 2000 boosting rounds.
    Paper,
    /// Population 100, 20,000 evaluations, 10 folds x 3 runs, 200 boosting rounds.
    Desk,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    /// Zero-based; `None` means the last column.
    pub label_column: Option<usize>,
    pub method: Method,
    pub folds: usize,
    pub runs: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub precision: Precision,
    pub ga: GaConfig,
    pub fitness: FitnessParams,
    pub dedup: DedupMode,
    pub lms: LmsConfig,
    pub boost: BoostConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            label_column: None,
            method: Method::OffEel,
            folds: 10,
            runs: 10,
            seed: 1,
            normalization: Normalization::PerFold,
            precision: Precision::F64,
            ga: GaConfig::default(),
            fitness: FitnessParams::default(),
            dedup: DedupMode::Genome,
            lms: LmsConfig::default(),
            boost: BoostConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn with_profile(profile: Profile) -> Self {
        let mut cfg = Self::default();
        cfg.apply_profile(profile);
        cfg
    }

    pub fn apply_profile(&mut self, profile: Profile) {
        let (pop, evals, runs, rounds) = match profile {
            Profile::Paper => (500, 100_000, 10, 2000),
            Profile::Desk => (100, 20_000, 3, 200),
        };
        self.ga.population_size = pop;
        self.ga.max_evaluations = evals;
        self.folds = 10;
        self.runs = runs;
        self.boost.max_rounds = rounds;
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(BenchError::Config(format!(
                "folds = {} must be >= 2",
                self.folds
            )));
        }
        if self.runs < 1 {
            return Err(BenchError::Config("runs must be >= 1".into()));
        }
        self.ga.validate()?;
        self.fitness.validate()?;
        self.lms.validate()?;
        self.boost.validate()?;
        Ok(())
    }
}

/// Result of parsing a config file.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedConfig {
    pub config: ExperimentConfig,
    /// Whether the file named a method (the CLI flag may supply it instead).
    pub method_given: bool,
}

/// Parses the flat `key = value` format. Blank lines and `#` comments are
/// ignored. A `profile` line is applied before every other key regardless
/// of where it appears. Relative dataset paths are resolved against
/// `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ParsedConfig> {
    parse_config_onto(ExperimentConfig::default(), text, base_dir)
}

/// [`parse_config`] starting from `base` instead of the defaults.
pub fn parse_config_onto(
    base: ExperimentConfig,
    text: &str,
    base_dir: Option<&Path>,
) -> Result<ParsedConfig> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| BenchError::Config(format!("line {}: expected key = value", idx + 1)))?;
        entries.push((idx + 1, key.trim().to_string(), value.trim().to_string()));
    }

    let mut cfg = base;
    for (line, key, value) in &entries {
        if key == "profile" {
            cfg.apply_profile(parse_enum(value).map_err(|e| at_line(*line, e))?);
        }
    }
    let mut method_given = false;
    for (line, key, value) in &entries {
        set_key(&mut cfg, key, value, base_dir, &mut method_given)
            .map_err(|e| at_line(*line, e))?;
    }
    Ok(ParsedConfig {
        config: cfg,
        method_given,
    })
}

pub fn load_config(path: &Path, base: ExperimentConfig) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_onto(base, &text, path.parent())
}

fn at_line(line: usize, e: BenchError) -> BenchError {
    BenchError::Config(format!("line {line}: {e}"))
}

fn set_key(
    cfg: &mut ExperimentConfig,
    key: &str,
    value: &str,
    base_dir: Option<&Path>,
    method_given: &mut bool,
) -> Result<()> {
    match key {
        "profile" => {}
        "dataset" => {
            let p = PathBuf::from(value);
            cfg.dataset = match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            };
        }
        "label_column" => {
            cfg.label_column = if value == "last" {
                None
            } else {
                Some(parse_num(key, value)?)
            }
        }
        "method" => {
            cfg.method = value.parse()?;
            *method_given = true;
        }
        "folds" => cfg.folds = parse_num(key, value)?,
        "runs" | "runs_per_fold" => cfg.runs = parse_num(key, value)?,
        "seed" | "master_seed" => cfg.seed = parse_num(key, value)?,
        "normalization" => cfg.normalization = parse_enum(value)?,
        "precision" => cfg.precision = parse_enum(value)?,
        "population_size" => cfg.ga.population_size = parse_num(key, value)?,
        "max_evaluations" => cfg.ga.max_evaluations = parse_num(key, value)?,
        "tournament_size" => cfg.ga.tournament_size = parse_num(key, value)?,
        "init_range" => {
            let (lo, hi) = value.split_once(',').ok_or_else(|| {
                BenchError::Config(format!("init_range {value:?}: expected lo,hi"))
            })?;
            cfg.ga.init_range = (parse_num(key, lo.trim())?, parse_num(key, hi.trim())?);
        }
        "sbx_probability" => cfg.ga.sbx_probability = parse_num(key, value)?,
        "sbx_eta" => cfg.ga.sbx_eta = parse_num(key, value)?,
        "mutation_probability" => cfg.ga.mutation_probability = parse_num(key, value)?,
        "mutation_sigma" => cfg.ga.mutation_sigma = parse_num(key, value)?,
        "mutation_scope" => cfg.ga.mutation_scope = parse_enum::<MutationScope>(value)?,
        "gamma" => cfg.fitness.gamma = parse_num(key, value)?,
        "dedup" => cfg.dedup = parse_enum(value)?,
        "lms_max_epochs" => cfg.lms.max_epochs = parse_num(key, value)?,
        "lms_stop_epsilon" => cfg.lms.stop_epsilon = parse_num(key, value)?,
        "lms_sign" => cfg.lms.sign = parse_enum::<LmsSign>(value)?,
        "boost_max_rounds" => cfg.boost.max_rounds = parse_num(key, value)?,
        _ => return Err(BenchError::Config(format!("unknown key {key:?}"))),
    }
    Ok(())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| BenchError::Config(format!("{key}: cannot parse {value:?}")))
}

/// Reads a kebab-case enum through its serde representation.
pub(crate) fn parse_enum<T: DeserializeOwned>(value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| BenchError::Config(format!("unrecognised value {value:?}")))
}
