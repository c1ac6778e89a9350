//! Experiment configuration: a flat JSON document, overridden by flags.
//!
//! Every key is optional in the file; missing keys take the defaults of
//! [`ExperimentConfig::default`].
//!
//! | key         | type            | default          |
//! |-------------|-----------------|------------------|
//! | `d`         | integer 1..=5   | 1                |
//! | `kappa`     | number          | 1                |
//! | `rho`       | number          | 1                |
//! | `gamma`     | number          | 1                |
//! | `s0`        | number          | 1                |
//! | `s1`        | number          | 1                |
//! | `t_grid`    | array of number | [10, 20, 50]     |
//! | `paths`     | integer         | 100000           |
//! | `seed`      | integer         | 1                |
//! | `radius`    | integer or null | solver default   |
//! | `lambda`    | array of number | []               |
//! | `x`         | array of int    | [] (the origin)  |
//! | `estimator` | string          | "exposure"       |
//! | `format`    | string          | "csv"            |
//! | `out`       | string or null  | stdout           |

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dormantwalk::{Estimator, Params};

use crate::InvalidInput;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorChoice {
    Exposure,
    HardKill,
    Both,
}

impl EstimatorChoice {
    pub fn estimators(self) -> Vec<Estimator> {
        match self {
            EstimatorChoice::Exposure => vec![Estimator::Exposure],
            EstimatorChoice::HardKill => vec![Estimator::HardKill],
            EstimatorChoice::Both => vec![Estimator::Exposure, Estimator::HardKill],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    /// Tab-separated plot data.
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub kappa: f64,
    pub rho: f64,
    pub gamma: f64,
    pub s0: f64,
    pub s1: f64,
    pub t_grid: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    pub radius: Option<usize>,
    pub lambda: Vec<f64>,
    pub x: Vec<i64>,
    pub estimator: EstimatorChoice,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: 1,
            kappa: 1.0,
            rho: 1.0,
            gamma: 1.0,
            s0: 1.0,
            s1: 1.0,
            t_grid: vec![10.0, 20.0, 50.0],
            paths: 100_000,
            seed: 1,
            radius: None,
            lambda: Vec::new(),
            x: Vec::new(),
            estimator: EstimatorChoice::Exposure,
            format: Format::Csv,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).map_err(|e| InvalidInput(format!("config: {e}")).into())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text)
    }

    /// Validated model parameters.
    pub fn params(&self) -> anyhow::Result<Params> {
        Ok(Params::new(self.d, self.kappa, self.rho, self.gamma, self.s0, self.s1)?)
    }

    /// Checks everything except command-specific requirements.
    pub fn validate(&self) -> anyhow::Result<()> {
        self.params()?;
        if self.t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(InvalidInput("t grid must hold finite non-negative times".into()).into());
        }
        if self.t_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(InvalidInput("t grid must be sorted".into()).into());
        }
        if self.lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(InvalidInput("lambda values must be positive".into()).into());
        }
        if self.paths == 0 {
            return Err(InvalidInput("paths must be positive".into()).into());
        }
        if !self.x.is_empty() && self.x.len() != self.d {
            return Err(InvalidInput(format!("x has {} coordinates but d = {}", self.x.len(), self.d)).into());
        }
        Ok(())
    }

    /// The point `x`, defaulting to the origin.
    pub fn point(&self) -> Vec<i64> {
        if self.x.is_empty() {
            vec![0; self.d]
        } else {
            self.x.clone()
        }
    }

    /// The configuration as embedded in outputs: the output path is dropped
    /// so that the same experiment written to two places hashes the same.
    pub fn resolved(&self) -> Self {
        ExperimentConfig { out: None, ..self.clone() }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.resolved()).expect("config serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub s1: Option<f64>,
    /// Comma-separated time grid
    #[arg(long = "t", visible_alias = "t-grid", value_delimiter = ',')]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub paths: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Comma-separated list
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Lattice point, comma-separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<i64>>,
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorChoice>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        self.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn apply(&self, c: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => {
                $(if let Some(v) = &self.$f { c.$f = v.clone(); })*
            };
        }
        set!(d, kappa, rho, gamma, s0, s1, t_grid, paths, seed, lambda, x, estimator, format);
        if self.radius.is_some() {
            c.radius = self.radius;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_document() {
        let c = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"kapa": 2}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"d": 2, "gamma": 0.5, "seed": 9}"#).unwrap();
        let o = Overrides { config: Some(path), gamma: Some(3.0), ..Default::default() };
        let c = o.resolve().unwrap();
        assert_eq!((c.d, c.gamma, c.seed), (2, 3.0, 9));
    }

    #[test]
    fn hash_ignores_output_path() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { out: Some("x.csv".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig { seed: 2, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_params_name_the_invariant() {
        let c = ExperimentConfig { rho: 0.0, ..Default::default() };
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("rho must be > 0"), "{err}");
        let c = ExperimentConfig { t_grid: vec![2.0, 1.0], ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { d: 2, x: vec![1], ..Default::default() };
        assert!(c.validate().is_err());
    }
}
