use std::fs;
use std::path::{Path, PathBuf};

use catastrophe::chain::ThinningConvention;
use catastrophe::{EnvDistribution, ImmigrationDistribution, PopCount};
use serde::Deserialize;

use crate::error::CliError;

/// One JSON document configures any command; each command reads the keys it
/// needs and rejects unknown ones.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: Option<EnvDistribution>,
    pub imm: Option<ImmigrationDistribution>,
    pub horizon: Option<u64>,
    pub n: Option<u64>,
    pub s: Option<f64>,
    pub reps: Option<u64>,
    pub m: Option<u64>,
    pub p: Option<f64>,
    pub state_cap: Option<u64>,
    pub x0: Option<PopCount>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub a: Option<f64>,
    pub beta: Option<f64>,
    pub a_grid: Option<Vec<f64>>,
    pub beta_grid: Option<Vec<f64>>,
    pub matrix: Option<Vec<MatrixCell>>,
    pub convention: Option<ThinningConvention>,
    pub gaps: Option<u64>,
    pub max_n: Option<u64>,
    pub runs: Option<u64>,
}

/// One small configuration checked by `validate`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCell {
    pub env: EnvDistribution,
    pub imm: ImmigrationDistribution,
    pub n: u64,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(env) = &cfg.env {
            env.validate().map_err(CliError::from_lib)?;
        }
        for cell in cfg.matrix.iter().flatten() {
            cell.env.validate().map_err(CliError::from_lib)?;
        }
        Ok(cfg)
    }

    pub fn env(&self) -> Result<EnvDistribution, CliError> {
        self.env.clone().ok_or_else(|| CliError::Config("missing `env`".into()))
    }

    pub fn imm(&self) -> Result<ImmigrationDistribution, CliError> {
        self.imm.clone().ok_or_else(|| CliError::Config("missing `imm`".into()))
    }

    pub fn seed(&self) -> u64 {
        self.master_seed.unwrap_or(0)
    }
}

pub fn require_probability(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{name}` = {v} must lie in (0, 1)")))
    }
}
