use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ndpo_core::{ModelParams, ParamsConfig};
use serde::Deserialize;

use crate::{EngineArg, ParamArgs};

/// Contents of `--config`. Every key is optional; flags win over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<f64>,
    pub kappa_gamma0: Option<f64>,
    pub r: Option<f64>,
    pub gamma_a: Option<f64>,
    pub gamma_b: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
    pub r_max: Option<f64>,
    pub n_cut: Option<usize>,
    pub numeric: Option<bool>,
    pub engine: Option<String>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn params_config(&self) -> ParamsConfig {
        ParamsConfig {
            gamma: self.gamma,
            kappa_gamma0: self.kappa_gamma0,
            r: self.r,
            gamma_a: self.gamma_a,
            gamma_b: self.gamma_b,
        }
    }

    pub fn has_params(&self) -> bool {
        self.params_config() != ParamsConfig::default()
    }

    /// Flags over file values, validated as model parameters.
    pub fn params(&self, flags: &ParamArgs) -> Result<ModelParams> {
        let over = ParamsConfig {
            gamma: flags.gamma,
            kappa_gamma0: flags.kappa_gamma0,
            r: flags.r,
            ..ParamsConfig::default()
        };
        let merged = self.params_config().overlay(&over);
        Ok(merged.resolve()?)
    }

    pub fn engine(&self, flag: Option<EngineArg>) -> Result<EngineArg> {
        if let Some(e) = flag {
            return Ok(e);
        }
        match self.engine.as_deref() {
            None | Some("direct") => Ok(EngineArg::Direct),
            Some("normal-mode") | Some("normal_mode") => Ok(EngineArg::NormalMode),
            Some(other) => bail!("unknown engine `{other}` in config"),
        }
    }
}

pub fn positive_steps(steps: usize) -> Result<usize> {
    if steps == 0 {
        bail!("--steps must be at least 1");
    }
    Ok(steps)
}

/// steps + 1 evenly spaced points from 0 to `end`.
pub fn grid(end: f64, steps: usize) -> Result<Vec<f64>> {
    if !(end.is_finite() && end >= 0.0) {
        bail!("grid end must be finite and non-negative, got {end}");
    }
    let steps = positive_steps(steps)?;
    Ok((0..=steps).map(|i| end * i as f64 / steps as f64).collect())
}
