//! Resolved run configuration: every run is reproducible from its config and
//! seed alone.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use nematic_core::PotentialSpec;

use crate::CliError;

/// Fully resolved parameters of one command invocation. Emitted by
/// `--emit-config` and consumed by `--config`; command-line flags override
/// config-file values, defaults fill the rest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub potential: PotentialSpec,
    pub quad_order: usize,
    pub tol: f64,
    pub damping: f64,
    pub seed: u64,
    /// Worker pool size for β-grid scans; 0 means all available cores.
    pub jobs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_density: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_particles: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burnin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Potential-related command-line flags before resolution.
#[derive(Debug, Default, Clone)]
pub struct PotentialArgs {
    pub potential: Option<String>,
    pub w: Option<f64>,
    pub coeffs: Option<String>,
}

impl PotentialArgs {
    pub fn any_given(&self) -> bool {
        self.potential.is_some() || self.w.is_some() || self.coeffs.is_some()
    }

    pub fn to_spec(&self) -> Result<PotentialSpec, CliError> {
        let kind = self.potential.as_deref().unwrap_or("maier-saupe");
        match kind {
            "maier-saupe" => Ok(PotentialSpec::MaierSaupe {
                w: self.w.unwrap_or(1.0),
            }),
            "legendre" => {
                let text = self
                    .coeffs
                    .as_deref()
                    .ok_or_else(|| CliError::config("--potential legendre requires --coeffs"))?;
                Ok(PotentialSpec::Legendre {
                    coeffs: parse_coeffs(text)?,
                })
            }
            other => Err(CliError::config(format!(
                "unknown potential type {other:?} (expected maier-saupe or legendre)"
            ))),
        }
    }
}

/// Parse `"0:1.0,2:-1.0"` into degree/coefficient pairs.
pub fn parse_coeffs(text: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut map = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (degree, value) = part
            .split_once(':')
            .ok_or_else(|| CliError::config(format!("bad coefficient entry {part:?}")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad coefficient value {value:?}")))?;
        map.insert(degree.trim().to_string(), v);
    }
    if map.is_empty() {
        return Err(CliError::config("empty coefficient list"));
    }
    Ok(map)
}

pub fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
}

impl RunConfig {
    /// Start from defaults or a config file.
    pub fn base(command: &str, file: Option<RunConfig>) -> Result<Self, CliError> {
        match file {
            Some(cfg) => {
                if cfg.command != command {
                    return Err(CliError::config(format!(
                        "config file is for command {:?}, not {command:?}",
                        cfg.command
                    )));
                }
                Ok(cfg)
            }
            None => Ok(RunConfig {
                command: command.to_string(),
                potential: PotentialSpec::MaierSaupe { w: 1.0 },
                quad_order: 64,
                tol: 1e-10,
                damping: 0.5,
                seed: 0,
                jobs: 0,
                beta: None,
                beta_min: None,
                beta_max: None,
                beta_steps: None,
                seed_density: None,
                max_iter: None,
                n_particles: None,
                sweeps: None,
                burnin: None,
                out: None,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
