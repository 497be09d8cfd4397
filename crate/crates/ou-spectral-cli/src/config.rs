//! Per-command configuration records. Each command reads an optional JSON
//! config document, then applies command-line flag overrides; the merged
//! effective config is echoed into the output directory for provenance.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::CliError;

pub fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let bytes = std::fs::read(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", p.display())))
        }
    }
}

macro_rules! override_field {
    ($cfg:expr, $flag:expr) => {
        if let Some(v) = $flag {
            $cfg = v;
        }
    };
}
pub(crate) use override_field;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisCheckConfig {
    pub dimension: usize,
    pub max_degree: usize,
    pub nodes_per_axis: usize,
}

impl Default for BasisCheckConfig {
    fn default() -> Self {
        BasisCheckConfig {
            dimension: 1,
            max_degree: 24,
            nodes_per_axis: 32,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DispersiveScanConfig {
    pub dimension: usize,
    pub max_degree: usize,
    pub nodes_per_axis: usize,
    pub count: usize,
    pub seed: u64,
    /// One of `random-coefficient`, `gaussian-bump`, `hermite-mode`.
    pub profile: String,
    /// Mode order for the `hermite-mode` profile.
    pub k: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_nodes: usize,
    pub refine: bool,
}

impl Default for DispersiveScanConfig {
    fn default() -> Self {
        DispersiveScanConfig {
            dimension: 1,
            max_degree: 24,
            nodes_per_axis: 32,
            count: 100,
            seed: 12345,
            profile: "random-coefficient".into(),
            k: 0,
            t_min: 0.05,
            t_max: std::f64::consts::FRAC_PI_2,
            t_nodes: 30,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StrichartzScanConfig {
    pub dimension: usize,
    pub max_degree: usize,
    pub nodes_per_axis: usize,
    pub count: usize,
    pub seed: u64,
    /// Number of admissible pairs sampled from the sharp line.
    pub pairs: usize,
    pub time_nodes: usize,
    pub refine: bool,
}

impl Default for StrichartzScanConfig {
    fn default() -> Self {
        StrichartzScanConfig {
            dimension: 1,
            max_degree: 24,
            nodes_per_axis: 32,
            count: 12,
            seed: 12345,
            pairs: 4,
            time_nodes: 61,
            refine: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalIntervalConfig {
    pub eta: f64,
    pub time_nodes: usize,
    pub n_max: u32,
}

impl Default for CriticalIntervalConfig {
    fn default() -> Self {
        CriticalIntervalConfig {
            eta: 0.05,
            time_nodes: 61,
            n_max: 10_000,
        }
    }
}
