//! Run manifests: every command writes one next to its artifacts, embedding
//! the resolved configuration and seed so the run can be reproduced
//! byte-identically from the manifest alone.

use crate::config::{PriorsConfig, RunConfig};
use anyhow::{anyhow, Context, Result};
use macpp_core::inference::McmcConfig;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<RunConfig>,
    /// Input pattern path (fit/validate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    /// Built-in scenario id, when the run came from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<u8>,
    /// Sweep settings (scenarios command).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<ScenariosSpec>,
    /// Artifact name -> file name, relative to the output directory.
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_counts: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_rows: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenariosSpec {
    pub ids: Vec<u8>,
    pub n_datasets: usize,
    pub with_nsp: bool,
    pub mcmc: McmcConfig,
    pub priors: PriorsConfig,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }
}

/// Write pretty JSON with a trailing newline. Struct field order and sorted
/// maps keep the bytes deterministic.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
