//! Run-configuration schema: window, model graph, priors, and MCMC settings.
//! Configs are JSON, schema-validated before any computation; unknown keys
//! are rejected.

use anyhow::{anyhow, bail, Context, Result};
use macpp_core::inference::McmcConfig;
use macpp_core::model::{ModelGraph, ParamVector, Role};
use macpp_core::priors::{BandwidthPrior, GammaParams, PriorSpec};
use macpp_core::geometry::Window;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub window: Window,
    pub taxa: Vec<TaxonConfig>,
    #[serde(default)]
    pub priors: PriorsConfig,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxonConfig {
    pub name: String,
    pub role: RoleName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    /// Intensity for parent/unrelated taxa (needed to simulate).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Mean offspring per parent (needed to simulate offspring taxa).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Gaussian scatter scale (needed to simulate offspring taxa).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleName {
    Parent,
    Offspring,
    Unrelated,
}

/// Priors block: Gamma hyperparameters default to (0.01, 0.01); the
/// bandwidth prior is either a preset name or an explicit family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorsConfig {
    #[serde(default = "default_gamma")]
    pub gamma_alpha: GammaParams,
    #[serde(default = "default_gamma")]
    pub gamma_parent: GammaParams,
    #[serde(default = "default_gamma")]
    pub gamma_unrelated: GammaParams,
    #[serde(default)]
    pub bandwidth: BandwidthChoice,
}

fn default_gamma() -> GammaParams {
    GammaParams {
        shape: 0.01,
        rate: 0.01,
    }
}

impl Default for PriorsConfig {
    fn default() -> Self {
        PriorsConfig {
            gamma_alpha: default_gamma(),
            gamma_parent: default_gamma(),
            gamma_unrelated: default_gamma(),
            bandwidth: BandwidthChoice::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandwidthChoice {
    /// One of: "half-normal", "uniform", "lognormal-flat", "lognormal-tight".
    Preset(String),
    Explicit(BandwidthPrior),
}

impl Default for BandwidthChoice {
    fn default() -> Self {
        BandwidthChoice::Preset("half-normal".into())
    }
}

impl PriorsConfig {
    pub fn to_prior_spec(&self) -> Result<PriorSpec> {
        let bandwidth = match &self.bandwidth {
            BandwidthChoice::Preset(name) => BandwidthPrior::preset(name).ok_or_else(|| {
                anyhow!(
                    "unknown bandwidth prior preset `{name}`; valid presets: {}",
                    BandwidthPrior::PRESET_NAMES.join(", ")
                )
            })?,
            BandwidthChoice::Explicit(p) => *p,
        };
        let spec = PriorSpec {
            gamma_alpha: self.gamma_alpha,
            gamma_parent: self.gamma_parent,
            gamma_unrelated: self.gamma_unrelated,
            bandwidth,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl RunConfig {
    /// Build and validate the model graph declared by the taxa block.
    pub fn graph(&self) -> Result<ModelGraph> {
        let names: Vec<String> = self.taxa.iter().map(|t| t.name.clone()).collect();
        let mut roles = Vec::with_capacity(self.taxa.len());
        for t in &self.taxa {
            let role = match t.role {
                RoleName::Parent => {
                    if t.parent.is_some() {
                        bail!("taxon `{}`: parent-role taxa cannot declare a parent", t.name);
                    }
                    Role::Parent
                }
                RoleName::Unrelated => {
                    if t.parent.is_some() {
                        bail!("taxon `{}`: unrelated taxa cannot declare a parent", t.name);
                    }
                    Role::Unrelated
                }
                RoleName::Offspring => {
                    let pname = t.parent.as_ref().ok_or_else(|| {
                        anyhow!("taxon `{}`: offspring taxa must declare a parent", t.name)
                    })?;
                    let idx = names
                        .iter()
                        .position(|n| n == pname)
                        .ok_or_else(|| anyhow!("taxon `{}`: unknown parent `{pname}`", t.name))?;
                    Role::Offspring { parent: idx }
                }
            };
            roles.push(role);
        }
        ModelGraph::new(names, roles).map_err(|e| anyhow!(e))
    }

    /// Extract the generative parameters (requires every taxon to carry the
    /// fields its role needs).
    pub fn params(&self, graph: &ModelGraph) -> Result<ParamVector> {
        let mut alpha = Vec::new();
        let mut bandwidth = Vec::new();
        let mut lambda_parent = Vec::new();
        let mut lambda_unrelated = Vec::new();
        for &l in graph.offspring_indices() {
            let t = &self.taxa[l];
            alpha.push(
                t.alpha
                    .ok_or_else(|| anyhow!("taxon `{}`: missing alpha (needed to simulate)", t.name))?,
            );
            bandwidth.push(t.bandwidth.ok_or_else(|| {
                anyhow!("taxon `{}`: missing bandwidth (needed to simulate)", t.name)
            })?);
        }
        for &v in graph.parent_indices() {
            let t = &self.taxa[v];
            lambda_parent.push(
                t.lambda
                    .ok_or_else(|| anyhow!("taxon `{}`: missing lambda (needed to simulate)", t.name))?,
            );
        }
        for &j in graph.unrelated_indices() {
            let t = &self.taxa[j];
            lambda_unrelated.push(
                t.lambda
                    .ok_or_else(|| anyhow!("taxon `{}`: missing lambda (needed to simulate)", t.name))?,
            );
        }
        ParamVector::new(graph, alpha, bandwidth, lambda_parent, lambda_unrelated)
            .map_err(|e| anyhow!(e))
    }

    /// The config for one of the twelve built-in scenarios.
    pub fn from_scenario(sc: &macpp_core::simulate::Scenario, seed: u64) -> RunConfig {
        let graph = sc.graph();
        let params = sc.params(&graph);
        let mut taxa = Vec::new();
        for idx in 0..graph.n_taxa() {
            let pos = graph.role_position(idx);
            let t = match graph.role(idx) {
                Role::Parent => TaxonConfig {
                    name: graph.name(idx).into(),
                    role: RoleName::Parent,
                    parent: None,
                    lambda: Some(params.lambda_parent[pos]),
                    alpha: None,
                    bandwidth: None,
                },
                Role::Unrelated => TaxonConfig {
                    name: graph.name(idx).into(),
                    role: RoleName::Unrelated,
                    parent: None,
                    lambda: Some(params.lambda_unrelated[pos]),
                    alpha: None,
                    bandwidth: None,
                },
                Role::Offspring { parent } => TaxonConfig {
                    name: graph.name(idx).into(),
                    role: RoleName::Offspring,
                    parent: Some(graph.name(parent).into()),
                    lambda: None,
                    alpha: Some(params.alpha[pos]),
                    bandwidth: Some(params.bandwidth[pos]),
                },
            };
            taxa.push(t);
        }
        RunConfig {
            window: sc.window(),
            taxa,
            priors: PriorsConfig::default(),
            mcmc: McmcConfig {
                seed,
                ..McmcConfig::default()
            },
        }
    }
}

/// Load a config file, accepting either a plain `RunConfig` or a manifest
/// written by an earlier run (whose embedded config and seed are reused).
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: invalid JSON", path.display()))?;
    let config_value = if value.get("command").is_some() {
        value
            .get("config")
            .cloned()
            .ok_or_else(|| anyhow!("{}: manifest has no `config` block", path.display()))?
    } else {
        value
    };
    let config: RunConfig = serde_json::from_value(config_value)
        .map_err(|e| anyhow!("{}: {}", path.display(), path_to_field(&e)))?;
    config.mcmc.validate()?;
    config.priors.to_prior_spec()?;
    config.graph()?;
    Ok(config)
}

fn path_to_field(e: &serde_json::Error) -> String {
    // serde_json already reports the failing key and location
    e.to_string()
}
