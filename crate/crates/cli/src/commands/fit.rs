//! `macpp fit`: posterior sampling for a pattern under a configured model.
//! Writes one draws CSV per chain, a JSON summary (pooled statistics,
//! acceptance rates, split R-hat, config echo), and a manifest.

use crate::config::{load_config, RunConfig};
use crate::manifest::{write_json, Manifest};
use anyhow::{anyhow, Result};
use clap::Args;
use macpp_core::inference::{fit, ParamSummary};
use macpp_core::patterns::{read_pattern_csv, MultitypePattern, OutOfWindowPolicy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Run configuration (or an earlier manifest).
    #[arg(long)]
    pub config: PathBuf,
    /// Pattern CSV; defaults to the pattern recorded in a manifest config.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Overrides the configured number of chains.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drop out-of-window rows instead of failing.
    #[arg(long)]
    pub clip: bool,
    /// Output directory.
    #[arg(long, short = 'o', default_value = "out")]
    pub out: PathBuf,
}

/// JSON summary of a fit: pooled posterior statistics plus chain
/// diagnostics, with the full configuration echoed for reproducibility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub seed: u64,
    pub pattern: String,
    pub n_chains: usize,
    pub dropped_rows: usize,
    pub params: Vec<ParamSummary>,
    /// Bandwidth-update acceptance rate per chain, keyed by offspring taxon.
    pub acceptance_rates: Vec<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhat: Option<BTreeMap<String, f64>>,
    pub flags: Vec<String>,
    pub config: RunConfig,
}

pub fn read_aligned_pattern(
    path: &Path,
    config: &RunConfig,
    clip: bool,
) -> Result<(MultitypePattern, usize)> {
    let graph = config.graph()?;
    let policy = if clip {
        OutOfWindowPolicy::Clip
    } else {
        OutOfWindowPolicy::Error
    };
    let outcome = read_pattern_csv(path, config.window.clone(), policy)?;
    let pattern = outcome
        .pattern
        .align_taxa(graph.taxa())
        .map_err(|e| anyhow!("pattern does not match the configured taxa: {e}"))?;
    Ok((pattern, outcome.dropped))
}

pub fn run(args: &FitArgs) -> Result<()> {
    let mut config = load_config(&args.config)?;
    let from_manifest = Manifest::load(&args.config).ok();
    if let Some(seed) = args.seed {
        config.mcmc.seed = seed;
    }
    if let Some(chains) = args.chains {
        config.mcmc.n_chains = chains;
        config.mcmc.validate()?;
    }
    let pattern_path = match (&args.pattern, from_manifest.as_ref().and_then(|m| m.pattern.clone()))
    {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(anyhow!("--pattern is required (or a manifest that records one)")),
    };

    let (pattern, dropped) = read_aligned_pattern(&pattern_path, &config, args.clip)?;
    let graph = config.graph()?;
    let priors = config.priors.to_prior_spec()?;
    let result = fit(&pattern, &graph, &priors, &config.mcmc)?;

    std::fs::create_dir_all(&args.out)?;
    let mut outputs = BTreeMap::new();
    for (i, chain) in result.chains.iter().enumerate() {
        let name = if result.chains.len() == 1 {
            "samples.csv".to_string()
        } else {
            format!("samples_chain{}.csv", i + 1)
        };
        chain.write_draws_csv(&args.out.join(&name))?;
        outputs.insert(format!("samples_chain{}", i + 1), name);
    }
    outputs.insert("summary".into(), "summary.json".into());
    outputs.insert("manifest".into(), "manifest.json".into());

    let rhat = result.rhat.as_ref().map(|rs| {
        result
            .param_names()
            .iter()
            .cloned()
            .zip(rs.iter().copied())
            .collect::<BTreeMap<String, f64>>()
    });
    let summary = FitSummary {
        seed: config.mcmc.seed,
        pattern: pattern_path.display().to_string(),
        n_chains: result.chains.len(),
        dropped_rows: dropped,
        params: result.pooled.clone(),
        acceptance_rates: result
            .chains
            .iter()
            .map(|c| c.acceptance_rate.iter().cloned().collect())
            .collect(),
        rhat,
        flags: result.chains.iter().flat_map(|c| c.flags.clone()).collect(),
        config: config.clone(),
    };
    write_json(&args.out.join("summary.json"), &summary)?;

    let manifest = Manifest {
        command: "fit".into(),
        seed: config.mcmc.seed,
        config: Some(config),
        pattern: Some(pattern_path.display().to_string()),
        scenario: None,
        scenarios: None,
        outputs,
        counts: None,
        expected_counts: None,
        dropped_rows: Some(dropped),
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    for s in &summary.params {
        println!(
            "{}: mean {:.6} sd {:.6} [{:.6}, {:.6}]",
            s.name, s.mean, s.sd, s.q025, s.q975
        );
    }
    for flag in &summary.flags {
        eprintln!("warning: {flag}");
    }
    Ok(())
}
