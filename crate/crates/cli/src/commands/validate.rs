//! `macpp validate`: observed-versus-expected counts for a fitted model.
//! Reports, never judges: exit 0 whenever the artifacts are consistent.

use crate::commands::fit::{read_aligned_pattern, FitSummary};
use crate::manifest::{write_json, Manifest};
use anyhow::{anyhow, Context, Result};
use clap::Args;
use macpp_core::diagnostics::{expected_counts, CountValidation};
use macpp_core::inference::param_names;
use macpp_core::model::ParamVector;
use macpp_core::rng::derive_seed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Fit summary JSON (from `macpp fit`).
    #[arg(long, required_unless_present = "config")]
    pub summary: Option<PathBuf>,
    /// Pattern CSV; defaults to the pattern recorded in the fit summary.
    #[arg(long)]
    pub pattern: Option<PathBuf>,
    /// Re-run from an earlier validate manifest.
    #[arg(long, conflicts_with = "summary")]
    pub config: Option<PathBuf>,
    /// Drop out-of-window rows instead of failing.
    #[arg(long)]
    pub clip: bool,
    /// Output directory.
    #[arg(long, short = 'o', default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pattern: String,
    pub summary: String,
    pub validation: CountValidation,
}

pub fn run(args: &ValidateArgs) -> Result<()> {
    let (summary_path, pattern_override) = match (&args.summary, &args.config) {
        (Some(s), None) => (s.clone(), args.pattern.clone()),
        (None, Some(manifest_path)) => {
            let m = Manifest::load(manifest_path)?;
            let s = m
                .outputs
                .get("summary_input")
                .cloned()
                .ok_or_else(|| anyhow!("manifest does not record a summary input"))?;
            (
                PathBuf::from(s),
                args.pattern
                    .clone()
                    .or_else(|| m.pattern.map(PathBuf::from)),
            )
        }
        _ => return Err(anyhow!("either --summary or --config is required")),
    };

    let text = std::fs::read_to_string(&summary_path)
        .with_context(|| format!("cannot read summary {}", summary_path.display()))?;
    let summary: FitSummary =
        serde_json::from_str(&text).map_err(|e| anyhow!("{}: {e}", summary_path.display()))?;
    let config = summary.config.clone();
    let graph = config.graph()?;

    let pattern_path = match (pattern_override, &summary.pattern) {
        (Some(p), _) => p,
        (None, p) => PathBuf::from(p),
    };
    let (pattern, _) = read_aligned_pattern(&pattern_path, &config, args.clip)?;

    // artifact consistency: the summary's parameters must match the graph
    let expected_names = param_names(&graph);
    let got_names: Vec<String> = summary.params.iter().map(|s| s.name.clone()).collect();
    if got_names != expected_names {
        return Err(anyhow!(
            "artifact mismatch: summary parameters {got_names:?} do not match the configured graph {expected_names:?}"
        ));
    }
    let q = graph.offspring_indices().len();
    let p = graph.parent_indices().len();
    let means: Vec<f64> = summary.params.iter().map(|s| s.mean).collect();
    let estimate = ParamVector::new(
        &graph,
        means[0..q].to_vec(),
        means[q..2 * q].to_vec(),
        means[2 * q..2 * q + p].to_vec(),
        means[2 * q + p..].to_vec(),
    )?;

    let validation = expected_counts(
        &pattern,
        &graph,
        &estimate,
        config.mcmc.mc_integral_samples,
        derive_seed(summary.seed, &[0x7a11da7e]),
    )?;

    std::fs::create_dir_all(&args.out)?;
    let report = ValidationReport {
        pattern: pattern_path.display().to_string(),
        summary: summary_path.display().to_string(),
        validation,
    };
    write_json(&args.out.join("validation.json"), &report)?;

    let manifest = Manifest {
        command: "validate".into(),
        seed: summary.seed,
        config: Some(config),
        pattern: Some(pattern_path.display().to_string()),
        scenario: None,
        scenarios: None,
        outputs: BTreeMap::from([
            ("summary_input".into(), summary_path.display().to_string()),
            ("validation".into(), "validation.json".into()),
            ("manifest".into(), "manifest.json".into()),
        ]),
        counts: None,
        expected_counts: None,
        dropped_rows: None,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    for row in &report.validation.rows {
        match row.ratio {
            Some(r) => println!(
                "{}: observed {} expected {:.3} ratio {:.4}",
                row.taxon, row.observed, row.expected, r
            ),
            None => println!(
                "{}: observed {} expected {:.3} ratio n/a",
                row.taxon, row.observed, row.expected
            ),
        }
    }
    Ok(())
}
