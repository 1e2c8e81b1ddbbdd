//! `macpp simulate`: draw one dataset from a configured model or a built-in
//! scenario; write the pattern CSV plus a manifest with counts and
//! model-expected counts under the true parameters.

use crate::config::{load_config, RunConfig};
use crate::manifest::{write_json, Manifest};
use anyhow::{bail, Result};
use clap::Args;
use macpp_core::diagnostics::expected_counts;
use macpp_core::patterns::write_pattern_csv;
use macpp_core::simulate::{simulate_pattern, Scenario};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario id (1..=12).
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<u8>,
    /// Run configuration (or an earlier manifest) to simulate from.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, short = 'o', default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let (mut config, scenario_id): (RunConfig, Option<u8>) = match (&args.scenario, &args.config) {
        (Some(id), None) => {
            let sc = Scenario::table1(*id)?;
            (RunConfig::from_scenario(&sc, args.seed.unwrap_or(1)), Some(*id))
        }
        (None, Some(path)) => {
            // reruns from a manifest keep its scenario provenance
            let scenario_id = Manifest::load(path).ok().and_then(|m| m.scenario);
            (load_config(path)?, scenario_id)
        }
        _ => bail!("exactly one of --scenario and --config is required"),
    };
    if let Some(seed) = args.seed {
        config.mcmc.seed = seed;
    }
    let seed = config.mcmc.seed;

    let graph = config.graph()?;
    let params = config.params(&graph)?;
    let pattern = simulate_pattern(&graph, &params, &config.window, seed)?;

    std::fs::create_dir_all(&args.out)?;
    let pattern_file = "pattern.csv";
    write_pattern_csv(&pattern, &args.out.join(pattern_file))?;

    let validation = expected_counts(
        &pattern,
        &graph,
        &params,
        config.mcmc.mc_integral_samples,
        seed,
    )?;
    let mut counts = BTreeMap::new();
    let mut expected = BTreeMap::new();
    for row in &validation.rows {
        counts.insert(row.taxon.clone(), row.observed);
        expected.insert(row.taxon.clone(), row.expected);
    }

    let manifest = Manifest {
        command: "simulate".into(),
        seed,
        config: Some(config),
        pattern: None,
        scenario: scenario_id,
        scenarios: None,
        outputs: BTreeMap::from([
            ("pattern".into(), pattern_file.into()),
            ("manifest".into(), "manifest.json".into()),
        ]),
        counts: Some(counts),
        expected_counts: Some(expected),
        dropped_rows: None,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;

    println!(
        "simulated {} points over {} taxa (seed {seed}) -> {}",
        pattern.total(),
        pattern.n_taxa(),
        args.out.display()
    );
    Ok(())
}
