//! `macpp scenarios`: the benchmark sweep. Simulates and fits batches of
//! datasets per scenario and writes an estimator-quality table (CSV + JSON),
//! optionally with the Thomas minimum-contrast baseline columns.

use crate::config::PriorsConfig;
use crate::manifest::{write_json, Manifest, ScenariosSpec};
use anyhow::{anyhow, Result};
use clap::Args;
use macpp_core::diagnostics::MinContrastSettings;
use macpp_core::inference::McmcConfig;
use macpp_core::simulate::{run_scenario, write_report_csv, Scenario, ScenarioReport, ScenarioRunSettings};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Args)]
pub struct ScenariosArgs {
    /// Scenario ids: `3`, `1,2,5`, or `1..12` (inclusive).
    #[arg(long, required_unless_present = "config")]
    pub ids: Option<String>,
    /// Datasets per scenario.
    #[arg(long, required_unless_present = "config")]
    pub n: Option<usize>,
    /// Base seed for dataset simulation and fitting.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also run the Thomas minimum-contrast baseline on each offspring taxon.
    #[arg(long)]
    pub with_nsp: bool,
    /// Re-run from an earlier scenarios manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o', default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScenariosReportJson {
    pub reports: Vec<ScenarioReport>,
    /// Baseline failure rate per scenario id, when the baseline ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nsp_baseline: Option<BTreeMap<String, f64>>,
}

pub fn parse_ids(spec: &str) -> Result<Vec<u8>> {
    let spec = spec.trim();
    if let Some((a, b)) = spec.split_once("..") {
        let lo: u8 = a.trim().parse().map_err(|_| anyhow!("bad id range `{spec}`"))?;
        let hi: u8 = b.trim().parse().map_err(|_| anyhow!("bad id range `{spec}`"))?;
        if lo > hi {
            return Err(anyhow!("bad id range `{spec}`"));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u8>()
                .map_err(|_| anyhow!("bad scenario id `{s}`"))
        })
        .collect()
}

pub fn run(args: &ScenariosArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => {
            let m = Manifest::load(path)?;
            m.scenarios
                .ok_or_else(|| anyhow!("{}: not a scenarios manifest", path.display()))?
        }
        None => ScenariosSpec {
            ids: Vec::new(),
            n_datasets: 0,
            with_nsp: false,
            mcmc: McmcConfig::default(),
            priors: PriorsConfig::default(),
        },
    };
    if let Some(ids) = &args.ids {
        spec.ids = parse_ids(ids)?;
    }
    if let Some(n) = args.n {
        spec.n_datasets = n;
    }
    if let Some(seed) = args.seed {
        spec.mcmc.seed = seed;
    }
    if args.with_nsp {
        spec.with_nsp = true;
    }
    if spec.ids.is_empty() {
        return Err(anyhow!("no scenario ids given"));
    }

    // fail fast on unknown ids before any computation
    let scenarios: Vec<Scenario> = spec
        .ids
        .iter()
        .map(|&id| Scenario::table1(id).map_err(|e| anyhow!(e)))
        .collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(scenarios.len());
    for sc in &scenarios {
        let settings = ScenarioRunSettings {
            n_datasets: spec.n_datasets,
            base_seed: spec.mcmc.seed,
            priors: spec.priors.to_prior_spec()?,
            mcmc: spec.mcmc.clone(),
            with_nsp: spec.with_nsp,
            nsp: MinContrastSettings::default(),
        };
        let report = run_scenario(sc, &settings)?;
        println!(
            "scenario {}: {} datasets, {} fit failures{}",
            sc.id,
            report.n_datasets,
            report.n_failed,
            report
                .nsp_failure_rate
                .map(|f| format!(", baseline failure rate {:.1}%", 100.0 * f))
                .unwrap_or_default()
        );
        reports.push(report);
    }

    std::fs::create_dir_all(&args.out)?;
    write_report_csv(&reports, &args.out.join("report.csv"))?;
    let nsp_baseline = if spec.with_nsp {
        Some(
            reports
                .iter()
                .filter_map(|r| r.nsp_failure_rate.map(|f| (r.scenario.to_string(), f)))
                .collect(),
        )
    } else {
        None
    };
    write_json(
        &args.out.join("report.json"),
        &ScenariosReportJson {
            reports,
            nsp_baseline,
        },
    )?;

    let manifest = Manifest {
        command: "scenarios".into(),
        seed: spec.mcmc.seed,
        config: None,
        pattern: None,
        scenario: None,
        scenarios: Some(spec),
        outputs: BTreeMap::from([
            ("report_csv".into(), "report.csv".into()),
            ("report_json".into(), "report.json".into()),
            ("manifest".into(), "manifest.json".into()),
        ]),
        counts: None,
        expected_counts: None,
        dropped_rows: None,
    };
    write_json(&args.out.join("manifest.json"), &manifest)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::parse_ids;

    #[test]
    fn id_specs() {
        assert_eq!(parse_ids("3").unwrap(), vec![3]);
        assert_eq!(parse_ids("1,2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_ids("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert!(parse_ids("4..1").is_err());
        assert!(parse_ids("x").is_err());
    }
}
