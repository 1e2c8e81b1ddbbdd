//! Generative sampler for the layered cluster model and the twelve-scenario
//! simulation harness.
//!
//! Parents and unrelated taxa are homogeneous Poisson in the window.
//! Offspring counts per parent are Poisson(alpha) with Gaussian scatter and
//! post-hoc window clipping (the canonical Thomas construction), so the mean
//! offspring per parent is exact before clipping. Parents outside the window
//! are never generated; the fitted model conditions on observed parents only,
//! so buffer-zone parents would create model mismatch.

use crate::diagnostics::{thomas_min_contrast, MinContrastSettings, ThomasFit};
use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::inference::{fit, param_names, McmcConfig};
use crate::model::{ModelGraph, ParamVector, Role};
use crate::patterns::MultitypePattern;
use crate::priors::PriorSpec;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{mean, sd};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn draw_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as usize
}

fn uniform_in_window<R: Rng + ?Sized>(window: &Window, rng: &mut R) -> Point {
    let (xmin, xmax, ymin, ymax) = window.bounding_box();
    loop {
        let p = Point::new(
            xmin + (xmax - xmin) * rng.random::<f64>(),
            ymin + (ymax - ymin) * rng.random::<f64>(),
        );
        // rectangles accept immediately; polygons reject from the bbox
        if window.contains(p) {
            return p;
        }
    }
}

/// Scatter Poisson(alpha) offspring around each parent with isotropic
/// Gaussian displacement, keeping the points that land in the window.
fn scatter_offspring<R: Rng + ?Sized>(
    parents: &[Point],
    alpha: f64,
    h: f64,
    window: &Window,
    rng: &mut R,
) -> Vec<Point> {
    let mut out = Vec::new();
    for c in parents {
        let m = draw_poisson(alpha, rng);
        for _ in 0..m {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            let p = Point::new(c.x + h * zx, c.y + h * zy);
            if window.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Draw one multitype pattern from the model. Taxa are generated in
/// topological order so every parent process is realized before its
/// offspring; the returned pattern lists points grouped by taxon index.
pub fn simulate_pattern(
    graph: &ModelGraph,
    params: &ParamVector,
    window: &Window,
    seed: u64,
) -> Result<MultitypePattern> {
    let mut rng = rng_from_seed(seed);
    let area = window.area();
    let mut per_taxon: Vec<Vec<Point>> = vec![Vec::new(); graph.n_taxa()];

    for &idx in graph.topo_order() {
        let pos = graph.role_position(idx);
        per_taxon[idx] = match graph.role(idx) {
            Role::Parent => {
                let n = draw_poisson(params.lambda_parent[pos] * area, &mut rng);
                (0..n).map(|_| uniform_in_window(window, &mut rng)).collect()
            }
            Role::Unrelated => {
                let n = draw_poisson(params.lambda_unrelated[pos] * area, &mut rng);
                (0..n).map(|_| uniform_in_window(window, &mut rng)).collect()
            }
            Role::Offspring { parent } => scatter_offspring(
                &per_taxon[parent],
                params.alpha[pos],
                params.bandwidth[pos],
                window,
                &mut rng,
            ),
        };
    }

    let mut points = Vec::new();
    for (idx, pts) in per_taxon.into_iter().enumerate() {
        points.extend(pts.into_iter().map(|p| (p, idx)));
    }
    MultitypePattern::new(window.clone(), graph.taxa().to_vec(), points)
}

/// One of the twelve benchmark scenarios: two offspring taxa B and C around
/// the single parent taxon A, optionally with an unrelated taxon D.
/// Offspring density is Sparse (1.5, 1), Dense (4, 3), or Mixed (4, 1);
/// bandwidths are Low (0.01, 0.02) or High (0.1, 0.01). The parent intensity
/// is 150 and the unrelated intensity 95, on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u8,
    pub unrelated_present: bool,
    pub alphas: (f64, f64),
    pub bandwidths: (f64, f64),
    pub lambda_parent: f64,
    pub lambda_unrelated: f64,
}

impl Scenario {
    pub fn table1(id: u8) -> Result<Scenario> {
        if !(1..=12).contains(&id) {
            return Err(Error::InvalidConfig(format!(
                "unknown scenario {id}; valid ids are 1..=12"
            )));
        }
        let unrelated_present = id > 6;
        let base = (id - 1) % 6; // 0..5 over (density, bandwidth)
        let alphas = match base / 2 {
            0 => (1.5, 1.0), // Sparse
            1 => (4.0, 3.0), // Dense
            _ => (4.0, 1.0), // Mixed
        };
        let bandwidths = if base % 2 == 0 { (0.01, 0.02) } else { (0.1, 0.01) };
        Ok(Scenario {
            id,
            unrelated_present,
            alphas,
            bandwidths,
            lambda_parent: 150.0,
            lambda_unrelated: 95.0,
        })
    }

    pub fn window(&self) -> Window {
        Window::unit_square()
    }

    pub fn graph(&self) -> ModelGraph {
        let mut taxa: Vec<String> = vec!["A".into(), "B".into(), "C".into()];
        let mut roles = vec![
            Role::Parent,
            Role::Offspring { parent: 0 },
            Role::Offspring { parent: 0 },
        ];
        if self.unrelated_present {
            taxa.push("D".into());
            roles.push(Role::Unrelated);
        }
        ModelGraph::new(taxa, roles).expect("scenario graph is valid")
    }

    pub fn params(&self, graph: &ModelGraph) -> ParamVector {
        let lambda_unrelated = if self.unrelated_present {
            vec![self.lambda_unrelated]
        } else {
            vec![]
        };
        ParamVector::new(
            graph,
            vec![self.alphas.0, self.alphas.1],
            vec![self.bandwidths.0, self.bandwidths.1],
            vec![self.lambda_parent],
            lambda_unrelated,
        )
        .expect("scenario parameters are valid")
    }

    /// True values keyed by parameter column name.
    pub fn true_values(&self) -> Vec<(String, f64)> {
        let graph = self.graph();
        let params = self.params(&graph);
        let names = param_names(&graph);
        let mut truth = Vec::with_capacity(names.len());
        let mut vals = params.alpha.clone();
        vals.extend(&params.bandwidth);
        vals.extend(&params.lambda_parent);
        vals.extend(&params.lambda_unrelated);
        for (n, v) in names.into_iter().zip(vals) {
            truth.push((n, v));
        }
        truth
    }
}

/// Baseline columns for one parameter: minimum-contrast estimates over the
/// datasets where the fit converged.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NspColumn {
    pub est: f64,
    pub se: f64,
}

/// Aggregated estimator quality for one parameter of one scenario:
/// EST = mean of posterior means, SD = mean of posterior standard
/// deviations, SE = standard deviation of the posterior means across
/// datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamReport {
    pub parameter: String,
    pub truth: f64,
    pub est: f64,
    pub sd: f64,
    pub se: f64,
    pub nsp: Option<NspColumn>,
}

/// Scenario-level report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: u8,
    pub n_datasets: usize,
    /// Datasets whose model fit failed (recorded, not fatal).
    pub n_failed: usize,
    pub params: Vec<ParamReport>,
    /// Fraction of baseline minimum-contrast fits that failed to converge,
    /// when the baseline ran.
    pub nsp_failure_rate: Option<f64>,
}

/// Harness settings for `run_scenario`.
#[derive(Debug, Clone)]
pub struct ScenarioRunSettings {
    pub n_datasets: usize,
    pub base_seed: u64,
    pub priors: PriorSpec,
    pub mcmc: McmcConfig,
    pub with_nsp: bool,
    pub nsp: MinContrastSettings,
}

impl ScenarioRunSettings {
    pub fn new(n_datasets: usize, base_seed: u64) -> Self {
        ScenarioRunSettings {
            n_datasets,
            base_seed,
            priors: PriorSpec::simulation_default(),
            mcmc: McmcConfig::default(),
            with_nsp: false,
            nsp: MinContrastSettings::default(),
        }
    }
}

struct DatasetOutcome {
    /// Posterior (mean, sd) per parameter, when the fit succeeded.
    fit: Option<Vec<(f64, f64)>>,
    /// Baseline fits per offspring taxon, in offspring order.
    nsp: Vec<ThomasFit>,
}

/// Simulate `n_datasets` independent datasets from a scenario, fit each one,
/// and aggregate estimator quality per parameter. Dataset jobs run in a
/// worker pool with derived seeds; aggregation is order-independent.
pub fn run_scenario(scenario: &Scenario, settings: &ScenarioRunSettings) -> Result<ScenarioReport> {
    if settings.n_datasets < 2 {
        return Err(Error::InvalidConfig(
            "a scenario run needs at least 2 datasets".into(),
        ));
    }
    settings.mcmc.validate()?;
    settings.priors.validate()?;

    let graph = scenario.graph();
    let params = scenario.params(&graph);
    let window = scenario.window();
    let names = param_names(&graph);

    let outcomes: Vec<DatasetOutcome> = (0..settings.n_datasets)
        .into_par_iter()
        .map(|d| {
            let sim_seed = derive_seed(settings.base_seed, &[scenario.id as u64, d as u64, 0]);
            let fit_seed = derive_seed(settings.base_seed, &[scenario.id as u64, d as u64, 1]);
            let pattern = simulate_pattern(&graph, &params, &window, sim_seed)
                .expect("scenario parameters are valid");
            let mcmc = McmcConfig {
                seed: fit_seed,
                ..settings.mcmc.clone()
            };
            let fit_outcome = fit(&pattern, &graph, &settings.priors, &mcmc)
                .ok()
                .map(|f| f.pooled.iter().map(|s| (s.mean, s.sd)).collect());
            let nsp = if settings.with_nsp {
                graph
                    .offspring_indices()
                    .iter()
                    .map(|&l| {
                        thomas_min_contrast(&pattern.points_of(l), &window, &settings.nsp)
                            .expect("offspring patterns have enough points")
                    })
                    .collect()
            } else {
                Vec::new()
            };
            DatasetOutcome {
                fit: fit_outcome,
                nsp,
            }
        })
        .collect();

    let n_failed = outcomes.iter().filter(|o| o.fit.is_none()).count();

    // aggregate posterior means and sds per parameter over successful fits
    let mut est_cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut sd_cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for o in &outcomes {
        if let Some(stats) = &o.fit {
            for (j, (m, s)) in stats.iter().enumerate() {
                est_cols[j].push(*m);
                sd_cols[j].push(*s);
            }
        }
    }

    // baseline columns: per offspring taxon k, mu -> alpha, sigma -> h, and
    // kappa estimates pool into the parent intensity row
    let q = graph.offspring_indices().len();
    let mut nsp_mu: Vec<Vec<f64>> = vec![Vec::new(); q];
    let mut nsp_sigma: Vec<Vec<f64>> = vec![Vec::new(); q];
    let mut nsp_kappa: Vec<f64> = Vec::new();
    let mut nsp_total = 0usize;
    let mut nsp_failures = 0usize;
    for o in &outcomes {
        for (k, f) in o.nsp.iter().enumerate() {
            nsp_total += 1;
            if f.converged {
                nsp_mu[k].push(f.mu);
                nsp_sigma[k].push(f.sigma);
                nsp_kappa.push(f.kappa);
            } else {
                nsp_failures += 1;
            }
        }
    }
    let nsp_col = |vals: &[f64]| -> Option<NspColumn> {
        if vals.is_empty() {
            None
        } else {
            Some(NspColumn {
                est: mean(vals),
                se: if vals.len() > 1 { sd(vals) } else { 0.0 },
            })
        }
    };

    let truths = scenario.true_values();
    let mut params_out = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let truth = truths
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .expect("every parameter has a true value");
        let nsp = if settings.with_nsp {
            if let Some(k) = (0..q).find(|&k| name == &format!("alpha_{}", graph.name(graph.offspring_indices()[k]))) {
                nsp_col(&nsp_mu[k])
            } else if let Some(k) = (0..q).find(|&k| name == &format!("h_{}", graph.name(graph.offspring_indices()[k]))) {
                nsp_col(&nsp_sigma[k])
            } else if name.starts_with("lambdaC_") {
                nsp_col(&nsp_kappa)
            } else {
                None
            }
        } else {
            None
        };
        params_out.push(ParamReport {
            parameter: name.clone(),
            truth,
            est: mean(&est_cols[j]),
            sd: mean(&sd_cols[j]),
            se: if est_cols[j].len() > 1 { sd(&est_cols[j]) } else { 0.0 },
            nsp,
        });
    }

    Ok(ScenarioReport {
        scenario: scenario.id,
        n_datasets: settings.n_datasets,
        n_failed,
        params: params_out,
        nsp_failure_rate: if settings.with_nsp && nsp_total > 0 {
            Some(nsp_failures as f64 / nsp_total as f64)
        } else {
            None
        },
    })
}

/// Write scenario reports as CSV shaped like the benchmark table: one row
/// per (scenario, parameter), with baseline columns when present.
pub fn write_report_csv(reports: &[ScenarioReport], path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    writeln!(
        w,
        "scenario,parameter,truth,est,sd,se,fail_pct,nsp_est,nsp_se,nsp_fail_pct"
    )
    .map_err(io_err)?;
    for r in reports {
        let fail_pct = 100.0 * r.n_failed as f64 / r.n_datasets as f64;
        let nsp_fail = r
            .nsp_failure_rate
            .map(|f| (100.0 * f).to_string())
            .unwrap_or_default();
        for p in &r.params {
            let (nsp_est, nsp_se) = match &p.nsp {
                Some(c) => (c.est.to_string(), c.se.to_string()),
                None => (String::new(), String::new()),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.scenario, p.parameter, p.truth, p.est, p.sd, p.se, fail_pct, nsp_est, nsp_se, nsp_fail
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}
