//! MCMC engine: conjugate Gibbs updates for offspring densities and
//! intensities, random-walk Metropolis for bandwidths, chain management,
//! summaries, and convergence checks.
//!
//! Sweep order per iteration: all alphas (Gibbs), all parent intensities
//! (Gibbs), all unrelated intensities (Gibbs), all bandwidths (Metropolis).
//! Kernel window masses are recomputed only when the corresponding bandwidth
//! moves. Everything is deterministic for a fixed seed.

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::kernel::{mass_rect, window_mass};
use crate::likelihood::check_alignment;
use crate::model::{ModelGraph, ParamVector, Role};
use crate::patterns::MultitypePattern;
use crate::priors::{BandwidthPrior, GammaParams, PriorSpec};
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{mean, quantile_sorted, sd, split_rhat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Kernel sums below this log value count as zero intensity at a data point
/// (the naive density sum would underflow to 0.0).
const LOG_ZERO_INTENSITY: f64 = -745.0;

/// Chain configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub n_iterations: usize,
    pub n_burnin: usize,
    pub thin: usize,
    /// Random-walk proposal scale per offspring taxon; `None` uses the
    /// default (bandwidth-prior median / 5).
    pub proposal_sd: Option<Vec<f64>>,
    pub seed: u64,
    pub n_chains: usize,
    /// Sample count for each Monte Carlo window-mass integral (polygon
    /// windows only; rectangles use the exact path).
    pub mc_integral_samples: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            n_iterations: 10_000,
            n_burnin: 2_000,
            thin: 1,
            proposal_sd: None,
            seed: 1,
            n_chains: 1,
            mc_integral_samples: 1_000,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_burnin >= self.n_iterations {
            return Err(Error::InvalidConfig(format!(
                "n_burnin ({}) must be smaller than n_iterations ({})",
                self.n_burnin, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be >= 1".into()));
        }
        if self.n_chains == 0 {
            return Err(Error::InvalidConfig("n_chains must be >= 1".into()));
        }
        if self.mc_integral_samples == 0 {
            return Err(Error::InvalidConfig("mc_integral_samples must be >= 1".into()));
        }
        if let Some(sds) = &self.proposal_sd {
            if sds.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
                return Err(Error::InvalidConfig(
                    "proposal_sd entries must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of retained draws per chain.
    pub fn n_retained(&self) -> usize {
        (self.n_iterations - self.n_burnin) / self.thin
    }
}

/// Posterior summary for one scalar parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q500: f64,
    pub q975: f64,
}

fn summarize(name: &str, draws: &[f64]) -> ParamSummary {
    let mut sorted = draws.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ParamSummary {
        name: name.to_string(),
        mean: mean(draws),
        sd: sd(draws),
        q025: quantile_sorted(&sorted, 0.025),
        q500: quantile_sorted(&sorted, 0.5),
        q975: quantile_sorted(&sorted, 0.975),
    }
}

/// Draws from one chain, post burn-in and thinned, with acceptance rates for
/// the Metropolis bandwidth updates and per-parameter summaries.
#[derive(Debug, Clone)]
pub struct PosteriorSamples {
    pub param_names: Vec<String>,
    /// `draws[k][j]`: retained draw `k`, parameter `j`.
    pub draws: Vec<Vec<f64>>,
    /// Per offspring taxon: `(name, accepted / n_iterations)`.
    pub acceptance_rate: Vec<(String, f64)>,
    pub summaries: Vec<ParamSummary>,
    pub seed: u64,
    /// Diagnostics worth surfacing (e.g. acceptance rate outside (0.05, 0.8)).
    pub flags: Vec<String>,
}

impl PosteriorSamples {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|row| row[j]).collect()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    /// Write draws as CSV: one column per parameter, one row per draw.
    pub fn write_draws_csv(&self, path: &std::path::Path) -> Result<()> {
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
        writeln!(w, "{}", self.param_names.join(",")).map_err(io_err)?;
        for row in &self.draws {
            let line = row
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}").map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

/// Multi-chain fit: per-chain samples, pooled summaries, and (for two or more
/// chains) split potential-scale-reduction factors.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub chains: Vec<PosteriorSamples>,
    pub pooled: Vec<ParamSummary>,
    pub rhat: Option<Vec<f64>>,
}

impl FitResult {
    pub fn param_names(&self) -> &[String] {
        &self.chains[0].param_names
    }

    pub fn pooled_summary(&self, name: &str) -> Option<&ParamSummary> {
        self.pooled.iter().find(|s| s.name == name)
    }

    /// Posterior-mean parameter vector, for validation and reporting.
    pub fn point_estimate(&self, graph: &ModelGraph) -> Result<ParamVector> {
        let q = graph.offspring_indices().len();
        let p = graph.parent_indices().len();
        let u = graph.unrelated_indices().len();
        let means: Vec<f64> = self.pooled.iter().map(|s| s.mean).collect();
        if means.len() != 2 * q + p + u {
            return Err(Error::InvalidParameter(
                "fit result does not match the graph".into(),
            ));
        }
        ParamVector::new(
            graph,
            means[0..q].to_vec(),
            means[q..2 * q].to_vec(),
            means[2 * q..2 * q + p].to_vec(),
            means[2 * q + p..].to_vec(),
        )
    }
}

/// Parameter column names for a graph, in chain layout order: alphas,
/// bandwidths, parent intensities, unrelated intensities.
pub fn param_names(graph: &ModelGraph) -> Vec<String> {
    let mut names = Vec::new();
    for &l in graph.offspring_indices() {
        names.push(format!("alpha_{}", graph.name(l)));
    }
    for &l in graph.offspring_indices() {
        names.push(format!("h_{}", graph.name(l)));
    }
    for &v in graph.parent_indices() {
        names.push(format!("lambdaC_{}", graph.name(v)));
    }
    for &j in graph.unrelated_indices() {
        names.push(format!("lambda_{}", graph.name(j)));
    }
    names
}

/// Full conditional for an offspring density: `Gamma(a + n, b + sum of
/// window masses over the observed parents)`.
pub fn alpha_posterior(prior: GammaParams, n_offspring: usize, mass_sum: f64) -> GammaParams {
    GammaParams {
        shape: prior.shape + n_offspring as f64,
        rate: prior.rate + mass_sum,
    }
}

/// Full conditional for a homogeneous intensity: `Gamma(a + n, b + |W|)`.
pub fn lambda_posterior(prior: GammaParams, n_points: usize, area: f64) -> GammaParams {
    GammaParams {
        shape: prior.shape + n_points as f64,
        rate: prior.rate + area,
    }
}

/// Draw from a shape-rate Gamma. Draws are floored at the smallest positive
/// normal so downstream positivity invariants hold even when tiny shapes
/// underflow.
pub fn draw_gamma<R: Rng + ?Sized>(g: GammaParams, rng: &mut R) -> f64 {
    let dist = Gamma::new(g.shape, 1.0 / g.rate).expect("valid gamma parameters");
    dist.sample(rng).max(f64::MIN_POSITIVE)
}

/// Gibbs update for the offspring density of `taxon`: returns the full
/// conditional and one draw. Masses are evaluated at bandwidth `h` (exact
/// for rectangle windows, Monte Carlo seeded by `mass_seed` otherwise).
pub fn gibbs_alpha<R: Rng + ?Sized>(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    taxon: &str,
    h: f64,
    priors: &PriorSpec,
    mc_samples: usize,
    mass_seed: u64,
    rng: &mut R,
) -> Result<(GammaParams, f64)> {
    check_alignment(pattern, graph)?;
    let idx = graph
        .taxon_index(taxon)
        .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))?;
    let Role::Offspring { parent } = graph.role(idx) else {
        return Err(Error::Role(taxon.to_string()));
    };
    let mut mass_sum = 0.0;
    for (j, c) in pattern.points_of(parent).iter().enumerate() {
        let seed = derive_seed(mass_seed, &[j as u64]);
        mass_sum += window_mass(*c, h, pattern.window(), mc_samples, seed)?.value;
    }
    let post = alpha_posterior(priors.gamma_alpha, pattern.count_by_index(idx), mass_sum);
    let draw = draw_gamma(post, rng);
    Ok((post, draw))
}

/// Gibbs update for a homogeneous intensity (parent-only or unrelated
/// taxon): returns the full conditional and one draw.
pub fn gibbs_lambda<R: Rng + ?Sized>(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    taxon: &str,
    priors: &PriorSpec,
    rng: &mut R,
) -> Result<(GammaParams, f64)> {
    check_alignment(pattern, graph)?;
    let idx = graph
        .taxon_index(taxon)
        .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))?;
    let prior = match graph.role(idx) {
        Role::Parent => priors.gamma_parent,
        Role::Unrelated => priors.gamma_unrelated,
        Role::Offspring { .. } => return Err(Error::Role(taxon.to_string())),
    };
    let post = lambda_posterior(prior, pattern.count_by_index(idx), pattern.window().area());
    let draw = draw_gamma(post, rng);
    Ok((post, draw))
}

/// State of one offspring taxon's bandwidth-dependent quantities.
#[derive(Debug, Clone)]
struct BandwidthEval {
    mass_sum: f64,
    /// Sum over the taxon's data points of log kernel sums; -inf when some
    /// point has zero intensity at machine precision.
    data_log_kernel_sum: f64,
}

impl BandwidthEval {
    /// Offspring-restricted log-likelihood terms that involve the bandwidth:
    /// `-alpha * sum(masses) + sum_y log sum_c k(y - c, h)` (the `log alpha`
    /// factors cancel in Metropolis ratios and are omitted).
    fn restricted_loglik(&self, alpha: f64) -> f64 {
        -alpha * self.mass_sum + self.data_log_kernel_sum
    }
}

/// Immutable per-offspring structures for fast bandwidth evaluations.
struct OffspringBlock {
    taxon: usize,
    n_points: usize,
    parents: Vec<Point>,
    /// Per offspring point: squared distances to every parent, ascending.
    d2_rows: Vec<Vec<f64>>,
}

impl OffspringBlock {
    fn new(pattern: &MultitypePattern, graph: &ModelGraph, taxon: usize) -> Self {
        let parent = graph.parent_of(taxon).expect("offspring taxon");
        let parents = pattern.points_of(parent);
        let mut d2_rows = Vec::new();
        for (y, t) in pattern.points() {
            if *t != taxon {
                continue;
            }
            let mut row: Vec<f64> = parents.iter().map(|c| y.dist2(*c)).collect();
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            d2_rows.push(row);
        }
        OffspringBlock {
            taxon,
            n_points: d2_rows.len(),
            parents,
            d2_rows,
        }
    }

    /// Evaluate masses and the data log-kernel-sum at bandwidth `h`.
    /// `iteration` keys the Monte Carlo stream for polygon windows.
    fn evaluate(
        &self,
        h: f64,
        window: &Window,
        mc_samples: usize,
        chain_seed: u64,
        iteration: u64,
    ) -> BandwidthEval {
        let mass_sum: f64 = match window {
            Window::Rect { .. } => self
                .parents
                .iter()
                .map(|c| mass_rect(*c, h, window).expect("positive bandwidth").value)
                .sum(),
            Window::Polygon { .. } => self
                .parents
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let seed = derive_seed(chain_seed, &[iteration, j as u64]);
                    window_mass(*c, h, window, mc_samples, seed)
                        .expect("positive bandwidth")
                        .value
                })
                .sum(),
        };

        let inv2h2 = 1.0 / (2.0 * h * h);
        let ln_norm = -(2.0 * std::f64::consts::PI * h * h).ln();
        let mut data_log_kernel_sum = 0.0;
        for row in &self.d2_rows {
            if row.is_empty() {
                data_log_kernel_sum = f64::NEG_INFINITY;
                break;
            }
            // log-sum-exp over sorted squared distances; terms more than
            // e^-80 below the leading one cannot move the double sum
            let z0 = row[0] * inv2h2;
            let mut s = 0.0;
            for &d2 in row {
                let z = d2 * inv2h2 - z0;
                if z > 80.0 {
                    break;
                }
                s += (-z).exp();
            }
            let row_log = -z0 + s.ln() + ln_norm;
            if row_log < LOG_ZERO_INTENSITY {
                data_log_kernel_sum = f64::NEG_INFINITY;
                break;
            }
            data_log_kernel_sum += row_log;
        }
        BandwidthEval {
            mass_sum,
            data_log_kernel_sum,
        }
    }
}

/// Outcome of one random-walk Metropolis bandwidth step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhStep {
    pub proposed: f64,
    pub accepted: bool,
    /// Bandwidth after the step (the proposal if accepted, else unchanged).
    pub value: f64,
}

/// Shared Metropolis decision: propose `Normal(h, sd^2)`, reject nonpositive
/// proposals outright, otherwise accept with probability `min(R, 1)` where
/// `log R` sums the restricted log-likelihood and log-prior differences.
fn mh_decide<R: Rng + ?Sized>(
    rng: &mut R,
    h: f64,
    proposal_sd: f64,
    prior: &BandwidthPrior,
    alpha: f64,
    current: &BandwidthEval,
    eval: impl FnOnce(f64) -> BandwidthEval,
) -> (MhStep, Option<BandwidthEval>) {
    let z: f64 = rng.sample(StandardNormal);
    let proposed = h + proposal_sd * z;
    if proposed <= 0.0 {
        return (
            MhStep {
                proposed,
                accepted: false,
                value: h,
            },
            None,
        );
    }
    let cand = eval(proposed);
    let log_ratio = cand.restricted_loglik(alpha) + prior.log_density(proposed)
        - current.restricted_loglik(alpha)
        - prior.log_density(h);
    let accepted = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
    if accepted {
        (
            MhStep {
                proposed,
                accepted: true,
                value: proposed,
            },
            Some(cand),
        )
    } else {
        (
            MhStep {
                proposed,
                accepted: false,
                value: h,
            },
            None,
        )
    }
}

/// One standalone Metropolis bandwidth step for `taxon`, building its
/// evaluation structures from scratch. The chain sweep uses the same decision
/// rule with cached structures.
#[allow(clippy::too_many_arguments)]
pub fn mh_bandwidth<R: Rng + ?Sized>(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    taxon: &str,
    current_h: f64,
    alpha: f64,
    priors: &PriorSpec,
    proposal_sd: f64,
    mc_samples: usize,
    mass_seed: u64,
    rng: &mut R,
) -> Result<MhStep> {
    check_alignment(pattern, graph)?;
    if !(current_h > 0.0) {
        return Err(Error::NonPositiveBandwidth(current_h));
    }
    if proposal_sd < 0.0 {
        return Err(Error::InvalidParameter("proposal_sd must be >= 0".into()));
    }
    let idx = graph
        .taxon_index(taxon)
        .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))?;
    if !matches!(graph.role(idx), Role::Offspring { .. }) {
        return Err(Error::Role(taxon.to_string()));
    }
    let block = OffspringBlock::new(pattern, graph, idx);
    let current = block.evaluate(current_h, pattern.window(), mc_samples, mass_seed, 0);
    let (step, _) = mh_decide(
        rng,
        current_h,
        proposal_sd,
        &priors.bandwidth,
        alpha,
        &current,
        |h| block.evaluate(h, pattern.window(), mc_samples, mass_seed, 1),
    );
    Ok(step)
}

/// Immutable chain setup shared across chains.
struct ChainSetup<'a> {
    pattern: &'a MultitypePattern,
    graph: &'a ModelGraph,
    priors: &'a PriorSpec,
    config: &'a McmcConfig,
    area: f64,
    counts: Vec<usize>,
    blocks: Vec<OffspringBlock>,
    proposal_sd: Vec<f64>,
    h_init: Vec<f64>,
    names: Vec<String>,
}

impl<'a> ChainSetup<'a> {
    fn new(
        pattern: &'a MultitypePattern,
        graph: &'a ModelGraph,
        priors: &'a PriorSpec,
        config: &'a McmcConfig,
    ) -> Result<Self> {
        config.validate()?;
        priors.validate()?;
        check_alignment(pattern, graph)?;

        let q = graph.offspring_indices().len();
        let proposal_sd = match &config.proposal_sd {
            Some(sds) => {
                if sds.len() != q {
                    return Err(Error::InvalidConfig(format!(
                        "proposal_sd has {} entries for {} offspring taxa",
                        sds.len(),
                        q
                    )));
                }
                sds.clone()
            }
            None => vec![priors.bandwidth.median() / 5.0; q],
        };
        let blocks: Vec<OffspringBlock> = graph
            .offspring_indices()
            .iter()
            .map(|&l| OffspringBlock::new(pattern, graph, l))
            .collect();
        let h_init = vec![priors.bandwidth.median(); q];

        // the initial state must have positive likelihood
        for (k, block) in blocks.iter().enumerate() {
            let eval = block.evaluate(
                h_init[k],
                pattern.window(),
                config.mc_integral_samples,
                derive_seed(config.seed, &[u64::MAX]),
                0,
            );
            if block.n_points > 0 && eval.data_log_kernel_sum == f64::NEG_INFINITY {
                return Err(Error::Initialization(format!(
                    "offspring taxon `{}` has points with zero intensity at the initial bandwidth \
                     {} (no parent point within reach)",
                    graph.name(block.taxon),
                    h_init[k]
                )));
            }
        }

        Ok(ChainSetup {
            pattern,
            graph,
            priors,
            config,
            area: pattern.window().area(),
            counts: pattern.counts(),
            blocks,
            proposal_sd,
            h_init,
            names: param_names(graph),
        })
    }

    fn run(&self, chain_seed: u64) -> PosteriorSamples {
        let graph = self.graph;
        let q = graph.offspring_indices().len();
        let p = graph.parent_indices().len();
        let u = graph.unrelated_indices().len();
        let mut rng: ChaCha8Rng = rng_from_seed(chain_seed);

        // initial values: counts-based intensities, prior-median bandwidths
        let mut alpha: Vec<f64> = graph
            .offspring_indices()
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let n_parent = self.blocks[k].parents.len().max(1);
                (self.counts[l] as f64 / n_parent as f64).max(1e-8)
            })
            .collect();
        let mut h = self.h_init.clone();
        let mut lambda_parent: Vec<f64> = graph
            .parent_indices()
            .iter()
            .map(|&v| (self.counts[v] as f64 / self.area).max(1e-8))
            .collect();
        let mut lambda_unrelated: Vec<f64> = graph
            .unrelated_indices()
            .iter()
            .map(|&j| (self.counts[j] as f64 / self.area).max(1e-8))
            .collect();

        let mut evals: Vec<BandwidthEval> = (0..q)
            .map(|k| {
                self.blocks[k].evaluate(
                    h[k],
                    self.pattern.window(),
                    self.config.mc_integral_samples,
                    chain_seed,
                    0,
                )
            })
            .collect();

        let n_iter = self.config.n_iterations;
        let mut draws: Vec<Vec<f64>> = Vec::with_capacity(self.config.n_retained());
        let mut accepted = vec![0usize; q];

        for t in 1..=n_iter {
            // offspring densities
            for k in 0..q {
                let l = graph.offspring_indices()[k];
                let post =
                    alpha_posterior(self.priors.gamma_alpha, self.counts[l], evals[k].mass_sum);
                alpha[k] = draw_gamma(post, &mut rng);
            }
            // parent intensities
            for (k, &v) in graph.parent_indices().iter().enumerate() {
                let post = lambda_posterior(self.priors.gamma_parent, self.counts[v], self.area);
                lambda_parent[k] = draw_gamma(post, &mut rng);
            }
            // unrelated intensities
            for (k, &j) in graph.unrelated_indices().iter().enumerate() {
                let post =
                    lambda_posterior(self.priors.gamma_unrelated, self.counts[j], self.area);
                lambda_unrelated[k] = draw_gamma(post, &mut rng);
            }
            // bandwidths
            for k in 0..q {
                let (step, cand) = mh_decide(
                    &mut rng,
                    h[k],
                    self.proposal_sd[k],
                    &self.priors.bandwidth,
                    alpha[k],
                    &evals[k],
                    |hstar| {
                        self.blocks[k].evaluate(
                            hstar,
                            self.pattern.window(),
                            self.config.mc_integral_samples,
                            chain_seed,
                            t as u64,
                        )
                    },
                );
                if step.accepted {
                    accepted[k] += 1;
                    h[k] = step.value;
                    evals[k] = cand.expect("accepted step carries its evaluation");
                }
            }

            if t > self.config.n_burnin && (t - self.config.n_burnin) % self.config.thin == 0 {
                let mut row = Vec::with_capacity(2 * q + p + u);
                row.extend_from_slice(&alpha);
                row.extend_from_slice(&h);
                row.extend_from_slice(&lambda_parent);
                row.extend_from_slice(&lambda_unrelated);
                draws.push(row);
            }
        }

        let acceptance_rate: Vec<(String, f64)> = graph
            .offspring_indices()
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                (
                    graph.name(l).to_string(),
                    accepted[k] as f64 / n_iter as f64,
                )
            })
            .collect();
        let mut flags = Vec::new();
        for (name, rate) in &acceptance_rate {
            if !(0.05..0.8).contains(rate) {
                flags.push(format!(
                    "bandwidth acceptance rate for `{name}` is {rate:.3}, outside (0.05, 0.8)"
                ));
            }
        }

        let summaries: Vec<ParamSummary> = self
            .names
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let col: Vec<f64> = draws.iter().map(|row| row[j]).collect();
                summarize(name, &col)
            })
            .collect();

        PosteriorSamples {
            param_names: self.names.clone(),
            draws,
            acceptance_rate,
            summaries,
            seed: chain_seed,
            flags,
        }
    }
}

/// Run a single chain (seeded from `config.seed` and chain index 0).
pub fn run_chain(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    priors: &PriorSpec,
    config: &McmcConfig,
) -> Result<PosteriorSamples> {
    let setup = ChainSetup::new(pattern, graph, priors, config)?;
    Ok(setup.run(derive_seed(config.seed, &[0])))
}

/// Run `config.n_chains` chains (in parallel) with independent derived
/// seeds, pool the draws, and compute split R-hat when there are two or
/// more chains.
pub fn fit(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    priors: &PriorSpec,
    config: &McmcConfig,
) -> Result<FitResult> {
    let setup = ChainSetup::new(pattern, graph, priors, config)?;
    let chains: Vec<PosteriorSamples> = (0..config.n_chains)
        .into_par_iter()
        .map(|i| setup.run(derive_seed(config.seed, &[i as u64])))
        .collect();

    let names = param_names(graph);
    let pooled: Vec<ParamSummary> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col = Vec::new();
            for c in &chains {
                col.extend(c.column(j));
            }
            summarize(name, &col)
        })
        .collect();
    let rhat = if config.n_chains >= 2 {
        Some(
            (0..names.len())
                .map(|j| {
                    let cols: Vec<Vec<f64>> = chains.iter().map(|c| c.column(j)).collect();
                    split_rhat(&cols)
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(FitResult {
        chains,
        pooled,
        rhat,
    })
}
