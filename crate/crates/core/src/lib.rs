//! Multilayer adjusted cluster point process toolkit.
//!
//! Simulates and fits a multivariate spatial cluster model in which offspring
//! taxa scatter around the observed points of parent taxa, possibly in
//! several layers, alongside unrelated homogeneous taxa. Inference is MCMC
//! (conjugate Gibbs updates for densities and intensities, random-walk
//! Metropolis for bandwidths); a classical Thomas-process minimum-contrast
//! estimator is included as a baseline.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod inference;
pub mod kernel;
pub mod likelihood;
pub mod model;
pub mod patterns;
pub mod priors;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use diagnostics::{expected_counts, ripley_k, thomas_min_contrast, CountValidation, ThomasFit};
pub use error::{Error, Result};
pub use geometry::{convex_hull, Point, Window};
pub use inference::{fit, run_chain, FitResult, McmcConfig, ParamSummary, PosteriorSamples};
pub use likelihood::{log_likelihood, mass_table, LogLikelihoodBreakdown, MassTable};
pub use model::{ModelGraph, ParamVector, Role};
pub use patterns::{read_pattern_csv, write_pattern_csv, MultitypePattern, OutOfWindowPolicy};
pub use priors::{BandwidthPrior, GammaParams, PriorSpec};
pub use simulate::{run_scenario, simulate_pattern, Scenario, ScenarioReport, ScenarioRunSettings};
