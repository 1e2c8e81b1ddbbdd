//! Prior families for the model parameters, the bandwidth-prior
//! alternatives used in the sensitivity study, and quantile utilities for
//! elicitation.
//!
//! Gamma distributions are shape-rate throughout: the conjugate updates add
//! window areas or kernel masses to the second hyperparameter, which is only
//! meaningful for a rate.

use crate::error::{Error, Result};
use crate::model::ParamVector;
use crate::stats::std_normal_quantile;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Shape-rate Gamma hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma hyperparameters must be positive, got shape {shape}, rate {rate}"
            )));
        }
        Ok(GammaParams { shape, rate })
    }

    /// Log density at `x` (-inf for x <= 0).
    pub fn log_density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln() - self.rate * x + self.shape * self.rate.ln()
            - ln_gamma(self.shape)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }
}

/// Prior family for the bandwidth parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum BandwidthPrior {
    /// |N(0, sigma^2)|: scale `sigma` of the underlying zero-mean normal.
    HalfNormal { sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    /// exp(N(mu, sigma^2)).
    LogNormal { mu: f64, sigma: f64 },
}

impl BandwidthPrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BandwidthPrior::HalfNormal { sigma } | BandwidthPrior::LogNormal { sigma, .. } => {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "bandwidth prior scale must be positive, got {sigma}"
                    )));
                }
            }
            BandwidthPrior::Uniform { lo, hi } => {
                if !(lo < hi && lo.is_finite() && hi.is_finite() && lo >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform bandwidth prior requires 0 <= lo < hi, got ({lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Named presets: the simulation half-normal (`sigma` 0.02) and the three
    /// sensitivity-study alternatives (uniform on (0, 0.2); log-normals with
    /// `mu = ln 0.05` and `sigma` 1 or 0.1).
    pub fn preset(name: &str) -> Option<BandwidthPrior> {
        let ln005 = 0.05f64.ln();
        match name {
            "half-normal" => Some(BandwidthPrior::HalfNormal { sigma: 0.02 }),
            "uniform" => Some(BandwidthPrior::Uniform { lo: 0.0, hi: 0.2 }),
            "lognormal-flat" => Some(BandwidthPrior::LogNormal { mu: ln005, sigma: 1.0 }),
            "lognormal-tight" => Some(BandwidthPrior::LogNormal { mu: ln005, sigma: 0.1 }),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 4] =
        ["half-normal", "uniform", "lognormal-flat", "lognormal-tight"];

    /// Log density at `h` (-inf outside the support).
    pub fn log_density(&self, h: f64) -> f64 {
        match *self {
            BandwidthPrior::HalfNormal { sigma } => {
                if h < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    0.5 * (2.0 / std::f64::consts::PI).ln() - sigma.ln()
                        - h * h / (2.0 * sigma * sigma)
                }
            }
            BandwidthPrior::Uniform { lo, hi } => {
                if h < lo || h > hi {
                    f64::NEG_INFINITY
                } else {
                    -(hi - lo).ln()
                }
            }
            BandwidthPrior::LogNormal { mu, sigma } => {
                if h <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    let z = (h.ln() - mu) / sigma;
                    -h.ln() - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
                }
            }
        }
    }

    /// Quantile function.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0);
        match *self {
            BandwidthPrior::HalfNormal { sigma } => sigma * std_normal_quantile((1.0 + p) / 2.0),
            BandwidthPrior::Uniform { lo, hi } => lo + p * (hi - lo),
            BandwidthPrior::LogNormal { mu, sigma } => (mu + sigma * std_normal_quantile(p)).exp(),
        }
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Standard deviation; used for proposal scaling.
    pub fn sd(&self) -> f64 {
        match *self {
            BandwidthPrior::HalfNormal { sigma } => {
                sigma * (1.0 - 2.0 / std::f64::consts::PI).sqrt()
            }
            BandwidthPrior::Uniform { lo, hi } => (hi - lo) / 12.0f64.sqrt(),
            BandwidthPrior::LogNormal { mu, sigma } => {
                let s2 = sigma * sigma;
                ((s2.exp() - 1.0) * (2.0 * mu + s2).exp()).sqrt()
            }
        }
    }

    /// Draw one value, by transformation of normal/uniform variates.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            BandwidthPrior::HalfNormal { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (sigma * z).abs()
            }
            BandwidthPrior::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            BandwidthPrior::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                (mu + sigma * z).exp()
            }
        }
    }
}

/// Full prior specification: Gamma priors for the offspring densities and
/// intensities plus the bandwidth prior family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub gamma_alpha: GammaParams,
    pub gamma_parent: GammaParams,
    pub gamma_unrelated: GammaParams,
    pub bandwidth: BandwidthPrior,
}

impl PriorSpec {
    /// The simulation-study setting: all Gamma hyperparameters 0.01 and a
    /// half-normal bandwidth prior with `sigma` 0.02, whose 99th percentile
    /// is about 0.05 (5% of the unit window side).
    pub fn simulation_default() -> Self {
        PriorSpec {
            gamma_alpha: GammaParams { shape: 0.01, rate: 0.01 },
            gamma_parent: GammaParams { shape: 0.01, rate: 0.01 },
            gamma_unrelated: GammaParams { shape: 0.01, rate: 0.01 },
            bandwidth: BandwidthPrior::HalfNormal { sigma: 0.02 },
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: BandwidthPrior) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for g in [self.gamma_alpha, self.gamma_parent, self.gamma_unrelated] {
            GammaParams::new(g.shape, g.rate)?;
        }
        self.bandwidth.validate()
    }
}

/// Joint log prior: the sum of independent log densities over every entry of
/// the parameter vector (-inf if any value is outside its support).
pub fn log_prior(params: &ParamVector, spec: &PriorSpec) -> f64 {
    let mut total = 0.0;
    for &a in &params.alpha {
        total += spec.gamma_alpha.log_density(a);
    }
    for &h in &params.bandwidth {
        total += spec.bandwidth.log_density(h);
    }
    for &l in &params.lambda_parent {
        total += spec.gamma_parent.log_density(l);
    }
    for &l in &params.lambda_unrelated {
        total += spec.gamma_unrelated.log_density(l);
    }
    total
}

/// Scale `sigma` of a half-normal whose `prob` quantile equals `target`:
/// `sigma = target / Phi^-1((1 + prob) / 2)`. Used to elicit the bandwidth
/// prior from a maximum plausible parent-offspring distance.
pub fn half_normal_sigma_for_quantile(target: f64, prob: f64) -> f64 {
    assert!(target > 0.0, "target distance must be positive");
    assert!(prob > 0.0 && prob < 1.0, "prob must be in (0,1)");
    target / std_normal_quantile((1.0 + prob) / 2.0)
}
