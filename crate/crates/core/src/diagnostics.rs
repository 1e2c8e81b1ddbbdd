//! Model validation by expected-versus-observed counts, Ripley's K with
//! translation edge correction, and the Thomas-process minimum-contrast
//! baseline estimator.

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::kernel::window_mass;
use crate::model::{ModelGraph, ParamVector, Role};
use crate::patterns::MultitypePattern;
use crate::rng::derive_seed;
use serde::{Deserialize, Serialize};

/// Observed versus model-expected counts, per taxon. The ratio is omitted
/// when the expected count is zero (e.g. an offspring taxon with no observed
/// parents).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountValidation {
    pub rows: Vec<CountRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountRow {
    pub taxon: String,
    pub observed: usize,
    pub expected: f64,
    pub ratio: Option<f64>,
}

/// Expected counts under fitted parameters: `lambda |W|` for homogeneous
/// taxa, `alpha * sum_c mass(c, h)` over the observed parents for offspring
/// taxa.
pub fn expected_counts(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    estimate: &ParamVector,
    mc_samples: usize,
    mass_seed: u64,
) -> Result<CountValidation> {
    crate::likelihood::check_alignment(pattern, graph)?;
    let area = pattern.window().area();
    let counts = pattern.counts();
    let mut rows = Vec::with_capacity(graph.n_taxa());
    for idx in 0..graph.n_taxa() {
        let pos = graph.role_position(idx);
        let expected = match graph.role(idx) {
            Role::Parent => estimate.lambda_parent[pos] * area,
            Role::Unrelated => estimate.lambda_unrelated[pos] * area,
            Role::Offspring { parent } => {
                let h = estimate.bandwidth[pos];
                let mut mass_sum = 0.0;
                for (j, c) in pattern.points_of(parent).iter().enumerate() {
                    let seed = derive_seed(mass_seed, &[idx as u64, j as u64]);
                    mass_sum += window_mass(*c, h, pattern.window(), mc_samples, seed)?.value;
                }
                estimate.alpha[pos] * mass_sum
            }
        };
        let observed = counts[idx];
        let ratio = if expected > 0.0 {
            Some(observed as f64 / expected)
        } else {
            None
        };
        rows.push(CountRow {
            taxon: graph.name(idx).to_string(),
            observed,
            expected,
            ratio,
        });
    }
    Ok(CountValidation { rows })
}

/// Ripley's K with translation edge correction over a rectangular window:
/// `K(r) = |W| / (n (n-1)) * sum_{i != j} 1(d_ij <= r) e_ij` with
/// `e_ij = |W| / ((a - |dx|)(b - |dy|))`.
pub fn ripley_k(points: &[Point], window: &Window, r_grid: &[f64]) -> Result<Vec<f64>> {
    let Window::Rect {
        xmin,
        xmax,
        ymin,
        ymax,
    } = window
    else {
        return Err(Error::RectWindowRequired);
    };
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(format!(
            "Ripley's K needs at least 2 points, got {n}"
        )));
    }
    let a = xmax - xmin;
    let b = ymax - ymin;
    let half_short = 0.5 * a.min(b);
    if r_grid.iter().any(|r| *r < 0.0 || *r >= half_short) {
        return Err(Error::InvalidParameter(format!(
            "K estimator distances must lie in [0, {half_short}) (half the shorter side)"
        )));
    }
    let area = a * b;

    // unordered pairs, each standing for two ordered pairs with equal weight
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (points[i].x - points[j].x).abs();
            let dy = (points[i].y - points[j].y).abs();
            if dx >= a || dy >= b {
                continue; // outside any admissible r anyway
            }
            let d = (dx * dx + dy * dy).sqrt();
            let e = area / ((a - dx) * (b - dy));
            pairs.push((d, 2.0 * e));
        }
    }
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let scale = area / (n as f64 * (n - 1) as f64);
    let mut out = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        // prefix weight of pairs with d <= r
        let upto = pairs.partition_point(|(d, _)| *d <= r);
        let weight: f64 = pairs[..upto].iter().map(|(_, e)| e).sum();
        out.push(scale * weight);
    }
    Ok(out)
}

/// Theoretical K of a Thomas process:
/// `K(r) = pi r^2 + (1 - exp(-r^2 / (4 sigma^2))) / kappa`.
pub fn thomas_k(r: f64, kappa: f64, sigma: f64) -> f64 {
    std::f64::consts::PI * r * r
        + (1.0 - (-r * r / (4.0 * sigma * sigma)).exp()) / kappa
}

/// Minimum-contrast fit of a Thomas cluster process.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThomasFit {
    /// Latent parent intensity.
    pub kappa: f64,
    /// Gaussian cluster scale.
    pub sigma: f64,
    /// Offspring per cluster, recovered as `n / (kappa |W|)`.
    pub mu: f64,
    pub converged: bool,
    pub objective: f64,
}

/// Settings for the minimum-contrast search. Defaults: contrast exponent
/// 1/4, fit interval `(0, shorter-side/4]` on 256 grid points, and wide
/// box bounds whose edges count as failures.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinContrastSettings {
    pub q: f64,
    /// Upper end of the fitted r interval; `None` uses shorter-side/4.
    pub r_max: Option<f64>,
    pub n_r: usize,
    pub kappa_bounds: (f64, f64),
    /// Bounds for sigma as fractions of the window's shorter side.
    pub sigma_bounds_rel: (f64, f64),
}

impl Default for MinContrastSettings {
    fn default() -> Self {
        MinContrastSettings {
            q: 0.25,
            r_max: None,
            n_r: 256,
            kappa_bounds: (1e-2, 1e8),
            sigma_bounds_rel: (1e-4, 1.0),
        }
    }
}

/// How close (in log scale) an estimate may sit to a search bound before the
/// fit is declared non-converged.
const BOUND_TOL: f64 = 1e-6;

/// Fit a Thomas process to a single-type pattern by minimizing the
/// integrated contrast between `Khat^q` and `K(.; kappa, sigma)^q`. The
/// search is a derivative-free simplex refinement of a coarse log-scale grid
/// scan; estimates landing on a bound or an unconverged simplex are flagged
/// via `converged = false`, never raised as errors.
pub fn thomas_min_contrast(
    points: &[Point],
    window: &Window,
    settings: &MinContrastSettings,
) -> Result<ThomasFit> {
    let shorter = window.shorter_side();
    let r_max = settings.r_max.unwrap_or(shorter / 4.0);
    let n_r = settings.n_r.max(8);
    let r_grid: Vec<f64> = (1..=n_r).map(|i| r_max * i as f64 / n_r as f64).collect();
    let khat = ripley_k(points, window, &r_grid)?;
    let dr = r_max / n_r as f64;
    let q = settings.q;
    let khat_q: Vec<f64> = khat.iter().map(|k| k.powf(q)).collect();

    let objective = |x: [f64; 2]| -> f64 {
        let (kappa, sigma) = (x[0].exp(), x[1].exp());
        let mut acc = 0.0;
        for (r, kq) in r_grid.iter().zip(&khat_q) {
            let diff = kq - thomas_k(*r, kappa, sigma).powf(q);
            acc += diff * diff;
        }
        acc * dr
    };

    let lo = [settings.kappa_bounds.0.ln(), (settings.sigma_bounds_rel.0 * shorter).ln()];
    let hi = [settings.kappa_bounds.1.ln(), (settings.sigma_bounds_rel.1 * shorter).ln()];

    // coarse scan for starting points
    let n_scan = 24;
    let mut scanned: Vec<([f64; 2], f64)> = Vec::with_capacity(n_scan * n_scan);
    for i in 0..n_scan {
        for j in 0..n_scan {
            let x = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / n_scan as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / n_scan as f64,
            ];
            scanned.push((x, objective(x)));
        }
    }
    scanned.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let mut best: Option<([f64; 2], f64, bool)> = None;
    for (start, _) in scanned.iter().take(3) {
        let (x, fx, simplex_converged) = nelder_mead(&objective, *start, &lo, &hi);
        if best.as_ref().is_none_or(|(_, bf, _)| fx < *bf) {
            best = Some((x, fx, simplex_converged));
        }
    }
    let (x, fx, simplex_converged) = best.expect("at least one start");

    let on_bound = (0..2).any(|d| (x[d] - lo[d]).abs() < BOUND_TOL || (hi[d] - x[d]).abs() < BOUND_TOL);
    let kappa = x[0].exp();
    let sigma = x[1].exp();
    let mu = points.len() as f64 / (kappa * window.area());
    Ok(ThomasFit {
        kappa,
        sigma,
        mu,
        converged: simplex_converged && !on_bound,
        objective: fx,
    })
}

/// Nelder-Mead in two dimensions with box clamping. Returns the best vertex,
/// its value, and whether the simplex contracted below tolerance.
fn nelder_mead(
    f: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    lo: &[f64; 2],
    hi: &[f64; 2],
) -> ([f64; 2], f64, bool) {
    let clamp = |x: [f64; 2]| -> [f64; 2] {
        [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])]
    };
    let step = [0.05 * (hi[0] - lo[0]), 0.05 * (hi[1] - lo[1])];
    let mut simplex: Vec<([f64; 2], f64)> = vec![
        (clamp(start), 0.0),
        (clamp([start[0] + step[0], start[1]]), 0.0),
        (clamp([start[0], start[1] + step[1]]), 0.0),
    ];
    for v in &mut simplex {
        v.1 = f(v.0);
    }

    let (alpha, gamma, rho, sigma_s) = (1.0, 2.0, 0.5, 0.5);
    let max_iter = 400;
    let tol = 1e-12;
    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = (0..2)
            .map(|d| (simplex[2].0[d] - simplex[0].0[d]).abs() + (simplex[1].0[d] - simplex[0].0[d]).abs())
            .fold(0.0f64, f64::max);
        if spread <= tol * (1.0 + simplex[0].1.abs()) && size <= 1e-9 {
            converged = true;
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let reflect = clamp([
            centroid[0] + alpha * (centroid[0] - worst.0[0]),
            centroid[1] + alpha * (centroid[1] - worst.0[1]),
        ]);
        let fr = f(reflect);
        if fr < simplex[0].1 {
            let expand = clamp([
                centroid[0] + gamma * (reflect[0] - centroid[0]),
                centroid[1] + gamma * (reflect[1] - centroid[1]),
            ]);
            let fe = f(expand);
            simplex[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            let contract = clamp([
                centroid[0] + rho * (worst.0[0] - centroid[0]),
                centroid[1] + rho * (worst.0[1] - centroid[1]),
            ]);
            let fc = f(contract);
            if fc < worst.1 {
                simplex[2] = (contract, fc);
            } else {
                for k in 1..3 {
                    let shrunk = clamp([
                        simplex[0].0[0] + sigma_s * (simplex[k].0[0] - simplex[0].0[0]),
                        simplex[0].0[1] + sigma_s * (simplex[k].0[1] - simplex[0].0[1]),
                    ]);
                    simplex[k] = (shrunk, f(shrunk));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    (simplex[0].0, simplex[0].1, converged)
}
