//! Isotropic Gaussian (Thomas) offspring kernel: density evaluation and
//! window-mass integrals, analytic over rectangles and Monte Carlo over any
//! window.

use crate::error::{Error, Result};
use crate::geometry::{Point, Window};
use crate::rng::rng_from_seed;
use crate::stats::std_normal_cdf;
use rand::Rng;
use rand_distr::StandardNormal;

/// Estimate of the window mass integral of a kernel centered at a parent
/// point. `n_samples` is 0 for the analytic path, where `std_error` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMassEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonPositiveBandwidth(h));
    }
    Ok(())
}

/// Bivariate normal density with covariance `h^2 I` evaluated at `offset`
/// from its center: `(2 pi h^2)^-1 exp(-|offset|^2 / (2 h^2))`.
pub fn gaussian_density(offset: Point, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    let h2 = h * h;
    let r2 = offset.x * offset.x + offset.y * offset.y;
    Ok((-r2 / (2.0 * h2)).exp() / (2.0 * std::f64::consts::PI * h2))
}

/// Exact window mass over a rectangle: the Gaussian factorizes per axis, so
/// the integral is a product of normal CDF differences.
pub fn mass_rect(c: Point, h: f64, w: &Window) -> Result<KernelMassEstimate> {
    check_bandwidth(h)?;
    let Window::Rect {
        xmin,
        xmax,
        ymin,
        ymax,
    } = w
    else {
        return Err(Error::RectWindowRequired);
    };
    let px = std_normal_cdf((xmax - c.x) / h) - std_normal_cdf((xmin - c.x) / h);
    let py = std_normal_cdf((ymax - c.y) / h) - std_normal_cdf((ymin - c.y) / h);
    Ok(KernelMassEstimate {
        value: px * py,
        std_error: 0.0,
        n_samples: 0,
    })
}

/// Monte Carlo window mass: draw `Normal(c, h^2 I)` points and average the
/// indicator of landing inside the window. Deterministic for a given seed.
pub fn mass_mc(
    c: Point,
    h: f64,
    w: &Window,
    n_samples: usize,
    seed: u64,
) -> Result<KernelMassEstimate> {
    check_bandwidth(h)?;
    if n_samples == 0 {
        return Err(Error::ZeroSamples);
    }
    let mut rng = rng_from_seed(seed);
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        let p = Point::new(c.x + h * zx, c.y + h * zy);
        if w.contains(p) {
            hits += 1;
        }
    }
    let n = n_samples as f64;
    let value = hits as f64 / n;
    Ok(KernelMassEstimate {
        value,
        std_error: (value * (1.0 - value) / n).sqrt(),
        n_samples: n_samples as u64,
    })
}

/// Window mass with the preferred evaluation route: exact for rectangles,
/// Monte Carlo (with the supplied stream) for polygons.
pub fn window_mass(
    c: Point,
    h: f64,
    w: &Window,
    mc_samples: usize,
    seed: u64,
) -> Result<KernelMassEstimate> {
    match w {
        Window::Rect { .. } => mass_rect(c, h, w),
        Window::Polygon { .. } => mass_mc(c, h, w, mc_samples, seed),
    }
}
