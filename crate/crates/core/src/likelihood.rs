//! Intensity field and exact log-likelihood of the superposed process.
//!
//! Offspring intensities are sums of Gaussian kernels centered at the
//! *observed* points of the parent taxon. Window-mass integrals are injected
//! (precomputed per offspring taxon and parent point) because the sampler
//! only refreshes them when a bandwidth moves.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kernel::{gaussian_density, window_mass};
use crate::model::{ModelGraph, ParamVector, Role};
use crate::patterns::MultitypePattern;
use crate::rng::derive_seed;

/// Kernel window masses, one vector per offspring taxon (aligned with
/// `graph.offspring_indices()`), one entry per observed parent point (in
/// pattern order of the parent taxon).
#[derive(Debug, Clone, PartialEq)]
pub struct MassTable {
    pub per_offspring: Vec<Vec<f64>>,
}

impl MassTable {
    pub fn sum(&self, offspring_pos: usize) -> f64 {
        self.per_offspring[offspring_pos].iter().sum()
    }
}

/// Compute the mass table at the given bandwidths: analytic over rectangles,
/// Monte Carlo (seeded per offspring and parent) over polygons.
pub fn mass_table(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    bandwidths: &[f64],
    mc_samples: usize,
    base_seed: u64,
) -> Result<MassTable> {
    check_alignment(pattern, graph)?;
    if bandwidths.len() != graph.offspring_indices().len() {
        return Err(Error::InvalidParameter(format!(
            "{} bandwidths for {} offspring taxa",
            bandwidths.len(),
            graph.offspring_indices().len()
        )));
    }
    let mut per_offspring = Vec::with_capacity(bandwidths.len());
    for (k, &l) in graph.offspring_indices().iter().enumerate() {
        let parent = graph.parent_of(l).expect("offspring has a parent");
        let parents = pattern.points_of(parent);
        let h = bandwidths[k];
        let mut masses = Vec::with_capacity(parents.len());
        for (j, &c) in parents.iter().enumerate() {
            let seed = derive_seed(base_seed, &[k as u64, j as u64]);
            masses.push(window_mass(c, h, pattern.window(), mc_samples, seed)?.value);
        }
        per_offspring.push(masses);
    }
    Ok(MassTable { per_offspring })
}

/// Log-likelihood split into the leading window constant and per-taxon
/// contributions. `total` is always `constant` plus the sum of the parts;
/// it is -inf when some offspring point sits where its kernel sum underflows
/// to zero, in which case `zero_intensity` names the offending points.
#[derive(Debug, Clone)]
pub struct LogLikelihoodBreakdown {
    pub total: f64,
    /// The leading `|W|` term; irrelevant to inference but retained so
    /// cross-implementation comparisons match exactly.
    pub constant: f64,
    pub parent_terms: Vec<f64>,
    pub offspring_terms: Vec<f64>,
    pub unrelated_terms: Vec<f64>,
    /// `(taxon index, location)` of data points with zero intensity.
    pub zero_intensity: Vec<(usize, Point)>,
}

pub(crate) fn check_alignment(pattern: &MultitypePattern, graph: &ModelGraph) -> Result<()> {
    if pattern.taxa() != graph.taxa() {
        return Err(Error::InvalidConfig(format!(
            "pattern taxa {:?} do not match graph taxa {:?}",
            pattern.taxa(),
            graph.taxa()
        )));
    }
    Ok(())
}

fn check_params(graph: &ModelGraph, params: &ParamVector) -> Result<()> {
    if params.alpha.len() != graph.offspring_indices().len()
        || params.bandwidth.len() != graph.offspring_indices().len()
        || params.lambda_parent.len() != graph.parent_indices().len()
        || params.lambda_unrelated.len() != graph.unrelated_indices().len()
    {
        return Err(Error::InvalidParameter(
            "parameter vector shape does not match the graph".into(),
        ));
    }
    Ok(())
}

/// Sum of Gaussian kernels centered at `parents`, evaluated at `y`.
pub fn kernel_sum(y: Point, parents: &[Point], h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &c in parents {
        acc += gaussian_density(Point::new(y.x - c.x, y.y - c.y), h)?;
    }
    Ok(acc)
}

/// Model intensity of one taxon at a location: the homogeneous rate for
/// parent-only and unrelated taxa, or the kernel mixture over the observed
/// parent points for offspring taxa.
pub fn intensity_at(
    s: Point,
    taxon: &str,
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    params: &ParamVector,
) -> Result<f64> {
    check_alignment(pattern, graph)?;
    check_params(graph, params)?;
    let idx = graph
        .taxon_index(taxon)
        .ok_or_else(|| Error::UnknownTaxon(taxon.to_string()))?;
    let pos = graph.role_position(idx);
    Ok(match graph.role(idx) {
        Role::Parent => params.lambda_parent[pos],
        Role::Unrelated => params.lambda_unrelated[pos],
        Role::Offspring { parent } => {
            let parents = pattern.points_of(parent);
            params.alpha[pos] * kernel_sum(s, &parents, params.bandwidth[pos])?
        }
    })
}

/// Exact log-likelihood of the superposed pattern.
pub fn log_likelihood(
    pattern: &MultitypePattern,
    graph: &ModelGraph,
    params: &ParamVector,
    masses: &MassTable,
) -> Result<LogLikelihoodBreakdown> {
    check_alignment(pattern, graph)?;
    check_params(graph, params)?;
    if masses.per_offspring.len() != graph.offspring_indices().len() {
        return Err(Error::InvalidParameter(
            "mass table shape does not match the graph".into(),
        ));
    }

    let area = pattern.window().area();
    let counts = pattern.counts();
    let constant = area;

    let mut parent_terms = Vec::with_capacity(graph.parent_indices().len());
    for (k, &v) in graph.parent_indices().iter().enumerate() {
        let lam = params.lambda_parent[k];
        parent_terms.push(-area * lam + counts[v] as f64 * lam.ln());
    }

    let mut unrelated_terms = Vec::with_capacity(graph.unrelated_indices().len());
    for (k, &j) in graph.unrelated_indices().iter().enumerate() {
        let lam = params.lambda_unrelated[k];
        unrelated_terms.push(-area * lam + counts[j] as f64 * lam.ln());
    }

    let mut offspring_terms = Vec::with_capacity(graph.offspring_indices().len());
    let mut zero_intensity = Vec::new();
    for (k, &l) in graph.offspring_indices().iter().enumerate() {
        let parent = graph.parent_of(l).expect("offspring has a parent");
        if masses.per_offspring[k].len() != counts[parent] {
            return Err(Error::InvalidParameter(format!(
                "mass table has {} entries for offspring `{}` but the parent taxon has {} points",
                masses.per_offspring[k].len(),
                graph.name(l),
                counts[parent]
            )));
        }
        let alpha = params.alpha[k];
        let h = params.bandwidth[k];
        let parents = pattern.points_of(parent);
        let mut term = -alpha * masses.sum(k);
        for (y, t) in pattern.points() {
            if *t != l {
                continue;
            }
            let ks = kernel_sum(*y, &parents, h)?;
            if ks <= 0.0 {
                zero_intensity.push((l, *y));
                term = f64::NEG_INFINITY;
            } else if term > f64::NEG_INFINITY {
                term += (alpha * ks).ln();
            }
        }
        offspring_terms.push(term);
    }

    let total = constant
        + parent_terms.iter().sum::<f64>()
        + offspring_terms.iter().sum::<f64>()
        + unrelated_terms.iter().sum::<f64>();
    Ok(LogLikelihoodBreakdown {
        total,
        constant,
        parent_terms,
        offspring_terms,
        unrelated_terms,
        zero_intensity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::model::Role;
    use approx::assert_relative_eq;

    fn single_unrelated(n: usize, lambda: f64) -> (MultitypePattern, ModelGraph, ParamVector) {
        let graph = ModelGraph::new(vec!["U".into()], vec![Role::Unrelated]).unwrap();
        let points = (0..n)
            .map(|i| (Point::new(0.1 + 0.8 * i as f64 / n.max(1) as f64, 0.5), 0))
            .collect();
        let pattern =
            MultitypePattern::new(Window::unit_square(), vec!["U".into()], points).unwrap();
        let params = ParamVector::new(&graph, vec![], vec![], vec![], vec![lambda]).unwrap();
        (pattern, graph, params)
    }

    fn parent_offspring(
        parent_pts: &[(f64, f64)],
        offspring_pts: &[(f64, f64)],
        alpha: f64,
        h: f64,
        lambda_c: f64,
    ) -> (MultitypePattern, ModelGraph, ParamVector) {
        let graph = ModelGraph::new(
            vec!["P".into(), "O".into()],
            vec![Role::Parent, Role::Offspring { parent: 0 }],
        )
        .unwrap();
        let mut points: Vec<(Point, usize)> = parent_pts
            .iter()
            .map(|&(x, y)| (Point::new(x, y), 0))
            .collect();
        points.extend(offspring_pts.iter().map(|&(x, y)| (Point::new(x, y), 1)));
        let pattern = MultitypePattern::new(
            Window::unit_square(),
            vec!["P".into(), "O".into()],
            points,
        )
        .unwrap();
        let params =
            ParamVector::new(&graph, vec![alpha], vec![h], vec![lambda_c], vec![]).unwrap();
        (pattern, graph, params)
    }

    #[test]
    fn intensity_examples() {
        let (pattern, graph, params) = parent_offspring(&[(0.5, 0.5)], &[], 2.0, 0.1, 150.0);
        assert_eq!(
            intensity_at(Point::new(0.77, 0.2), "P", &pattern, &graph, &params).unwrap(),
            150.0
        );
        // alpha times the kernel mode: 2 / (2 pi 0.01)
        assert_relative_eq!(
            intensity_at(Point::new(0.5, 0.5), "O", &pattern, &graph, &params).unwrap(),
            31.830988618379067,
            max_relative = 1e-12
        );
        assert!(matches!(
            intensity_at(Point::new(0.5, 0.5), "X", &pattern, &graph, &params),
            Err(Error::UnknownTaxon(_))
        ));

        // offspring with zero observed parents has zero intensity everywhere
        let (pattern, graph, params) = parent_offspring(&[], &[], 2.0, 0.1, 150.0);
        assert_eq!(
            intensity_at(Point::new(0.3, 0.3), "O", &pattern, &graph, &params).unwrap(),
            0.0
        );
    }

    #[test]
    fn single_unrelated_taxon_closed_form() {
        let (pattern, graph, params) = single_unrelated(3, 2.0);
        let masses = MassTable { per_offspring: vec![] };
        let b = log_likelihood(&pattern, &graph, &params, &masses).unwrap();
        // term: -|W| lambda + n ln lambda = -2 + 3 ln 2
        assert_relative_eq!(b.unrelated_terms[0], 0.07944154167983593, max_relative = 1e-12);
        // total retains the leading |W| constant
        assert_relative_eq!(b.total, 1.0794415416798359, max_relative = 1e-12);
        assert_eq!(b.constant, 1.0);
    }

    #[test]
    fn empty_pattern_with_one_parent_taxon() {
        let graph = ModelGraph::new(vec!["P".into()], vec![Role::Parent]).unwrap();
        let pattern =
            MultitypePattern::new(Window::unit_square(), vec!["P".into()], vec![]).unwrap();
        let params = ParamVector::new(&graph, vec![], vec![], vec![150.0], vec![]).unwrap();
        let masses = MassTable { per_offspring: vec![] };
        let b = log_likelihood(&pattern, &graph, &params, &masses).unwrap();
        assert_relative_eq!(b.total, 1.0 - 150.0, max_relative = 1e-12);
    }

    #[test]
    fn parent_plus_coincident_offspring_assembles_from_closed_forms() {
        let (pattern, graph, params) =
            parent_offspring(&[(0.5, 0.5)], &[(0.5, 0.5)], 1.0, 0.1, 150.0);
        let masses =
            mass_table(&pattern, &graph, &params.bandwidth, 1000, 0).unwrap();
        let b = log_likelihood(&pattern, &graph, &params, &masses).unwrap();
        let mass = crate::kernel::mass_rect(Point::new(0.5, 0.5), 0.1, pattern.window())
            .unwrap()
            .value;
        let expected = 1.0 + (-150.0 + 150.0f64.ln()) + (-mass + 15.915494309189535f64.ln());
        assert_relative_eq!(b.total, expected, max_relative = 1e-12);
        // the integral is within 1.2e-6 of 1 here
        assert!((mass - 1.0).abs() < 1.2e-6);
    }

    #[test]
    fn adding_an_offspring_point_shifts_total_by_its_log_intensity() {
        let parents = [(0.3, 0.3), (0.7, 0.6)];
        let base = [(0.31, 0.29), (0.72, 0.61), (0.69, 0.58)];
        let alpha = 1.7;
        let h = 0.05;
        let (p0, graph, params) = parent_offspring(&parents, &base, alpha, h, 150.0);
        let masses = mass_table(&p0, &graph, &params.bandwidth, 1000, 0).unwrap();
        let t0 = log_likelihood(&p0, &graph, &params, &masses).unwrap().total;

        let extra = (0.33, 0.35);
        let mut with_extra = base.to_vec();
        with_extra.push(extra);
        let (p1, _, _) = parent_offspring(&parents, &with_extra, alpha, h, 150.0);
        let t1 = log_likelihood(&p1, &graph, &params, &masses).unwrap().total;

        let parent_points: Vec<Point> = parents.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let ks = kernel_sum(Point::new(extra.0, extra.1), &parent_points, h).unwrap();
        assert_relative_eq!(t1 - t0, (alpha * ks).ln(), max_relative = 1e-10);
    }

    #[test]
    fn unrelated_mle_matches_golden_section_argmax() {
        let n = 17;
        let (pattern, graph, _) = single_unrelated(n, 2.0);
        let masses = MassTable { per_offspring: vec![] };
        let total_at = |lam: f64| {
            let params = ParamVector::new(&graph, vec![], vec![], vec![], vec![lam]).unwrap();
            log_likelihood(&pattern, &graph, &params, &masses)
                .unwrap()
                .total
        };
        // golden-section search over [1, 40]
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (1.0f64, 40.0f64);
        let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
        for _ in 0..200 {
            if total_at(c) > total_at(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - phi * (b - a);
            d = a + phi * (b - a);
        }
        let argmax = 0.5 * (a + b);
        let analytic = n as f64 / pattern.window().area();
        assert!(
            (argmax - analytic).abs() < 1e-6,
            "golden section {argmax} vs analytic {analytic}"
        );
    }

    #[test]
    fn total_invariant_under_consistent_relabeling() {
        let (pattern, graph, params) = parent_offspring(
            &[(0.3, 0.3), (0.7, 0.6)],
            &[(0.31, 0.29), (0.72, 0.61)],
            1.7,
            0.05,
            150.0,
        );
        let masses = mass_table(&pattern, &graph, &params.bandwidth, 1000, 0).unwrap();
        let t0 = log_likelihood(&pattern, &graph, &params, &masses).unwrap().total;

        // swap taxon order: offspring first, parent second
        let graph2 = ModelGraph::new(
            vec!["O".into(), "P".into()],
            vec![Role::Offspring { parent: 1 }, Role::Parent],
        )
        .unwrap();
        let pattern2 = pattern.align_taxa(&["O".into(), "P".into()]).unwrap();
        let params2 = ParamVector::new(
            &graph2,
            params.alpha.clone(),
            params.bandwidth.clone(),
            params.lambda_parent.clone(),
            vec![],
        )
        .unwrap();
        let masses2 = mass_table(&pattern2, &graph2, &params2.bandwidth, 1000, 0).unwrap();
        let t1 = log_likelihood(&pattern2, &graph2, &params2, &masses2).unwrap().total;
        assert_relative_eq!(t0, t1, max_relative = 1e-12);
    }

    #[test]
    fn analytic_and_mc_masses_agree_on_totals() {
        let (pattern, graph, params) = parent_offspring(
            &[(0.2, 0.2), (0.5, 0.9), (0.95, 0.05)],
            &[(0.21, 0.19), (0.52, 0.88), (0.93, 0.08), (0.5, 0.5)],
            2.0,
            0.08,
            150.0,
        );
        let analytic = mass_table(&pattern, &graph, &params.bandwidth, 1000, 0).unwrap();
        let t_analytic = log_likelihood(&pattern, &graph, &params, &analytic).unwrap().total;

        // force the Monte Carlo route by recomputing each mass directly
        let parents = pattern.points_of(0);
        let mc_masses: Vec<f64> = parents
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                crate::kernel::mass_mc(
                    c,
                    params.bandwidth[0],
                    pattern.window(),
                    1_000_000,
                    derive_seed(99, &[j as u64]),
                )
                .unwrap()
                .value
            })
            .collect();
        let mc = MassTable { per_offspring: vec![mc_masses] };
        let t_mc = log_likelihood(&pattern, &graph, &params, &mc).unwrap().total;
        assert!(
            (t_analytic - t_mc).abs() < 1e-3,
            "analytic {t_analytic} vs mc {t_mc}"
        );
    }

    #[test]
    fn zero_kernel_sum_gives_minus_infinity_and_names_the_point() {
        let (pattern, graph, params) =
            parent_offspring(&[(0.1, 0.1)], &[(0.9, 0.9)], 1.0, 1e-3, 150.0);
        let masses = mass_table(&pattern, &graph, &params.bandwidth, 1000, 0).unwrap();
        let b = log_likelihood(&pattern, &graph, &params, &masses).unwrap();
        assert_eq!(b.total, f64::NEG_INFINITY);
        assert_eq!(b.zero_intensity.len(), 1);
        assert_eq!(b.zero_intensity[0].0, 1);
    }

    #[test]
    fn breakdown_parts_sum_to_total() {
        let (pattern, graph, params) = parent_offspring(
            &[(0.3, 0.3), (0.7, 0.6)],
            &[(0.31, 0.29), (0.72, 0.61)],
            1.7,
            0.05,
            150.0,
        );
        let masses = mass_table(&pattern, &graph, &params.bandwidth, 1000, 0).unwrap();
        let b = log_likelihood(&pattern, &graph, &params, &masses).unwrap();
        let recomputed = b.constant
            + b.parent_terms.iter().sum::<f64>()
            + b.offspring_terms.iter().sum::<f64>()
            + b.unrelated_terms.iter().sum::<f64>();
        assert_relative_eq!(b.total, recomputed, max_relative = 1e-10);
    }
}
