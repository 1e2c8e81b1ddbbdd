//! Chain-quality integration checks: cross-chain agreement, default
//! proposal-scale health on the benchmark grid, and the Monte Carlo mass
//! path for polygon windows.

use macpp_core::geometry::{Point, Window};
use macpp_core::inference::{fit, run_chain, McmcConfig};
use macpp_core::model::{ModelGraph, ParamVector, Role};
use macpp_core::priors::PriorSpec;
use macpp_core::rng::derive_seed;
use macpp_core::simulate::{simulate_pattern, Scenario};

#[test]
fn two_chains_agree_on_scenario_three() {
    let sc = Scenario::table1(3).unwrap();
    let graph = sc.graph();
    let params = sc.params(&graph);
    let pattern = simulate_pattern(&graph, &params, &sc.window(), 21).unwrap();
    let config = McmcConfig {
        n_chains: 2,
        seed: 77,
        ..McmcConfig::default()
    };
    let result = fit(&pattern, &graph, &PriorSpec::simulation_default(), &config).unwrap();
    let rhat = result.rhat.as_ref().expect("two chains report rhat");
    for (name, r) in result.param_names().iter().zip(rhat) {
        assert!(
            *r < 1.05,
            "potential scale reduction for {name} is {r}"
        );
    }
}

#[test]
fn default_proposal_acceptance_band_and_flagging() {
    // low-bandwidth scenarios sit inside the (0.05, 0.8) acceptance band
    // under the default proposal scale
    for id in [1u8, 3, 9] {
        let sc = Scenario::table1(id).unwrap();
        let graph = sc.graph();
        let params = sc.params(&graph);
        let pattern =
            simulate_pattern(&graph, &params, &sc.window(), derive_seed(3, &[id as u64])).unwrap();
        let config = McmcConfig {
            n_iterations: 4000,
            n_burnin: 1000,
            seed: derive_seed(4, &[id as u64]),
            ..McmcConfig::default()
        };
        let samples = run_chain(&pattern, &graph, &PriorSpec::simulation_default(), &config)
            .unwrap();
        assert!(
            samples.flags.is_empty(),
            "scenario {id} flagged: {:?} (rates {:?})",
            samples.flags,
            samples.acceptance_rate
        );
    }

    // the high-bandwidth corner exceeds the band with the default proposal
    // (the posterior for h_B is much wider than at low bandwidth); the chain
    // must flag it and still estimate accurately
    let sc = Scenario::table1(6).unwrap();
    let graph = sc.graph();
    let params = sc.params(&graph);
    let pattern = simulate_pattern(&graph, &params, &sc.window(), derive_seed(3, &[6])).unwrap();
    let samples = run_chain(
        &pattern,
        &graph,
        &PriorSpec::simulation_default(),
        &McmcConfig {
            seed: derive_seed(4, &[6]),
            ..McmcConfig::default()
        },
    )
    .unwrap();
    let (_, rate_b) = samples
        .acceptance_rate
        .iter()
        .find(|(name, _)| name == "B")
        .unwrap()
        .clone();
    assert!(rate_b > 0.8, "expected out-of-band acceptance, got {rate_b}");
    assert!(
        samples.flags.iter().any(|f| f.contains("`B`")),
        "out-of-band acceptance must be flagged: {:?}",
        samples.flags
    );
    let h_b = samples.summaries.iter().find(|s| s.name == "h_B").unwrap();
    assert!(
        (h_b.mean - 0.1).abs() / 0.1 < 0.25,
        "flagged chain still estimates h_B, got {}",
        h_b.mean
    );
}

#[test]
fn polygon_window_chain_uses_mc_masses_deterministically() {
    // convex-hull-style analysis window: kernel masses go through the seeded
    // Monte Carlo route
    let window = Window::convex_polygon(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.2),
        Point::new(0.9, 1.0),
        Point::new(0.1, 0.9),
    ])
    .unwrap();
    let graph = ModelGraph::new(
        vec!["P".into(), "O".into()],
        vec![Role::Parent, Role::Offspring { parent: 0 }],
    )
    .unwrap();
    let params = ParamVector::new(&graph, vec![2.0], vec![0.03], vec![120.0], vec![]).unwrap();
    let pattern = simulate_pattern(&graph, &params, &window, 11).unwrap();
    assert!(pattern.count("O").unwrap() > 0, "offspring realized");

    let config = McmcConfig {
        n_iterations: 800,
        n_burnin: 200,
        mc_integral_samples: 500,
        seed: 5,
        ..McmcConfig::default()
    };
    let priors = PriorSpec::simulation_default();
    let a = run_chain(&pattern, &graph, &priors, &config).unwrap();
    let b = run_chain(&pattern, &graph, &priors, &config).unwrap();
    for (ra, rb) in a.draws.iter().zip(&b.draws) {
        for (va, vb) in ra.iter().zip(rb) {
            assert_eq!(va.to_bits(), vb.to_bits());
        }
    }
    // estimates are finite and in range
    let alpha = a.summaries.iter().find(|s| s.name == "alpha_O").unwrap();
    assert!(alpha.mean > 0.0 && alpha.mean.is_finite());
}
