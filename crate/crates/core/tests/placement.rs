use proptest::prelude::*;
use zdlab::deploy::{optimize_exhaustive, optimize_ga, GaConfig, DEFAULT_EXHAUSTIVE_CAP};
use zdlab::field::{evaluate, logistic, Deployment};
use zdlab::game::PayoffScale;
use zdlab::network::{generate, Graph, Topology};

fn linear() -> PayoffScale {
    PayoffScale::linear_default()
}

/// Same graph with node `i` renamed to `perm[i]`.
fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(g.node_count(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

#[test]
fn ga_never_beats_the_oracle_and_usually_matches_it() {
    let cfg = GaConfig { population_size: 40, generations: 60, ..GaConfig::default() };
    let mut hits = 0;
    let mut runs = 0;
    for instance in 0..8u64 {
        let g = generate(Topology::Mesh, 12, instance, Some(0.3)).unwrap();
        for k in 1..=3 {
            let exact = optimize_exhaustive(&g, k, &linear(), DEFAULT_EXHAUSTIVE_CAP).unwrap();
            let ga = optimize_ga(&g, k, &linear(), &cfg.clone().with_seed(instance * 10 + k as u64)).unwrap();
            assert!(ga.best.objective <= exact.objective + 1e-9);
            assert_eq!(ga.best.zd_set.len(), k);
            runs += 1;
            if ga.best.objective >= 0.99 * exact.objective {
                hits += 1;
            }
        }
    }
    assert!(hits * 10 >= runs * 9, "{hits}/{runs}");
}

#[test]
fn star_optimum_is_the_hub_for_either_scale() {
    let g = generate(Topology::Star, 12, 0, None).unwrap();
    for scale in [PayoffScale::linear_default(), PayoffScale::quadratic_default()] {
        let best = optimize_exhaustive(&g, 1, &scale, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        assert_eq!(best.zd_set, vec![0]);
        assert!((best.objective - 11.0 * logistic(1.0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_is_invariant_under_relabeling(seed: u64, k in 0usize..6, shift in 1usize..19) {
        let n = 20;
        let g = generate(Topology::Mesh, n, seed, Some(0.2)).unwrap();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + shift) % n).collect();
        let h = relabel(&g, &perm);
        let zd: Vec<usize> = (0..k).map(|i| i * 3).collect();
        let zd_h: Vec<usize> = zd.iter().map(|&z| perm[z]).collect();
        let a = evaluate(&Deployment::new(&g, &zd, linear()).unwrap());
        let b = evaluate(&Deployment::new(&h, &zd_h, linear()).unwrap());
        for (v, &w) in perm.iter().enumerate() {
            prop_assert_eq!(a.nodes[v].q, b.nodes[w].q);
        }
        prop_assert!((a.objective - b.objective).abs() < 1e-9);
    }

    #[test]
    fn exhaustive_result_is_a_true_maximum(seed: u64, k in 0usize..4) {
        let g = generate(Topology::Mesh, 8, seed, Some(0.35)).unwrap();
        let best = optimize_exhaustive(&g, k, &linear(), DEFAULT_EXHAUSTIVE_CAP).unwrap();
        prop_assert_eq!(best.zd_set.len(), k);
        let check = evaluate(&Deployment::new(&g, &best.zd_set, linear()).unwrap());
        prop_assert!((check.objective - best.objective).abs() < 1e-12);
        // No single swap improves on it.
        for out in &best.zd_set {
            for inn in (0..8).filter(|v| !best.zd_set.contains(v)) {
                let mut other: Vec<usize> = best.zd_set.iter().copied().filter(|z| z != out).collect();
                other.push(inn);
                let obj = evaluate(&Deployment::new(&g, &other, linear()).unwrap()).objective;
                prop_assert!(obj <= best.objective + 1e-12);
            }
        }
    }

    #[test]
    fn ga_output_is_feasible_and_reproducible(seed: u64, k in 1usize..6) {
        let g = generate(Topology::Mesh, 15, seed, Some(0.25)).unwrap();
        let cfg = GaConfig { population_size: 12, generations: 8, ..GaConfig::default() }.with_seed(seed);
        let a = optimize_ga(&g, k, &linear(), &cfg).unwrap();
        prop_assert_eq!(a.best.zd_set.len(), k);
        prop_assert!(a.history.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(a, optimize_ga(&g, k, &linear(), &cfg).unwrap());
    }
}
