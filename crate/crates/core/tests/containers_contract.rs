use std::collections::BTreeSet;

use hcube::containers::harness::{
    census, consistent_weight_ln, members, run_harness, small_two_linked_sets, HarnessReport,
};
use hcube::containers::{
    aggregate_bounds, assembled_gamma, cover_size_bound, family_bound_a1, family_bound_a2, first_approx, greedy_cover,
    reconstruct_f_prime, reconstruction_bound, BipartiteGraph, BipartiteRegularGraph, DEFAULT_RETRY_CAP,
};
use hcube::cube::CubeGraph;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube(d: u32) -> BipartiteRegularGraph {
    BipartiteRegularGraph::from_cube(&CubeGraph::new(d).unwrap())
}

fn assert_clean(rep: &HarnessReport) {
    assert!(rep.all_pass(), "{} failures, first: {:?}", rep.failures.len(), rep.failures.first());
}

#[test]
fn q3_and_q4_exhaustive() {
    for d in [3, 4] {
        let rep = run_harness(&cube(d), None, 2024).unwrap();
        assert!(!rep.rows.is_empty());
        assert_clean(&rep);
    }
}

#[test]
fn q5_random_sources() {
    let rep = run_harness(&cube(5), Some(10_000), 77).unwrap();
    assert_eq!(rep.rows.iter().filter(|r| r.stage == "first" && r.phi_or_psi == 1).count(), 10_000);
    assert_clean(&rep);
}

#[test]
fn other_regular_graphs() {
    for seed in 0..5 {
        let g = BipartiteRegularGraph::random(24, 4, seed).unwrap();
        let rep = run_harness(&g, Some(200), seed).unwrap();
        assert_clean(&rep);
    }
    let rep = run_harness(&BipartiteRegularGraph::even_cycle(8), None, 5).unwrap();
    assert_clean(&rep);
}

#[test]
fn reconstruction_bound_dominates_brute_force() {
    let g = cube(4);
    let sets = small_two_linked_sets(&g).unwrap();
    let all = members(&g, &sets);
    let rep = run_harness(&g, None, 4).unwrap();
    let mut checked = 0;
    for e in rep.emitted.iter().filter(|e| e.psi.is_some()) {
        let psi = e.psi.unwrap() as f64;
        let t = (e.g - e.a) as u64;
        for lambda in [0.5, 1.0, 2.0] {
            let gamma = assembled_gamma(lambda, 4, psi);
            assert!(gamma.admissible);
            let bound = reconstruction_bound(4, e.g as u64, t, psi, gamma.gamma, lambda).unwrap();
            let brute = consistent_weight_ln(&all, e.a, e.g, &e.pair, lambda).expect("source is consistent");
            assert!(brute <= bound.ln() + 1e-12, "{e:?} λ={lambda}: {brute} > {}", bound.ln());
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn reconstruction_bound_branches() {
    let (d, g, t, psi, gamma, l) = (4.0f64, 6.0f64, 2.0f64, 1.0f64, 0.5f64, 1.0f64);
    let first = (g - gamma * t) * 2f64.ln();
    // 2tψ/(d−ψ)+γt = 4/3 + 1, so i ∈ {0, 1, 2} over n = 72.
    let second = ((1.0 + 72.0 + 72.0 * 71.0 / 2.0) as f64).ln() + (g - t) * (1.0 + l).ln();
    let got = reconstruction_bound(d as u32, 6, 2, psi, gamma, l).unwrap().ln();
    assert!((got - first.max(second)).abs() < 1e-9);
}

#[test]
fn small_set_sum_below_corollary_bound() {
    let g = cube(4);
    let sets = small_two_linked_sets(&g).unwrap();
    let lambda = 1.0f64;
    let total: f64 = members(&g, &sets)
        .iter()
        .filter(|m| m.size >= 2)
        .map(|m| lambda.powi(m.size as i32) * (1.0 + lambda).powi(-(m.g as i32)))
        .sum();
    let rhs = aggregate_bounds(lambda, 4, 1, 4, 2, 1.0).unwrap().cor12_rhs;
    assert!(total.ln() <= rhs.ln(), "{total} vs {}", rhs.to_f64());
}

#[test]
fn q4_census_within_family_bounds() {
    let g = cube(4);
    let rep = run_harness(&g, None, 8).unwrap();
    for phi in 1..4usize {
        let c = phi as f64 * 4.0 / (2.0 * 4f64.ln());
        let m_phi = g.m_phi(phi).unwrap() as f64;
        for psi in 1..=2usize {
            for row in census(&rep, phi, psi) {
                let a1 = family_bound_a1(4, row.g as u64, row.t as u64, phi as f64, c, 8, m_phi).unwrap();
                assert!((row.family1 as f64).ln() <= a1.ln(), "{row:?}");
                let x = row.t as f64 * 4.0 / (4 - phi) as f64;
                let a2 = family_bound_a2(x, row.t as u64, psi as f64, 10.0, 4);
                assert!((row.max_family2 as f64).ln() <= a2.ln(), "{row:?} φ={phi} ψ={psi}");
            }
        }
    }
}

#[test]
fn a1_grows_with_t() {
    let lo = family_bound_a1(10, 100, 5, 5.0, 2.0, 512, 25.0).unwrap();
    let hi = family_bound_a1(10, 100, 10, 5.0, 2.0, 512, 25.0).unwrap();
    assert!(hi.ln().is_finite() && hi.ln() > lo.ln());
    let zero = family_bound_a1(10, 100, 0, 5.0, 2.0, 512, 25.0).unwrap();
    let ld = 10f64.ln();
    let p = 2.0 * ld / 50.0;
    let want = 512f64.ln() + 78.0 * 100.0 * 2.0 * ld * ld / 50.0 + 78.0 * 100.0 * ld * (-p * 25.0).exp();
    assert!((zero.ln() - want).abs() < 1e-9 * want);
}

#[test]
fn cover_on_complete_graphs_and_matchings() {
    for n in 1..=10 {
        let k = BipartiteRegularGraph::complete(n);
        let c = greedy_cover(k.graph(), n, n).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.len() as f64 <= cover_size_bound(n, n, n));
        let m = BipartiteRegularGraph::perfect_matching(n);
        let c = greedy_cover(m.graph(), 1, 1).unwrap();
        assert_eq!(c, (0..n).collect::<Vec<_>>());
        assert!(c.len() as f64 <= cover_size_bound(n, 1, 1));
    }
}

fn covers(g: &BipartiteGraph, ys: &[usize]) -> bool {
    let chosen: BTreeSet<usize> = ys.iter().copied().collect();
    g.x_adj.iter().all(|l| l.iter().any(|y| chosen.contains(y)))
}

#[test]
fn cover_on_random_graphs() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = rng.gen_range(2..40);
        let ny = rng.gen_range(2..40);
        let deg = rng.gen_range(1..=ny.min(6));
        let mut edges = Vec::new();
        for x in 0..nx {
            for _ in 0..rng.gen_range(1..=deg) {
                edges.push((x, rng.gen_range(0..ny)));
            }
        }
        let g = BipartiteGraph::from_edges(nx, ny, &edges);
        let (a, b) = (g.min_x_degree(), g.max_y_degree());
        let c = greedy_cover(&g, a, b).unwrap();
        assert!(covers(&g, &c), "seed {seed}");
        assert!(c.len() as f64 <= cover_size_bound(ny, a, b), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_approx_replays_and_rebuilds(idx in 0usize..1000, phi in 1usize..4, seed in any::<u64>()) {
        let g = cube(4);
        let sets = small_two_linked_sets(&g).unwrap();
        let a = &sets[idx % sets.len()];
        let c = phi as f64 * 4.0 / (2.0 * 4f64.ln());
        let one = first_approx(&g, a, phi, c, seed, DEFAULT_RETRY_CAP).unwrap();
        let two = first_approx(&g, a, phi, c, seed, DEFAULT_RETRY_CAP).unwrap();
        prop_assert_eq!(&one, &two);
        prop_assert_eq!(reconstruct_f_prime(&g, &one.1), one.1.f_prime.clone());
    }
}
