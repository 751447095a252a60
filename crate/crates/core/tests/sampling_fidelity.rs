use std::collections::BTreeMap;

use hcube::cube::{CubeGraph, VertexSet};
use hcube::exact::{bivariate_profile, min_side_pmf, structure_pmf};
use hcube::rational::parse_rational;
use hcube::sampling::{chain_estimate, exact_sample, inclusion_probability, summarize, GlauberChain};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn independent_masks(d: u32) -> Vec<u64> {
    let n = 1u64 << d;
    (0u64..(1 << n))
        .filter(|s| (0..n).all(|v| s >> v & 1 == 0 || (0..d).all(|i| s >> (v ^ (1 << i)) & 1 == 0)))
        .collect()
}

#[test]
fn detailed_balance_on_tiny_cubes() {
    for d in 1..=2u32 {
        let g = CubeGraph::new(d).unwrap();
        let n = g.num_vertices();
        let states = independent_masks(d);
        for lambda in [0.5f64, 1.0, 2.5] {
            let pi: Vec<f64> = states.iter().map(|s| lambda.powi(s.count_ones() as i32)).collect();
            let z: f64 = pi.iter().sum();
            let index = |m: u64| states.iter().position(|&s| s == m).unwrap();
            let mut p = vec![vec![0.0; states.len()]; states.len()];
            for (i, &s) in states.iter().enumerate() {
                let set = VertexSet::from_mask(n as usize, s);
                for v in 0..n {
                    let q = inclusion_probability(&g, &set, v, lambda);
                    if q > 0.0 {
                        p[i][index(s | 1 << v)] += q / n as f64;
                    }
                    p[i][index(s & !(1 << v))] += (1.0 - q) / n as f64;
                }
            }
            for i in 0..states.len() {
                assert!((p[i].iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for j in 0..states.len() {
                    let lhs = pi[i] / z * p[i][j];
                    let rhs = pi[j] / z * p[j][i];
                    assert!((lhs - rhs).abs() <= 1e-12, "d={d} λ={lambda} {i}->{j}");
                }
            }
        }
    }
}

#[test]
fn exact_sampler_chi_square() {
    for d in 1..=3u32 {
        let lambda: f64 = 1.5;
        let states = independent_masks(d);
        let weights: Vec<f64> = states.iter().map(|s| lambda.powi(s.count_ones() as i32)).collect();
        let z: f64 = weights.iter().sum();
        let n = 100_000usize;
        let samples = exact_sample(d, lambda, 20 + d as u64, n).unwrap();
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for s in &samples {
            *counts.entry(s.low_mask()).or_insert(0) += 1;
        }
        let stat: f64 = states
            .iter()
            .zip(&weights)
            .map(|(s, w)| {
                let expected = n as f64 * w / z;
                let observed = counts.get(s).copied().unwrap_or(0) as f64;
                (observed - expected).powi(2) / expected
            })
            .sum();
        let dist = ChiSquared::new((states.len() - 1) as f64).unwrap();
        let p_value = 1.0 - dist.cdf(stat);
        assert!(p_value > 0.001, "d={d} chi2={stat} p={p_value}");
    }
}

#[test]
fn exact_sampler_structure_law_at_d4() {
    let g = CubeGraph::new(4).unwrap();
    let samples = exact_sample(4, 1.0, 99, 100_000).unwrap();
    let summary = summarize(&samples, &g).unwrap();
    let one = parse_rational("1").unwrap();
    let pmf = min_side_pmf(&bivariate_profile(4).unwrap(), &one).unwrap();
    let freq = summary.min_side_frequencies();
    let keys: std::collections::BTreeSet<usize> = pmf.keys().chain(freq.keys()).copied().collect();
    let tv: f64 = keys
        .iter()
        .map(|k| (pmf.get(k).map_or(0.0, |p| p.to_f64()) - freq.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.01, "min-side TV {tv}");

    let joint = structure_pmf(4, &one).unwrap();
    let mut exact_kcl: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((_, k, cl), p) in &joint {
        *exact_kcl.entry((*k, *cl)).or_insert(0.0) += p.to_f64();
    }
    let keys: std::collections::BTreeSet<(usize, usize)> =
        exact_kcl.keys().chain(summary.component_histogram.keys()).copied().collect();
    let tv: f64 = keys
        .iter()
        .map(|k| {
            let emp = summary.component_histogram.get(k).copied().unwrap_or(0) as f64 / summary.n as f64;
            (exact_kcl.get(k).copied().unwrap_or(0.0) - emp).abs()
        })
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "component TV {tv}");
}

#[test]
fn glauber_matches_stationary_law() {
    // d=1: each vertex occupied with probability λ/(1+2λ).
    for lambda in [1.0, 2.0] {
        let mut chain = GlauberChain::new(1, lambda, 5).unwrap();
        chain.run(1000);
        let est = chain_estimate(&mut chain, 1_000_000, 100, |s| s.contains(0) as u8 as f64);
        let exact = lambda / (1.0 + 2.0 * lambda);
        assert!((est.mean - exact).abs() <= 3.0 * est.std_err, "{est:?} vs {exact}");
    }
    // d=2, λ=1: P(I = ∅) = 1/7.
    let mut chain = GlauberChain::new(2, 1.0, 6).unwrap();
    chain.run(1000);
    let est = chain_estimate(&mut chain, 1_000_000, 100, |s| s.is_empty() as u8 as f64);
    assert!((est.mean - 1.0 / 7.0).abs() <= 3.0 * est.std_err, "{est:?}");
}
