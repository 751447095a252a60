use std::collections::BTreeMap;

use hcube::cube::{CubeGraph, Vertex};
use hcube::exact::{bivariate_profile, conditional_occupancy, min_side_pmf, restricted_profile};
use hcube::rational::parse_rational;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

/// Depth-first over vertices in ascending id; including a vertex forbids its
/// neighbours. Counts independent sets by (even, odd) sizes.
fn dfs_counts(d: u32, forced_in: u64, forced_out: u64) -> BTreeMap<(usize, usize), u64> {
    fn go(
        d: u32,
        v: u64,
        chosen: u64,
        forced_in: u64,
        forced_out: u64,
        out: &mut BTreeMap<(usize, usize), u64>,
    ) {
        let n = 1u64 << d;
        if v == n {
            let even = (0..n).filter(|&u| chosen >> u & 1 == 1 && u.count_ones() % 2 == 0).count();
            let odd = chosen.count_ones() as usize - even;
            *out.entry((even, odd)).or_insert(0) += 1;
            return;
        }
        let blocked = (0..d).any(|i| {
            let w = v ^ (1 << i);
            w < v && chosen >> w & 1 == 1
        });
        if forced_in >> v & 1 == 0 {
            go(d, v + 1, chosen, forced_in, forced_out, out);
        }
        if !blocked && forced_out >> v & 1 == 0 {
            // Later forced vertices adjacent to v would be blocked; check now.
            let clash = (0..d).any(|i| forced_in >> (v ^ (1 << i)) & 1 == 1);
            if !clash {
                go(d, v + 1, chosen | 1 << v, forced_in, forced_out, out);
            }
        }
    }
    let mut out = BTreeMap::new();
    go(d, 0, 0, forced_in, forced_out, &mut out);
    out
}

/// Every subset of the 2^d vertices, kept when it has no edge.
fn exhaustive_counts(d: u32) -> BTreeMap<(usize, usize), u64> {
    let n = 1u64 << d;
    let even_mask = (0..n).filter(|v| v.count_ones() % 2 == 0).fold(0u64, |m, v| m | 1 << v);
    let mut out = BTreeMap::new();
    for s in 0u64..(1u64 << n) {
        let independent = (0..n).all(|v| {
            s >> v & 1 == 0 || (0..d).all(|i| s >> (v ^ (1 << i)) & 1 == 0)
        });
        if independent {
            let e = (s & even_mask).count_ones() as usize;
            let o = (s & !even_mask).count_ones() as usize;
            *out.entry((e, o)).or_insert(0) += 1;
        }
    }
    out
}

fn engine_counts(d: u32) -> BTreeMap<(usize, usize), u64> {
    bivariate_profile(d)
        .unwrap()
        .iter()
        .map(|(k, c)| (*k, u64::try_from(c).unwrap()))
        .collect()
}

#[test]
fn engine_matches_dfs_oracle() {
    let totals = [3u64, 7, 35, 743, 254475];
    for d in 1..=5u32 {
        let oracle = dfs_counts(d, 0, 0);
        assert_eq!(oracle.values().sum::<u64>(), totals[d as usize - 1]);
        assert_eq!(engine_counts(d), oracle, "d={d}");
    }
}

#[test]
fn engine_matches_exhaustive_oracle() {
    for d in 1..=4u32 {
        assert_eq!(engine_counts(d), exhaustive_counts(d), "d={d}");
    }
}

#[test]
fn min_side_masses_sum_to_one() {
    for d in 1..=5 {
        let p = bivariate_profile(d).unwrap();
        for l in ["1/5", "1", "4"] {
            let pmf = min_side_pmf(&p, &parse_rational(l).unwrap()).unwrap();
            let total: BigRational = pmf.values().map(|x| x.value().clone()).sum();
            assert_eq!(total, BigRational::one());
        }
    }
}

#[test]
fn influence_ordering_at_d5() {
    let one = parse_rational("1").unwrap();
    let u: Vertex = 0b00000;
    let v: Vertex = 0b00011;
    let w: Vertex = 0b00111;
    let near = conditional_occupancy(5, &one, v, u).unwrap();
    let far = conditional_occupancy(5, &one, w, u).unwrap();
    assert!(near > far, "{:?} vs {:?}", near.to_f64(), far.to_f64());
}

#[test]
fn conditional_occupancy_is_translation_invariant() {
    let l = parse_rational("3/2").unwrap();
    let g = CubeGraph::new(4).unwrap();
    for (c, t) in [(0u64, 3u64), (0, 15), (1, 14), (5, 6)] {
        let base = conditional_occupancy(4, &l, c, t).unwrap();
        for flip in 0..4 {
            let f = 1 << flip;
            assert_eq!(conditional_occupancy(4, &l, c ^ f, t ^ f).unwrap(), base);
        }
        for nb in g.neighbors(c) {
            assert_eq!(conditional_occupancy(4, &l, c, nb).unwrap().to_f64(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_matches_dfs(d in 1u32..=4, a in any::<u64>(), b in any::<u64>()) {
        let n = 1u64 << d;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        // Sparse forced sets so that most draws are independent.
        let forced_in = a & b & (a >> 7) & mask;
        let forced_out = b & !forced_in & (b >> 3) & mask;
        let g = CubeGraph::new(d).unwrap();
        let fin = g.set_of((0..n).filter(|v| forced_in >> v & 1 == 1));
        let fout = g.set_of((0..n).filter(|v| forced_out >> v & 1 == 1));
        match restricted_profile(d, &fin, &fout) {
            Ok(p) => {
                let got: BTreeMap<(usize, usize), u64> =
                    p.iter().map(|(k, c)| (*k, u64::try_from(c).unwrap())).collect();
                prop_assert_eq!(got, dfs_counts(d, forced_in, forced_out));
            }
            Err(_) => prop_assert!(g.first_edge(&fin).is_some()),
        }
    }

    #[test]
    fn profile_text_round_trips(d in 1u32..=5) {
        let p = bivariate_profile(d).unwrap();
        let text = p.to_text();
        let back = hcube::exact::BivariateProfile::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.total(), p.total());
    }
}

#[test]
fn d6_total() {
    let p = bivariate_profile(6).unwrap();
    assert_eq!(p.total(), BigUint::from(19768832143u64));
    p.check_invariants().unwrap();
}
