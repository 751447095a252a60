use hcube::cube::{
    closure, hamming, is_k_linked, iso_scan, neighborhood, two_components, CubeGraph, IsoMode, Parity, Vertex,
    VertexSet,
};
use proptest::prelude::*;

fn one_sided(g: &CubeGraph, odd: bool, mask: u64) -> VertexSet {
    let side = if odd { Parity::Odd } else { Parity::Even };
    let verts: Vec<Vertex> = g.side_vertices(side).collect();
    g.set_of(verts.into_iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, v)| v))
}

/// Subsets of `V(Q_d)` of size `n` containing vertex 0 that are connected
/// when joining pairs at distance at most `k`.
fn count_linked_through_origin(d: u32, n: usize, k: u32) -> u64 {
    if n == 1 {
        return 1;
    }
    let g = CubeGraph::new(d).unwrap();
    let others: Vec<Vertex> = (1..1u64 << d).collect();
    let mut count = 0;
    let mut idx: Vec<usize> = (0..n - 1).collect();
    loop {
        let mut members = vec![0];
        members.extend(idx.iter().map(|&i| others[i]));
        if is_k_linked(&g, &g.set_of(members), k) {
            count += 1;
        }
        let mut i = idx.len();
        while i > 0 && idx[i - 1] == others.len() - idx.len() + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return count;
        }
        idx[i - 1] += 1;
        for j in i..idx.len() {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[test]
fn linked_subset_counts() {
    assert_eq!(count_linked_through_origin(3, 2, 2), 6);
    for d in [3u32, 4] {
        let df = d as f64;
        for n in 1..=3usize {
            for k in 1..=3u32 {
                let bound = (3.0 * n as f64 * k as f64 * df.ln()).exp();
                assert!((count_linked_through_origin(d, n, k) as f64) <= bound);
            }
        }
        for n in 1..=4usize {
            let connected = count_linked_through_origin(d, n, 1) as f64;
            assert!(connected <= (std::f64::consts::E * df).powi(n as i32 - 1), "d={d} n={n}");
        }
    }
}

#[test]
fn strict_expansion_of_small_sets() {
    for d in [3u32, 4] {
        let g = CubeGraph::new(d).unwrap();
        for size in 1..=(1usize << (d - 2)) {
            let r = iso_scan(&g, Parity::Even, size, IsoMode::Exhaustive, None).unwrap();
            assert!(r.lemma10_ok, "d={d} size={size}");
        }
    }
}

#[test]
fn near_linear_expansion_of_tiny_sets() {
    for d in [20u32, 30] {
        let g = CubeGraph::new(d).unwrap();
        for size in 1..=2usize {
            let r = iso_scan(&g, Parity::Even, size, IsoMode::SymmetryReduced, None).unwrap();
            assert!(r.lemma9_ok, "d={d} size={size}");
            let need = d as u64 * size as u64 - 2 * size as u64 * (size as u64 - 1);
            assert!(*r.min_ratio.numer() * size as u64 >= need * *r.min_ratio.denom());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closure_is_idempotent(d in 2u32..=6, odd in any::<bool>(), mask in any::<u64>()) {
        let g = CubeGraph::new(d).unwrap();
        let a = one_sided(&g, odd, mask);
        let c = closure(&g, &a).unwrap();
        prop_assert!(a.is_subset(&c));
        prop_assert_eq!(neighborhood(&g, &c), neighborhood(&g, &a));
        prop_assert_eq!(closure(&g, &c).unwrap(), c);
    }

    #[test]
    fn two_components_are_separated(d in 2u32..=6, odd in any::<bool>(), mask in any::<u64>()) {
        let g = CubeGraph::new(d).unwrap();
        let a = one_sided(&g, odd, mask);
        let dec = two_components(&g, &a).unwrap();
        let mut union = g.empty_set();
        for (i, p) in dec.parts.iter().enumerate() {
            prop_assert!(is_k_linked(&g, p, 2));
            union = union.union(p);
            for q in &dec.parts[i + 1..] {
                for u in p.iter() {
                    for v in q.iter() {
                        prop_assert!(hamming(u, v) >= 3);
                    }
                }
            }
        }
        prop_assert_eq!(union, a);
    }

    #[test]
    fn perturbed_linked_sets_stay_linked(
        d in 3u32..=8,
        start in any::<u64>(),
        steps in proptest::collection::vec((0u32..64, 0u32..64), 0..8),
        flips in proptest::collection::vec(any::<u64>(), 8),
        ell in 0u32..=3,
    ) {
        let g = CubeGraph::new(d).unwrap();
        let n = g.num_vertices();
        // A grows by distance-2 moves, so it is 2-linked.
        let mut a = vec![start % n];
        for &(i, j) in &steps {
            let base = a[a.len() - 1];
            let (i, j) = (i % d, j % d);
            a.push(base ^ (1 << i) ^ (1 << j));
        }
        prop_assert!(is_k_linked(&g, &g.set_of(a.clone()), 2));
        // Each member moves by at most ell coordinates.
        let t: Vec<Vertex> = a
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = flips[i % flips.len()];
                let mut w = v;
                for b in 0..ell {
                    w ^= 1 << ((f >> (8 * b)) % d as u64);
                }
                w
            })
            .collect();
        prop_assert!(is_k_linked(&g, &g.set_of(t), 2 + 2 * ell));
    }
}
