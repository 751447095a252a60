//! Contract harness: runs both approximation stages over many source sets
//! and checks every stage condition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    check_first, check_second, first_approx_with, reconstruct_f_prime, second_approx, BipartiteRegularGraph,
    ContainerPair, DEFAULT_RETRY_CAP,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessRow {
    pub d: usize,
    pub size_a: usize,
    pub a: usize,
    pub g: usize,
    pub t: usize,
    pub phi_or_psi: usize,
    pub stage: &'static str,
    pub pass: bool,
    pub slack_outer: f64,
    pub slack_inner: f64,
    pub size_f: usize,
    pub size_s: usize,
}

/// A pair produced by the pipeline, with where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Emitted {
    pub source: Vec<usize>,
    pub a: usize,
    pub g: usize,
    pub phi: usize,
    pub psi: Option<usize>,
    pub pair: ContainerPair,
}

#[derive(Clone, Debug, Default)]
pub struct HarnessReport {
    pub rows: Vec<HarnessRow>,
    pub emitted: Vec<Emitted>,
    pub failures: Vec<String>,
}

impl HarnessReport {
    pub fn all_pass(&self) -> bool {
        self.failures.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn pass_count(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,size_A,a,g,t,phi_or_psi,stage,pass,slack_outer,slack_inner,size_F,size_S\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.d, r.size_a, r.a, r.g, r.t, r.phi_or_psi, r.stage, r.pass, r.slack_outer, r.slack_inner,
                r.size_f, r.size_s
            );
        }
        out
    }
}

/// Every 2-linked `A ⊆ X` with `|[A]| ≤ |X|/2`, as ascending index lists.
pub fn small_two_linked_sets(g: &BipartiteRegularGraph) -> Result<Vec<Vec<usize>>> {
    let n = g.side_size();
    if n > 20 {
        return Err(Error::Range(format!("side of size {n} is too large for exhaustive search")));
    }
    Ok((1u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|a| g.is_two_linked(a) && g.is_small(a))
        .collect())
}

/// `count` 2-linked small sets grown at random: a uniform start vertex, a
/// uniform target size up to `|X|/2`, then repeated uniform additions of a
/// vertex sharing a neighbour with the current set. Oversized closures are
/// discarded and redrawn.
pub fn random_small_two_linked_sets(g: &BipartiteRegularGraph, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let n = g.side_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let target = rng.gen_range(1..=(n / 2).max(1));
        let mut a = vec![rng.gen_range(0..n)];
        while a.len() < target {
            let frontier: BTreeSet<usize> = a
                .iter()
                .flat_map(|&x| g.x_neighbors(x))
                .flat_map(|&y| g.y_neighbors(y).iter().copied())
                .filter(|w| !a.contains(w))
                .collect();
            let frontier: Vec<usize> = frontier.into_iter().collect();
            match frontier.choose(&mut rng) {
                Some(&w) => a.push(w),
                None => break,
            }
        }
        a.sort_unstable();
        if g.is_small(&a) {
            out.push(a);
        }
    }
    out
}

/// `C` making the sampling probability `C log d/(φd)` equal to one half.
pub fn half_probability_c(d: usize, phi: usize) -> f64 {
    phi as f64 * d as f64 / (2.0 * (d as f64).ln())
}

/// Runs the first stage for every `φ ∈ [1, d−1]` and the second stage for
/// every `ψ ∈ [1, d/2]` on each source set.
pub fn run_on_sets(g: &BipartiteRegularGraph, sets: &[Vec<usize>], seed: u64) -> HarnessReport {
    let d = g.degree();
    let m_phi: Vec<usize> = (0..d).map(|phi| g.m_phi(phi).unwrap_or(0)).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(sets.len().max(1));
    let chunk = sets.len().div_ceil(workers).max(1);
    let parts: Vec<HarnessReport> = std::thread::scope(|s| {
        let handles: Vec<_> = sets
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                let m_phi = &m_phi;
                s.spawn(move || {
                    let mut rep = HarnessReport::default();
                    for (i, a) in part.iter().enumerate() {
                        let index = (ci * chunk + i) as u64;
                        run_one(g, a, seed.wrapping_add(index.wrapping_mul(0x9E37_79B9)), m_phi, &mut rep);
                    }
                    rep
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("harness worker")).collect()
    });
    let mut out = HarnessReport::default();
    for p in parts {
        out.rows.extend(p.rows);
        out.emitted.extend(p.emitted);
        out.failures.extend(p.failures);
    }
    out
}

fn run_one(g: &BipartiteRegularGraph, a: &[usize], seed: u64, m_phi: &[usize], rep: &mut HarnessReport) {
    let d = g.degree();
    let cl = g.closure(a).len();
    let gsz = g.neighborhood(a).iter().filter(|&&b| b).count();
    let t = gsz - cl;
    let row = |phi_or_psi, stage, pass, slack_outer, slack_inner, pair: &ContainerPair| HarnessRow {
        d,
        size_a: a.len(),
        a: cl,
        g: gsz,
        t,
        phi_or_psi,
        stage,
        pass,
        slack_outer,
        slack_inner,
        size_f: pair.outer.len(),
        size_s: pair.inner.len(),
    };
    for phi in 1..d {
        let c = half_probability_c(d, phi);
        let s = seed.wrapping_add(phi as u64);
        let (pair, tr) = match first_approx_with(g, a, phi, c, s, DEFAULT_RETRY_CAP, m_phi[phi]) {
            Ok(r) => r,
            Err(e) => {
                rep.failures.push(format!("first_approx {a:?} φ={phi}: {e}"));
                continue;
            }
        };
        let check = check_first(g, a, &pair).expect("source set is valid");
        let mut pass = check.pass;
        if reconstruct_f_prime(g, &tr) != tr.f_prime {
            pass = false;
            rep.failures.push(format!("{a:?} φ={phi}: F′ not reconstructible"));
        }
        // Each refinement step removes more than φ vertices from a pool of
        // at most td/(d−φ).
        if tr.refinement.len() * phi * (d - phi) > d * t + phi * (d - phi) {
            pass = false;
            rep.failures.push(format!("{a:?} φ={phi}: {} refinement steps", tr.refinement.len()));
        }
        rep.rows.push(row(phi, "first", pass, check.slack_outer, check.slack_inner, &pair));
        for psi in 1..=d / 2 {
            match second_approx(g, a, &pair, psi) {
                Ok(second) => {
                    let c2 = check_second(g, a, &second).expect("source set is valid");
                    rep.rows.push(row(psi, "second", c2.pass, c2.slack_outer, c2.slack_inner, &second));
                    if !c2.pass {
                        rep.failures.push(format!("{a:?} φ={phi} ψ={psi}: {:?}", c2.violations));
                    }
                    rep.emitted.push(Emitted {
                        source: a.to_vec(),
                        a: cl,
                        g: gsz,
                        phi,
                        psi: Some(psi),
                        pair: second,
                    });
                }
                Err(e) => rep.failures.push(format!("second_approx {a:?} φ={phi} ψ={psi}: {e}")),
            }
        }
        if !check.pass {
            rep.failures.push(format!("{a:?} φ={phi}: {:?}", check.violations));
        }
        rep.emitted.push(Emitted {
            source: a.to_vec(),
            a: cl,
            g: gsz,
            phi,
            psi: None,
            pair,
        });
    }
}

/// Exhaustive harness when `|X| ≤ 20`, otherwise `random` seeded sets.
pub fn run_harness(g: &BipartiteRegularGraph, random: Option<usize>, seed: u64) -> Result<HarnessReport> {
    let sets = match random {
        Some(n) => random_small_two_linked_sets(g, n, seed),
        None => small_two_linked_sets(g)?,
    };
    Ok(run_on_sets(g, &sets, seed))
}

/// Facts about one member of `𝒢(a, g)`.
#[derive(Clone, Debug)]
pub struct Member {
    pub size: usize,
    pub a: usize,
    pub g: usize,
    pub neighborhood: Vec<bool>,
    pub closure: Vec<bool>,
}

pub fn members(g: &BipartiteRegularGraph, sets: &[Vec<usize>]) -> Vec<Member> {
    let n = g.side_size();
    sets.iter()
        .map(|a| {
            let neighborhood = g.neighborhood(a);
            let cl = g.closure(a);
            let mut closure = vec![false; n];
            for &x in &cl {
                closure[x] = true;
            }
            Member {
                size: a.len(),
                a: cl.len(),
                g: neighborhood.iter().filter(|&&b| b).count(),
                neighborhood,
                closure,
            }
        })
        .collect()
}

/// `ln Σ λ^{|A|}` over members with the given `(a, g)`, `F ⊆ N(A)` and
/// `S ⊇ [A]`; `None` when no member qualifies.
pub fn consistent_weight_ln(all: &[Member], a: usize, g: usize, pair: &ContainerPair, lambda: f64) -> Option<f64> {
    let mut total = 0.0;
    let mut any = false;
    for m in all.iter().filter(|m| m.a == a && m.g == g) {
        let f_in = pair.outer.iter().all(|&y| m.neighborhood[y]);
        let s_out = (0..m.closure.len()).all(|x| !m.closure[x] || pair.inner.contains(&x));
        if f_in && s_out {
            total += lambda.powi(m.size as i32);
            any = true;
        }
    }
    any.then(|| total.ln())
}

/// Family sizes observed per `(a, g)`: distinct first-stage pairs, and the
/// largest number of distinct second-stage pairs arising from one
/// first-stage pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub a: usize,
    pub g: usize,
    pub t: usize,
    pub family1: usize,
    pub max_family2: usize,
}

pub fn census(report: &HarnessReport, phi: usize, psi: usize) -> Vec<CensusRow> {
    type Key = (BTreeSet<usize>, BTreeSet<usize>);
    let mut first: BTreeMap<(usize, usize), BTreeSet<Key>> = BTreeMap::new();
    let mut by_source: BTreeMap<&[usize], Key> = BTreeMap::new();
    for e in report.emitted.iter().filter(|e| e.phi == phi && e.psi.is_none()) {
        let key = (e.pair.outer.clone(), e.pair.inner.clone());
        first.entry((e.a, e.g)).or_default().insert(key.clone());
        by_source.insert(&e.source, key);
    }
    let mut second: BTreeMap<(usize, usize), BTreeMap<Key, BTreeSet<Key>>> = BTreeMap::new();
    for e in report.emitted.iter().filter(|e| e.phi == phi && e.psi == Some(psi)) {
        let class = by_source[e.source.as_slice()].clone();
        second
            .entry((e.a, e.g))
            .or_default()
            .entry(class)
            .or_default()
            .insert((e.pair.outer.clone(), e.pair.inner.clone()));
    }
    first
        .into_iter()
        .map(|((a, g), fam)| CensusRow {
            a,
            g,
            t: g - a,
            family1: fam.len(),
            max_family2: second
                .get(&(a, g))
                .map_or(0, |m| m.values().map(BTreeSet::len).max().unwrap_or(0)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::CubeGraph;

    #[test]
    fn q3_exhaustive_passes() {
        let g = BipartiteRegularGraph::from_cube(&CubeGraph::new(3).unwrap());
        let rep = run_harness(&g, None, 1).unwrap();
        assert!(rep.all_pass(), "{:?}", rep.failures);
        assert!(rep.to_csv().starts_with("d,size_A,a,g,t,phi_or_psi,stage,pass"));
    }

    #[test]
    fn random_sets_are_valid() {
        let g = BipartiteRegularGraph::from_cube(&CubeGraph::new(5).unwrap());
        let sets = random_small_two_linked_sets(&g, 50, 9);
        assert_eq!(sets.len(), 50);
        assert!(sets.iter().all(|a| g.is_two_linked(a) && g.is_small(a)));
        assert_eq!(sets, random_small_two_linked_sets(&g, 50, 9));
    }
}
