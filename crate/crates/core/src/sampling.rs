//! Exact and Glauber sampling from hc(λ) with summary statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cube::{component_stats, CubeGraph, Parity, Vertex, VertexSet, MAX_BITSET_DIM};
use crate::error::{Error, Result};
use crate::exact::MAX_ENUM_DIM;

/// Label attached to Glauber summaries: the chain stays in one phase at large λ.
pub const SINGLE_PHASE_LABEL: &str = "empirical, single-phase";

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveLambda)
    }
}

/// Inversion sampler over the full list of independent sets (d <= 5).
pub struct ExactSampler {
    d: u32,
    sets: Vec<u64>,
    cumulative: Vec<f64>,
}

impl ExactSampler {
    pub fn new(d: u32, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        if d > MAX_ENUM_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_ENUM_DIM });
        }
        let g = CubeGraph::new(d)?;
        let n = g.num_vertices();
        let even: Vec<Vertex> = g.side_vertices(Parity::Even).collect();
        let odd_all = g.side_vertices(Parity::Odd).fold(0u64, |m, v| m | 1 << v);
        let mut sets = Vec::new();
        for s in 0u64..(1u64 << even.len()) {
            let chosen = (0..even.len())
                .filter(|i| s >> i & 1 == 1)
                .fold(0u64, |m, i| m | 1 << even[i]);
            let blocked = (0..n)
                .filter(|v| chosen >> v & 1 == 1)
                .fold(0u64, |m, v| g.neighbors(v).fold(m, |m, w| m | 1 << w));
            let free = odd_all & !blocked;
            let mut t = free;
            loop {
                sets.push(chosen | t);
                if t == 0 {
                    break;
                }
                t = (t - 1) & free;
            }
        }
        sets.sort_unstable();
        let ln_l = lambda.ln();
        let mut total = 0.0;
        let cumulative = sets
            .iter()
            .map(|s| {
                total += (s.count_ones() as f64 * ln_l).exp();
                total
            })
            .collect();
        Ok(ExactSampler { d, sets, cumulative })
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> VertexSet {
        let total = *self.cumulative.last().unwrap();
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.sets.len() - 1);
        VertexSet::from_mask(1 << self.d, self.sets[i])
    }
}

/// `n` draws from hc(λ) on `Q_d`, `d <= 5`.
pub fn exact_sample(d: u32, lambda: f64, seed: u64, n: usize) -> Result<Vec<VertexSet>> {
    let sampler = ExactSampler::new(d, lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| sampler.draw(&mut rng)).collect())
}

/// Probability that a heat-bath update at `v` leaves `v` occupied.
pub fn inclusion_probability(g: &CubeGraph, set: &VertexSet, v: Vertex, lambda: f64) -> f64 {
    if g.neighbors(v).any(|w| set.contains(w)) {
        0.0
    } else {
        lambda / (1.0 + lambda)
    }
}

/// Single-site heat-bath chain started from the empty set.
pub struct GlauberChain {
    g: CubeGraph,
    lambda: f64,
    current: VertexSet,
    rng: ChaCha8Rng,
    steps_taken: u64,
}

impl GlauberChain {
    pub fn new(d: u32, lambda: f64, seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        if d > MAX_BITSET_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_BITSET_DIM });
        }
        let g = CubeGraph::new(d)?;
        Ok(GlauberChain {
            current: g.empty_set(),
            g,
            lambda,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps_taken: 0,
        })
    }

    pub fn graph(&self) -> &CubeGraph {
        &self.g
    }

    pub fn current(&self) -> &VertexSet {
        &self.current
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn step(&mut self) {
        let v = self.rng.gen_range(0..self.g.num_vertices());
        let p = inclusion_probability(&self.g, &self.current, v, self.lambda);
        if p > 0.0 && self.rng.gen::<f64>() < p {
            self.current.insert(v);
        } else {
            self.current.remove(v);
        }
        self.steps_taken += 1;
        debug_assert!(!self.current.contains(v) || self.g.neighbors(v).all(|w| !self.current.contains(w)));
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

/// Burn-in `100·d·2^d` and thinning `2^d` site updates.
pub fn default_schedule(d: u32) -> (u64, u64) {
    let n = 1u64 << d;
    (100 * d as u64 * n, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSummary {
    pub n: u64,
    pub min_side_histogram: BTreeMap<usize, u64>,
    pub max_side_histogram: BTreeMap<usize, u64>,
    /// Keyed by `(k, cl)` of the minority side.
    pub component_histogram: BTreeMap<(usize, usize), u64>,
    /// `|I ∩ E| - |I ∩ O|` per recorded sample.
    pub parity_gap_trace: Option<Vec<i64>>,
    pub label: Option<String>,
}

impl SampleSummary {
    pub fn new() -> Self {
        SampleSummary {
            n: 0,
            min_side_histogram: BTreeMap::new(),
            max_side_histogram: BTreeMap::new(),
            component_histogram: BTreeMap::new(),
            parity_gap_trace: None,
            label: None,
        }
    }

    /// Fraction of samples whose minority side is empty.
    pub fn p_min_zero(&self) -> Ratio<u64> {
        if self.n == 0 {
            return Ratio::new(0, 1);
        }
        Ratio::new(self.min_side_histogram.get(&0).copied().unwrap_or(0), self.n)
    }

    pub fn record(&mut self, g: &CubeGraph, set: &VertexSet) -> Result<()> {
        if let Some((u, v)) = g.first_edge(set) {
            return Err(Error::NotIndependent(u, v));
        }
        let even: Vec<Vertex> = set.iter().filter(|&v| Parity::of(v) == Parity::Even).collect();
        let odd: Vec<Vertex> = set.iter().filter(|&v| Parity::of(v) == Parity::Odd).collect();
        let minority = if even.len() <= odd.len() { &even } else { &odd };
        let kcl = component_stats(g, minority);
        self.n += 1;
        *self.min_side_histogram.entry(even.len().min(odd.len())).or_insert(0) += 1;
        *self.max_side_histogram.entry(even.len().max(odd.len())).or_insert(0) += 1;
        *self.component_histogram.entry(kcl).or_insert(0) += 1;
        if let Some(trace) = self.parity_gap_trace.as_mut() {
            trace.push(even.len() as i64 - odd.len() as i64);
        }
        Ok(())
    }

    /// Combines two summaries; traces concatenate in argument order.
    pub fn merge(&self, other: &SampleSummary) -> SampleSummary {
        fn add<K: Ord + Clone>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> BTreeMap<K, u64> {
            let mut out = a.clone();
            for (k, v) in b {
                *out.entry(k.clone()).or_insert(0) += v;
            }
            out
        }
        let parity_gap_trace = match (&self.parity_gap_trace, &other.parity_gap_trace) {
            (None, None) => None,
            (a, b) => Some(
                a.iter()
                    .flatten()
                    .chain(b.iter().flatten())
                    .copied()
                    .collect(),
            ),
        };
        SampleSummary {
            n: self.n + other.n,
            min_side_histogram: add(&self.min_side_histogram, &other.min_side_histogram),
            max_side_histogram: add(&self.max_side_histogram, &other.max_side_histogram),
            component_histogram: add(&self.component_histogram, &other.component_histogram),
            parity_gap_trace,
            label: self.label.clone().or_else(|| other.label.clone()),
        }
    }

    /// Empirical law of the minority-side size.
    pub fn min_side_frequencies(&self) -> BTreeMap<usize, f64> {
        self.min_side_histogram
            .iter()
            .map(|(k, c)| (*k, *c as f64 / self.n as f64))
            .collect()
    }
}

impl Default for SampleSummary {
    fn default() -> Self {
        Self::new()
    }
}

pub fn summarize(samples: &[VertexSet], g: &CubeGraph) -> Result<SampleSummary> {
    let mut s = SampleSummary::new();
    for set in samples {
        s.record(g, set)?;
    }
    Ok(s)
}

/// Runs a fresh chain: `burn_in` updates, then `n` samples `thin` updates apart.
pub fn glauber_run(
    d: u32,
    lambda: f64,
    seed: u64,
    burn_in: u64,
    n: u64,
    thin: u64,
) -> Result<SampleSummary> {
    let mut chain = GlauberChain::new(d, lambda, seed)?;
    chain.run(burn_in);
    let mut summary = SampleSummary::new();
    summary.parity_gap_trace = Some(Vec::with_capacity(n as usize));
    summary.label = Some(SINGLE_PHASE_LABEL.to_string());
    for _ in 0..n {
        chain.run(thin.max(1));
        summary.record(&chain.g, &chain.current)?;
    }
    Ok(summary)
}

/// Mean and batch-means standard error of an observable along a chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Averages `f(state)` after each of `steps` updates; the standard error comes
/// from `batches` contiguous batch means.
pub fn chain_estimate<F: FnMut(&VertexSet) -> f64>(
    chain: &mut GlauberChain,
    steps: u64,
    batches: u64,
    mut f: F,
) -> Estimate {
    assert!(batches >= 2 && steps >= batches);
    let per = steps / batches;
    let means: Vec<f64> = (0..batches)
        .map(|_| {
            let mut acc = 0.0;
            for _ in 0..per {
                chain.step();
                acc += f(&chain.current);
            }
            acc / per as f64
        })
        .collect();
    let b = batches as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    Estimate {
        mean,
        std_err: (var / b).sqrt(),
    }
}

/// Sample dump: header `d=<d> lambda=<decimal> seed=<int>`, then one hex mask
/// per line.
pub fn format_dump(d: u32, lambda: &str, seed: u64, samples: &[VertexSet]) -> String {
    let mut out = format!("d={d} lambda={lambda} seed={seed}\n");
    for s in samples {
        writeln!(out, "{}", s.to_hex()).unwrap();
    }
    out
}

pub fn parse_dump(text: &str) -> Result<(u32, String, u64, Vec<VertexSet>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty dump".into(),
    })?;
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 3 {
        return Err(bad("expected `d=<d> lambda=<decimal> seed=<int>`"));
    }
    let d: u32 = fields[0]
        .strip_prefix("d=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad d"))?;
    let lambda = fields[1].strip_prefix("lambda=").ok_or_else(|| bad("bad lambda"))?;
    let seed: u64 = fields[2]
        .strip_prefix("seed=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad seed"))?;
    if d == 0 || d > MAX_BITSET_DIM {
        return Err(bad("dimension out of range"));
    }
    let sets = lines
        .enumerate()
        .map(|(i, l)| {
            VertexSet::from_hex(1 << d, l).map_err(|_| Error::Parse {
                line: i + 2,
                msg: "bad hex mask".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((d, lambda.to_string(), seed, sets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_d1_frequencies() {
        let samples = exact_sample(1, 2.0, 7, 50_000).unwrap();
        let empty = samples.iter().filter(|s| s.is_empty()).count() as f64 / 50_000.0;
        assert!((empty - 0.2).abs() < 0.01, "{empty}");
        assert_eq!(exact_sample(1, 2.0, 7, 100).unwrap(), exact_sample(1, 2.0, 7, 100).unwrap());
        assert!(matches!(exact_sample(6, 1.0, 0, 1), Err(Error::DimensionTooLarge { .. })));
        assert_eq!(ExactSampler::new(4, 1.0).unwrap().num_sets(), 743);
    }

    #[test]
    fn summarize_examples() {
        let g = CubeGraph::new(3).unwrap();
        let s = summarize(&[g.empty_set(), g.empty_set()], &g).unwrap();
        assert_eq!(s.p_min_zero(), Ratio::new(1, 1));
        assert_eq!(s.component_histogram, BTreeMap::from([((0, 0), 2)]));
        let s = summarize(&[g.set_of([0b000, 0b111])], &g).unwrap();
        assert_eq!(s.min_side_histogram, BTreeMap::from([(1, 1)]));
        assert_eq!(s.component_histogram, BTreeMap::from([((1, 1), 1)]));
        assert_eq!(summarize(&[g.set_of([0, 1])], &g), Err(Error::NotIndependent(0, 1)));
    }

    #[test]
    fn merge_adds_histograms() {
        let g = CubeGraph::new(3).unwrap();
        let a = summarize(&[g.empty_set()], &g).unwrap();
        let b = summarize(&[g.set_of([0b000, 0b111])], &g).unwrap();
        let m = a.merge(&b);
        assert_eq!(m.n, 2);
        assert_eq!(m.p_min_zero(), Ratio::new(1, 2));
        assert_eq!(m.merge(&SampleSummary::new()), m);
    }

    #[test]
    fn chain_stays_independent() {
        let mut chain = GlauberChain::new(5, 3.0, 11).unwrap();
        for _ in 0..20_000 {
            chain.step();
            assert!(chain.graph().is_independent(chain.current()));
        }
        assert_eq!(chain.steps_taken(), 20_000);
    }

    #[test]
    fn glauber_is_deterministic() {
        let a = glauber_run(4, 1.0, 3, 1000, 50, 16).unwrap();
        let b = glauber_run(4, 1.0, 3, 1000, 50, 16).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.label.as_deref(), Some(SINGLE_PHASE_LABEL));
        assert_eq!(a.parity_gap_trace.as_ref().unwrap().len(), 50);
    }

    #[test]
    fn dump_round_trip() {
        let samples = exact_sample(3, 1.0, 5, 20).unwrap();
        let text = format_dump(3, "1", 5, &samples);
        assert!(text.starts_with("d=3 lambda=1 seed=5\n"));
        let (d, l, seed, back) = parse_dump(&text).unwrap();
        assert_eq!((d, l.as_str(), seed), (3, "1", 5));
        assert_eq!(back, samples);
    }
}
