//! Vertex-isoperimetric scans over one-sided sets of a fixed size.

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CubeGraph, Parity, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoMode {
    /// Every `size`-subset of the side.
    Exhaustive,
    /// One representative per orbit class: sets are translated to contain the
    /// origin of the side and the remaining members are generated up to a
    /// permutation of coordinates.
    SymmetryReduced,
    /// `samples` uniformly random `size`-subsets.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsoScanReport {
    /// `min |N(A)| / |A|` over scanned sets.
    pub min_ratio: Ratio<u64>,
    /// A set attaining `min_ratio`, as an ascending vertex list.
    pub witness: Vec<Vertex>,
    /// `|N(A)| >= d|A| - 2|A|(|A|-1)` for every scanned `A` with `|A| <= d/10`.
    pub lemma9_ok: bool,
    /// `|N(A)| > |A|` for every scanned `A` with `|A| <= 2^(d-2)`.
    pub lemma10_ok: bool,
    /// Smallest `|N(A)| / |A|` among sets where the strict expansion clause applied.
    pub lemma10_margin: Option<f64>,
    /// Largest `d|A| / |N(A)|` over scanned sets with `|A| <= d^4`: the
    /// smallest constant that the scan supports for the `|A| <= C|N(A)|/d` clause.
    pub c_iso_empirical: f64,
    pub scanned: u64,
}

struct Accumulator {
    d: u64,
    size: u64,
    min_ratio: Option<Ratio<u64>>,
    witness: Vec<Vertex>,
    lemma9_ok: bool,
    lemma10_ok: bool,
    lemma10_margin: Option<f64>,
    c_iso: f64,
    scanned: u64,
}

impl Accumulator {
    fn new(d: u32, size: usize) -> Self {
        Accumulator {
            d: d as u64,
            size: size as u64,
            min_ratio: None,
            witness: Vec::new(),
            lemma9_ok: true,
            lemma10_ok: true,
            lemma10_margin: None,
            c_iso: 0.0,
            scanned: 0,
        }
    }

    fn record(&mut self, members: &[Vertex], boundary: u64) {
        let a = self.size;
        self.scanned += 1;
        let ratio = Ratio::new(boundary, a);
        if self.min_ratio.is_none_or(|m| ratio < m) {
            self.min_ratio = Some(ratio);
            self.witness = members.to_vec();
            self.witness.sort_unstable();
        }
        if 10 * a <= self.d {
            let rhs = (self.d * a) as i64 - 2 * (a * (a - 1)) as i64;
            if (boundary as i64) < rhs {
                self.lemma9_ok = false;
            }
        }
        if 4 * a <= 1u64 << self.d {
            if boundary <= a {
                self.lemma10_ok = false;
            }
            let r = boundary as f64 / a as f64;
            self.lemma10_margin = Some(self.lemma10_margin.map_or(r, |m: f64| m.min(r)));
        }
        if (a as f64) <= (self.d as f64).powi(4) && boundary > 0 {
            self.c_iso = self.c_iso.max((self.d * a) as f64 / boundary as f64);
        }
    }

    fn finish(self) -> Result<IsoScanReport> {
        let min_ratio = self
            .min_ratio
            .ok_or_else(|| Error::Range("no set of the requested size".into()))?;
        Ok(IsoScanReport {
            min_ratio,
            witness: self.witness,
            lemma9_ok: self.lemma9_ok,
            lemma10_ok: self.lemma10_ok,
            lemma10_margin: self.lemma10_margin,
            c_iso_empirical: self.c_iso,
            scanned: self.scanned,
        })
    }
}

/// `|N(A)|` for a one-sided vertex list; works at any dimension.
pub(crate) fn boundary_size(g: &CubeGraph, members: &[Vertex]) -> u64 {
    if g.dim() <= 6 {
        let mut set = 0u64;
        let mut nb = 0u64;
        for &v in members {
            set |= 1 << v;
        }
        for &v in members {
            for w in g.neighbors(v) {
                nb |= 1 << w;
            }
        }
        return (nb & !set).count_ones() as u64;
    }
    let mut nb: Vec<Vertex> = members.iter().flat_map(|&v| g.neighbors(v)).collect();
    nb.sort_unstable();
    nb.dedup();
    // One-sided input: no neighbour is a member.
    nb.len() as u64
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Minimum vertex-boundary ratio over one-sided sets of a given size, with the
/// two expansion clauses checked on every scanned set.
pub fn iso_scan(
    g: &CubeGraph,
    side: Parity,
    size: usize,
    mode: IsoMode,
    budget: Option<u64>,
) -> Result<IsoScanReport> {
    let budget = budget.unwrap_or(super::enumerate::DEFAULT_BUDGET);
    if size == 0 || size as u64 > g.side_size() {
        return Err(Error::Range(format!("size {size} outside [1, 2^(d-1)]")));
    }
    let mut acc = Accumulator::new(g.dim(), size);
    match mode {
        IsoMode::Exhaustive => {
            let total = binomial_u128(g.side_size(), size as u64);
            if total.is_none_or(|t| t > budget as u128) {
                return Err(Error::BudgetExceeded { budget });
            }
            let verts: Vec<Vertex> = g.side_vertices(side).collect();
            let mut idx: Vec<usize> = (0..size).collect();
            let mut members = vec![0; size];
            loop {
                for (m, &i) in members.iter_mut().zip(&idx) {
                    *m = verts[i];
                }
                acc.record(&members, boundary_size(g, &members));
                if !next_combination(&mut idx, verts.len()) {
                    break;
                }
            }
        }
        IsoMode::SymmetryReduced => symmetry_reduced(g, side, size, budget, &mut acc)?,
        IsoMode::Sampled { samples, seed } => {
            if samples > budget {
                return Err(Error::BudgetExceeded { budget });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = g.side_size();
            let shift = match side {
                Parity::Even => 0,
                Parity::Odd => 1,
            };
            for _ in 0..samples {
                let mut members: Vec<Vertex> = if n <= usize::MAX as u64 && g.dim() <= 30 {
                    sample(&mut rng, n as usize, size)
                        .iter()
                        .map(|i| side_vertex(i as u64, shift))
                        .collect()
                } else {
                    return Err(Error::DimensionTooLarge { d: g.dim(), max: 31 });
                };
                members.sort_unstable();
                acc.record(&members, boundary_size(g, &members));
            }
        }
    }
    acc.finish()
}

/// The `i`-th vertex (ascending) of a parity class: the low bit of the
/// vertex is fixed by the parity of the remaining bits.
fn side_vertex(i: u64, odd: u64) -> Vertex {
    let high = i << 1;
    let parity = (high.count_ones() as u64 + odd) & 1;
    high | parity
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in (i + 1)..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sets containing a fixed base vertex, with the other `size - 1` members
/// described column by column: each coordinate contributes one bit pattern
/// across the members, and only the multiset of patterns matters up to
/// coordinate permutation.
fn symmetry_reduced(
    g: &CubeGraph,
    side: Parity,
    size: usize,
    budget: u64,
    acc: &mut Accumulator,
) -> Result<()> {
    let d = g.dim() as usize;
    let base: Vertex = match side {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    if size == 1 {
        acc.record(&[base], boundary_size(g, &[base]));
        return Ok(());
    }
    let rows = size - 1;
    if rows > 16 {
        return Err(Error::BudgetExceeded { budget });
    }
    let patterns = 1usize << rows;
    let total = binomial_u128((d + patterns - 1) as u64, (patterns - 1) as u64);
    if total.is_none_or(|t| t > budget as u128) {
        return Err(Error::BudgetExceeded { budget });
    }
    let mut counts = vec![0usize; patterns];
    counts[0] = d;
    loop {
        // Assign coordinates to patterns in order; row r of the member matrix
        // is the XOR offset of the r-th extra member from the base.
        let mut offsets = vec![0u64; rows];
        let mut coord = 0;
        for (p, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                for (r, off) in offsets.iter_mut().enumerate() {
                    if p >> r & 1 == 1 {
                        *off |= 1 << coord;
                    }
                }
                coord += 1;
            }
        }
        let valid = offsets.iter().all(|o| *o != 0 && o.count_ones() % 2 == 0) && {
            let mut sorted = offsets.clone();
            sorted.sort_unstable();
            sorted.windows(2).all(|w| w[0] != w[1])
        };
        if valid {
            let mut members = vec![base];
            members.extend(offsets.iter().map(|o| o ^ base));
            acc.record(&members, boundary_size(g, &members));
        }
        if !next_composition(&mut counts) {
            break;
        }
    }
    Ok(())
}

/// Steps through all compositions of `sum(counts)` into `counts.len()` parts.
fn next_composition(counts: &mut [usize]) -> bool {
    let n = counts.len();
    if n < 2 {
        return false;
    }
    // Find the last nonzero part before the final slot and move one unit right,
    // collecting whatever sat in the final slot.
    let tail = counts[n - 1];
    counts[n - 1] = 0;
    let Some(i) = (0..n - 1).rev().find(|&i| counts[i] > 0) else {
        counts[n - 1] = tail;
        return false;
    };
    counts[i] -= 1;
    counts[i + 1] = tail + 1;
    true
}
