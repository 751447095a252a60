//! The hypercube `Q_d` and the set-level primitives used throughout the crate:
//! neighbourhoods `N(A)`, closures `[A]`, smallness, `k`-linkedness and the
//! decomposition of a one-sided set into 2-components.
//!
//! Vertices are integers in `[0, 2^d)`; two vertices are adjacent iff their
//! XOR has exactly one set bit. The even class holds vertices of even
//! popcount.

mod enumerate;
mod iso;
mod set;
mod union_find;

pub use enumerate::{enumerate_2linked_sets, TwoLinkedSets};
pub use iso::{iso_scan, IsoMode, IsoScanReport};
pub use set::{Iter, Side, VertexSet};
pub use union_find::UnionFind;

use crate::error::{Error, Result};

pub type Vertex = u64;

/// Largest dimension for which vertex ids fit comfortably in a `u64` and
/// Hamming arithmetic stays cheap.
pub const MAX_DIM: u32 = 40;

/// Largest dimension for which a full bitset over `2^d` vertices is built.
pub const MAX_BITSET_DIM: u32 = 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    #[inline]
    pub fn of(v: Vertex) -> Parity {
        if v.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[inline]
pub fn hamming(u: Vertex, v: Vertex) -> u32 {
    (u ^ v).count_ones()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CubeGraph {
    d: u32,
}

impl CubeGraph {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionTooLarge { d, max: MAX_DIM });
        }
        Ok(CubeGraph { d })
    }

    #[inline]
    pub fn dim(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn num_vertices(&self) -> u64 {
        1u64 << self.d
    }

    /// Size of each parity class, `2^(d-1)`.
    #[inline]
    pub fn side_size(&self) -> u64 {
        1u64 << (self.d - 1)
    }

    #[inline]
    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        (u ^ v).count_ones() == 1
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> {
        (0..self.d).map(move |i| v ^ (1u64 << i))
    }

    /// Vertices at Hamming distance exactly two from `v` (same parity).
    pub fn second_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> {
        let d = self.d;
        (0..d).flat_map(move |i| ((i + 1)..d).map(move |j| v ^ (1u64 << i) ^ (1u64 << j)))
    }

    /// Vertices of one parity class in ascending order.
    pub fn side_vertices(&self, parity: Parity) -> impl Iterator<Item = Vertex> {
        (0..self.num_vertices()).filter(move |&v| Parity::of(v) == parity)
    }

    pub fn empty_set(&self) -> VertexSet {
        assert!(self.d <= MAX_BITSET_DIM, "bitset over Q_{} is too large", self.d);
        VertexSet::empty(1usize << self.d)
    }

    pub fn set_of<I: IntoIterator<Item = Vertex>>(&self, vertices: I) -> VertexSet {
        let mut s = self.empty_set();
        for v in vertices {
            s.insert(v);
        }
        s
    }

    pub fn side_set(&self, parity: Parity) -> VertexSet {
        self.set_of(self.side_vertices(parity))
    }

    /// `true` iff no two members of `set` are adjacent.
    pub fn is_independent(&self, set: &VertexSet) -> bool {
        self.first_edge(set).is_none()
    }

    /// Smallest edge `(u, v)` with `u < v` inside `set`, if any.
    pub fn first_edge(&self, set: &VertexSet) -> Option<(Vertex, Vertex)> {
        set.iter().find_map(|u| {
            self.neighbors(u)
                .filter(|&w| w > u && set.contains(w))
                .min()
                .map(|w| (u, w))
        })
    }
}

fn one_sided(a: &VertexSet) -> Result<()> {
    match a.side() {
        Side::Mixed => Err(Error::MixedSide),
        _ => Ok(()),
    }
}

/// `N(A)`: vertices outside `A` adjacent to some member of `A`.
pub fn neighborhood(g: &CubeGraph, a: &VertexSet) -> VertexSet {
    let mut out = g.empty_set();
    for u in a {
        for w in g.neighbors(u) {
            if !a.contains(w) {
                out.insert(w);
            }
        }
    }
    out
}

/// `[A] = {v : N(v) ⊆ N(A)}` for a one-sided `A`.
pub fn closure(g: &CubeGraph, a: &VertexSet) -> Result<VertexSet> {
    one_sided(a)?;
    let nb = neighborhood(g, a);
    let mut out = g.empty_set();
    // Any v with N(v) ⊆ N(A) is a neighbour of N(A).
    for w in &nb {
        for v in g.neighbors(w) {
            if !out.contains(v) && g.neighbors(v).all(|x| nb.contains(x)) {
                out.insert(v);
            }
        }
    }
    Ok(out)
}

/// `|[A]| <= 2^(d-2)`.
pub fn is_small(g: &CubeGraph, a: &VertexSet) -> Result<bool> {
    let c = closure(g, a)?;
    Ok(4 * c.len() as u64 <= g.num_vertices())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoComponentDecomposition {
    /// Parts ordered by their least vertex.
    pub parts: Vec<VertexSet>,
    pub sizes: Vec<usize>,
}

impl TwoComponentDecomposition {
    /// Number of 2-components `k`.
    pub fn count(&self) -> usize {
        self.parts.len()
    }

    /// Size of the largest 2-component, 0 for the empty set.
    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Splits a one-sided set into its maximal 2-linked parts.
pub fn two_components(g: &CubeGraph, a: &VertexSet) -> Result<TwoComponentDecomposition> {
    one_sided(a)?;
    let members: Vec<Vertex> = a.iter().collect();
    let labels = component_labels(g, &members);
    let mut parts: Vec<VertexSet> = Vec::new();
    let mut slot = vec![usize::MAX; members.len()];
    for (i, &v) in members.iter().enumerate() {
        let root = labels[i];
        if slot[root] == usize::MAX {
            slot[root] = parts.len();
            parts.push(VertexSet::empty(a.universe()));
        }
        parts[slot[root]].insert(v);
    }
    let sizes = parts.iter().map(VertexSet::len).collect();
    Ok(TwoComponentDecomposition { parts, sizes })
}

/// Union-find labels over `members` joining pairs at distance two.
fn component_labels(g: &CubeGraph, members: &[Vertex]) -> Vec<usize> {
    let mut uf = UnionFind::new(members.len());
    let d = g.dim() as usize;
    if members.len() * members.len() <= members.len() * d * d {
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                if hamming(members[i], members[j]) <= 2 {
                    uf.union(i, j);
                }
            }
        }
    } else {
        let index: std::collections::HashMap<Vertex, usize> =
            members.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (i, &u) in members.iter().enumerate() {
            for w in g.second_neighbors(u).chain(g.neighbors(u)) {
                if let Some(&j) = index.get(&w) {
                    uf.union(i, j);
                }
            }
        }
    }
    (0..members.len()).map(|i| uf.find(i)).collect()
}

/// `(k, cl)`: number of 2-components and size of the largest one, for a
/// one-sided vertex list.
pub fn component_stats(g: &CubeGraph, members: &[Vertex]) -> (usize, usize) {
    if members.is_empty() {
        return (0, 0);
    }
    let labels = component_labels(g, members);
    let mut counts = std::collections::HashMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    (counts.len(), counts.values().copied().max().unwrap_or(0))
}

/// Connectivity of `A` in the graph joining pairs at Hamming distance `<= k`.
pub fn is_k_linked(_g: &CubeGraph, a: &VertexSet, k: u32) -> bool {
    let members: Vec<Vertex> = a.iter().collect();
    vertices_k_linked(&members, k)
}

pub(crate) fn vertices_k_linked(members: &[Vertex], k: u32) -> bool {
    if members.len() <= 1 {
        return true;
    }
    let mut seen = vec![false; members.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut reached = 1;
    while let Some(i) = stack.pop() {
        for j in 0..members.len() {
            if !seen[j] && hamming(members[i], members[j]) <= k {
                seen[j] = true;
                reached += 1;
                stack.push(j);
            }
        }
    }
    reached == members.len()
}
