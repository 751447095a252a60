use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cube::{CubeGraph, Parity, Vertex};
use crate::error::{Error, Result};

/// Bipartite graph on `X = 0..nx`, `Y = 0..ny` given by adjacency lists.
/// Lists are kept sorted so that "smallest" selections follow index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    pub x_adj: Vec<Vec<usize>>,
    pub y_adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn from_edges(nx: usize, ny: usize, edges: &[(usize, usize)]) -> Self {
        let mut x_adj = vec![Vec::new(); nx];
        let mut y_adj = vec![Vec::new(); ny];
        for &(x, y) in edges {
            x_adj[x].push(y);
            y_adj[y].push(x);
        }
        for l in x_adj.iter_mut().chain(y_adj.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        BipartiteGraph { x_adj, y_adj }
    }

    pub fn nx(&self) -> usize {
        self.x_adj.len()
    }

    pub fn ny(&self) -> usize {
        self.y_adj.len()
    }

    pub fn min_x_degree(&self) -> usize {
        self.x_adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_y_degree(&self) -> usize {
        self.y_adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Graph induced on `xs ∪ ys`, reindexed in the given orders.
    pub fn induced(&self, xs: &[usize], ys: &[usize]) -> BipartiteGraph {
        let mut y_pos = vec![usize::MAX; self.ny()];
        for (i, &y) in ys.iter().enumerate() {
            y_pos[y] = i;
        }
        let edges: Vec<(usize, usize)> = xs
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| {
                let y_pos = &y_pos;
                self.x_adj[x]
                    .iter()
                    .filter(move |&&y| y_pos[y] != usize::MAX)
                    .map(move |&y| (i, y_pos[y]))
            })
            .collect();
        BipartiteGraph::from_edges(xs.len(), ys.len(), &edges)
    }
}

/// A `d`-regular bipartite graph; for cube instances the vertex labels of
/// both sides are kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteRegularGraph {
    graph: BipartiteGraph,
    d: usize,
    labels: Option<(Vec<Vertex>, Vec<Vertex>)>,
}

impl BipartiteRegularGraph {
    pub fn new(graph: BipartiteGraph) -> Result<Self> {
        let d = graph.x_adj.first().map_or(0, Vec::len);
        let regular = graph.nx() == graph.ny()
            && graph.x_adj.iter().chain(&graph.y_adj).all(|l| l.len() == d);
        if !regular || d == 0 {
            return Err(Error::Precondition("graph is not d-regular with d >= 1".into()));
        }
        Ok(BipartiteRegularGraph {
            graph,
            d,
            labels: None,
        })
    }

    /// `Q_d` with `X` the even side and `Y` the odd side, both in ascending
    /// vertex order.
    pub fn from_cube(g: &CubeGraph) -> Self {
        let xs: Vec<Vertex> = g.side_vertices(Parity::Even).collect();
        let ys: Vec<Vertex> = g.side_vertices(Parity::Odd).collect();
        let pos = |v: Vertex| ys.binary_search(&v).unwrap();
        let edges: Vec<(usize, usize)> = xs
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| g.neighbors(x).map(move |w| (i, w)).collect::<Vec<_>>())
            .map(|(i, w)| (i, pos(w)))
            .collect();
        let graph = BipartiteGraph::from_edges(xs.len(), ys.len(), &edges);
        BipartiteRegularGraph {
            graph,
            d: g.dim() as usize,
            labels: Some((xs, ys)),
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        Self::new(BipartiteGraph::from_edges(n, n, &edges)).unwrap()
    }

    /// The cycle of length `2n` (`n >= 2`).
    pub fn even_cycle(n: usize) -> Self {
        assert!(n >= 2);
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| [(i, i), (i, (i + 1) % n)]).collect();
        Self::new(BipartiteGraph::from_edges(n, n, &edges)).unwrap()
    }

    pub fn perfect_matching(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        Self::new(BipartiteGraph::from_edges(n, n, &edges)).unwrap()
    }

    /// Union of `d` random perfect matchings, redrawn until simple.
    pub fn random(n: usize, d: usize, seed: u64) -> Result<Self> {
        if d == 0 || d > n {
            return Err(Error::Precondition("need 1 <= d <= n".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let mut edges = Vec::with_capacity(n * d);
            for _ in 0..d {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                edges.extend(perm.into_iter().enumerate());
            }
            let g = BipartiteGraph::from_edges(n, n, &edges);
            if let Ok(r) = Self::new(g) {
                return Ok(r);
            }
        }
        Err(Error::RetryExhausted(10_000))
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn side_size(&self) -> usize {
        self.graph.nx()
    }

    pub fn x_neighbors(&self, x: usize) -> &[usize] {
        &self.graph.x_adj[x]
    }

    pub fn y_neighbors(&self, y: usize) -> &[usize] {
        &self.graph.y_adj[y]
    }

    /// Cube labels of `X` and `Y`, when built from a cube.
    pub fn labels(&self) -> Option<(&[Vertex], &[Vertex])> {
        self.labels.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    /// `N(A)` for `A ⊆ X`, as a membership mask over `Y`.
    pub fn neighborhood(&self, a: &[usize]) -> Vec<bool> {
        let mut out = vec![false; self.graph.ny()];
        for &x in a {
            for &y in self.x_neighbors(x) {
                out[y] = true;
            }
        }
        out
    }

    /// `[A] = {x : N(x) ⊆ N(A)}` in ascending order.
    pub fn closure(&self, a: &[usize]) -> Vec<usize> {
        if a.is_empty() {
            return Vec::new();
        }
        let n = self.neighborhood(a);
        (0..self.graph.nx())
            .filter(|&x| self.x_neighbors(x).iter().all(|&y| n[y]))
            .collect()
    }

    pub fn is_small(&self, a: &[usize]) -> bool {
        2 * self.closure(a).len() <= self.graph.nx()
    }

    /// Connectivity of `A ⊆ X` when joining vertices with a common neighbour.
    pub fn is_two_linked(&self, a: &[usize]) -> bool {
        if a.len() <= 1 {
            return true;
        }
        let mut member = vec![false; self.graph.nx()];
        for &x in a {
            member[x] = true;
        }
        let mut seen = vec![false; self.graph.nx()];
        let mut stack = vec![a[0]];
        seen[a[0]] = true;
        let mut reached = 1;
        while let Some(x) = stack.pop() {
            for &y in self.x_neighbors(x) {
                for &w in self.y_neighbors(y) {
                    if member[w] && !seen[w] {
                        seen[w] = true;
                        reached += 1;
                        stack.push(w);
                    }
                }
            }
        }
        reached == a.len()
    }

    /// `min |N(K)|` over `y ∈ Y` and `K ⊆ N(y)` with `|K| > φ`; the minimum
    /// is attained at `|K| = φ + 1`. `None` when `φ >= d`.
    pub fn m_phi(&self, phi: usize) -> Option<usize> {
        let k = phi + 1;
        if k > self.d {
            return None;
        }
        let mut best = usize::MAX;
        let mut idx: Vec<usize> = (0..k).collect();
        for y in 0..self.graph.ny() {
            let nbrs = self.y_neighbors(y);
            idx.iter_mut().enumerate().for_each(|(i, v)| *v = i);
            loop {
                let chosen: Vec<usize> = idx.iter().map(|&i| nbrs[i]).collect();
                let size = self.neighborhood(&chosen).iter().filter(|&&b| b).count();
                best = best.min(size);
                // Next k-combination of 0..d.
                let mut i = k;
                while i > 0 && idx[i - 1] == self.d - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        Some(best)
    }
}
