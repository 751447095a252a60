use super::{hamming, CubeGraph, Parity, Vertex, VertexSet};
use crate::error::{Error, Result};

/// Default cap on emitted sets.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

struct Frame {
    members: Vec<Vertex>,
    extension: Vec<Vertex>,
}

/// Stream of 2-linked one-sided sets.
///
/// Without an anchor, sets are grouped by their least vertex (the root) and
/// extensions only use vertices above the root, so every set is produced once
/// under its minimum. With an anchor the root is the anchor and extensions are
/// unrestricted. Children are grown from exclusive second neighbourhoods.
pub struct TwoLinkedSets {
    g: CubeGraph,
    roots: Vec<Vertex>,
    next_root: usize,
    anchored: bool,
    root: Vertex,
    size_max: usize,
    stack: Vec<Frame>,
    emitted: u64,
    budget: u64,
    failed: bool,
}

/// Every 2-linked subset of one parity class with at most `size_max`
/// members (containing `anchor` when given), each exactly once.
pub fn enumerate_2linked_sets(
    g: &CubeGraph,
    side: Parity,
    size_max: usize,
    anchor: Option<Vertex>,
    budget: Option<u64>,
) -> Result<TwoLinkedSets> {
    if size_max == 0 {
        return Err(Error::Range("size_max must be at least 1".into()));
    }
    if let Some(a) = anchor {
        if a >= g.num_vertices() || Parity::of(a) != side {
            return Err(Error::Range(format!("anchor {a} is not on the requested side")));
        }
    }
    let roots: Vec<Vertex> = match anchor {
        Some(a) => vec![a],
        None => g.side_vertices(side).collect(),
    };
    Ok(TwoLinkedSets {
        g: *g,
        roots,
        next_root: 0,
        anchored: anchor.is_some(),
        root: 0,
        size_max,
        stack: Vec::new(),
        emitted: 0,
        budget: budget.unwrap_or(DEFAULT_BUDGET),
        failed: false,
    })
}

impl TwoLinkedSets {
    fn admissible(&self, v: Vertex) -> bool {
        self.anchored || v > self.root
    }

    fn emit(&mut self, members: &[Vertex]) -> Option<Result<VertexSet>> {
        if self.emitted >= self.budget {
            self.failed = true;
            return Some(Err(Error::BudgetExceeded { budget: self.budget }));
        }
        self.emitted += 1;
        Some(Ok(self.g.set_of(members.iter().copied())))
    }
}

impl Iterator for TwoLinkedSets {
    type Item = Result<VertexSet>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            if let Some(top) = self.stack.last_mut() {
                let Some(w) = top.extension.pop() else {
                    self.stack.pop();
                    continue;
                };
                let members = top.members.clone();
                let mut extension = top.extension.clone();
                for u in self.g.second_neighbors(w) {
                    if self.admissible(u)
                        && !members.contains(&u)
                        && !extension.contains(&u)
                        && members.iter().all(|&m| hamming(m, u) > 2)
                    {
                        extension.push(u);
                    }
                }
                let mut grown = members;
                grown.push(w);
                let out = self.emit(&grown);
                if grown.len() < self.size_max {
                    self.stack.push(Frame {
                        members: grown,
                        extension,
                    });
                }
                return out;
            }
            let &root = self.roots.get(self.next_root)?;
            self.next_root += 1;
            self.root = root;
            if self.size_max > 1 {
                let extension: Vec<Vertex> = self
                    .g
                    .second_neighbors(root)
                    .filter(|&u| self.admissible(u))
                    .collect();
                self.stack.push(Frame {
                    members: vec![root],
                    extension,
                });
            }
            return self.emit(&[root]);
        }
    }
}
