use std::fmt;

use super::{Parity, Vertex};
use crate::error::{Error, Result};

/// Membership classification of a vertex set with respect to the parity
/// bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Empty,
    Even,
    Odd,
    Mixed,
}

impl Side {
    pub fn parity(self) -> Option<Parity> {
        match self {
            Side::Even => Some(Parity::Even),
            Side::Odd => Some(Parity::Odd),
            _ => None,
        }
    }
}

/// Bit-indexed vertex set over the universe `[0, universe)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
    universe: usize,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        VertexSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
        }
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(universe: usize, vertices: I) -> Self {
        let mut s = Self::empty(universe);
        for v in vertices {
            s.insert(v);
        }
        s
    }

    /// Builds a set from the low `universe` bits of `mask`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64, "mask construction needs universe <= 64");
        let mut s = Self::empty(universe);
        if universe > 0 {
            let keep = if universe == 64 { u64::MAX } else { (1u64 << universe) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Low 64 bits of the membership vector.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        let v = v as usize;
        v < self.universe && (self.words[v >> 6] >> (v & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, v: Vertex) -> bool {
        let i = v as usize;
        assert!(i < self.universe, "vertex {v} outside universe {}", self.universe);
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, v: Vertex) -> bool {
        let i = v as usize;
        if i >= self.universe {
            return false;
        }
        let w = &mut self.words[i >> 6];
        let bit = 1u64 << (i & 63);
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn min(&self) -> Option<Vertex> {
        self.iter().next()
    }

    /// Parity classification; sets meeting both classes are `Mixed`.
    pub fn side(&self) -> Side {
        let mut even = false;
        let mut odd = false;
        for v in self.iter() {
            if v.count_ones() % 2 == 0 {
                even = true;
            } else {
                odd = true;
            }
            if even && odd {
                return Side::Mixed;
            }
        }
        match (even, odd) {
            (false, false) => Side::Empty,
            (true, false) => Side::Even,
            (false, true) => Side::Odd,
            (true, true) => Side::Mixed,
        }
    }

    fn check_universe(&self, other: &VertexSet) {
        assert_eq!(self.universe, other.universe, "universe mismatch");
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.check_universe(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn intersection_len(&self, other: &VertexSet) -> usize {
        self.check_universe(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.intersection_len(other) == 0
    }

    /// Lowercase hexadecimal rendering of the membership bitmask, most
    /// significant digit first, without prefix (`"0"` for the empty set).
    pub fn to_hex(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate().rev() {
            if out.is_empty() {
                if *w != 0 || i == 0 {
                    out.push_str(&format!("{w:x}"));
                }
            } else {
                out.push_str(&format!("{w:016x}"));
            }
        }
        out
    }

    pub fn from_hex(universe: usize, hex: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 0, msg };
        if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad(format!("not a hexadecimal mask: {hex:?}")));
        }
        let mut s = Self::empty(universe);
        for (pos, ch) in hex.bytes().rev().enumerate() {
            let nibble = (ch as char).to_digit(16).unwrap() as u64;
            for bit in 0..4 {
                if nibble >> bit & 1 == 1 {
                    let v = (pos * 4 + bit) as u64;
                    if v as usize >= universe {
                        return Err(bad(format!("bit {v} outside universe {universe}")));
                    }
                    s.insert(v);
                }
            }
        }
        Ok(s)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = Vertex;

    fn next(&mut self) -> Option<Vertex> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some((self.idx * 64 + tz) as Vertex);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = Vertex;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}
