//! Immutable simple graphs with bit-row adjacency, vertex sets and the
//! basic edge accounting `e(U)`, `e(A,B)` and `d(A,B)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};
use crate::ratio::Rational;

/// A simple undirected graph on the vertices `0..n`.
///
/// Adjacency is stored as one bit row per vertex so that neighbourhood
/// intersections are word-parallel. The edge count is cached.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    m: usize,
}

impl Graph {
    /// The graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        let words = bits::words_for(n);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        Graph::empty(n).complement()
    }

    /// Builds a graph from an edge list, silently merging repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Ok(Graph::from_edges_counting(n, edges)?.0)
    }

    /// Like [`Graph::from_edges`] but also returns how many input pairs were
    /// duplicates (including reversed duplicates).
    pub fn from_edges_counting<I>(n: usize, edges: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        let mut duplicates = 0;
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !g.insert(u, v) {
                duplicates += 1;
            }
        }
        Ok((g, duplicates))
    }

    pub(crate) fn insert(&mut self, u: usize, v: usize) -> bool {
        if self.has_edge(u, v) {
            return false;
        }
        let w = self.words;
        bits::set(&mut self.rows[u * w..(u + 1) * w], v);
        bits::set(&mut self.rows[v * w..(v + 1) * w], u);
        self.m += 1;
        true
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub(crate) fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        bits::get(self.row(u), v)
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        bits::count(self.row(u))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        bits::ones(self.row(u))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Adjacency negated off the diagonal.
    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        let w = self.words;
        for u in 0..self.n {
            let row = &mut g.rows[u * w..(u + 1) * w];
            for (dst, src) in row.iter_mut().zip(self.row(u)) {
                *dst = !src;
            }
            // mask off padding bits and the diagonal
            let tail = self.n % 64;
            if tail != 0 {
                row[w - 1] &= (1u64 << tail) - 1;
            }
            bits::clear(row, u);
        }
        g.m = crate::ratio::pairs(self.n) as usize - self.m;
        g
    }

    /// The subgraph induced by `set`; vertex `i` of the result is the
    /// `i`-th smallest member of `set`.
    pub fn induced(&self, set: &VertexSet) -> Result<Graph> {
        set.check(self.n)?;
        let members = set.members();
        let mut g = Graph::empty(members.len());
        for (i, &u) in members.iter().enumerate() {
            for (j, &v) in members.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.insert(i, j);
                }
            }
        }
        Ok(g)
    }

    /// Bit mask over `0..n` with the members of `set`.
    pub(crate) fn mask(&self, set: &VertexSet) -> Vec<u64> {
        let mut mask = vec![0; self.words];
        for &u in set.members() {
            bits::set(&mut mask, u);
        }
        mask
    }

    /// Number of neighbours of `u` inside the mask.
    #[inline]
    pub(crate) fn degree_into(&self, u: usize, mask: &[u64]) -> usize {
        bits::and_count(self.row(u), mask)
    }

    /// `e(U)`: edges with both endpoints in `set`.
    pub fn edge_count_within(&self, set: &VertexSet) -> Result<usize> {
        set.check(self.n)?;
        Ok(self.edges_within_unchecked(set))
    }

    pub(crate) fn edges_within_unchecked(&self, set: &VertexSet) -> usize {
        if set.len() < 2 {
            return 0;
        }
        let mask = self.mask(set);
        set.members()
            .iter()
            .map(|&u| self.degree_into(u, &mask))
            .sum::<usize>()
            / 2
    }

    /// `e(A,B)`: edges with one endpoint in each of two disjoint nonempty sets.
    pub fn edge_count_between(&self, a: &VertexSet, b: &VertexSet) -> Result<usize> {
        check_pair_sides(self.n, a, b)?;
        Ok(self.edges_between_unchecked(a, b))
    }

    pub(crate) fn edges_between_unchecked(&self, a: &VertexSet, b: &VertexSet) -> usize {
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        let mask = self.mask(large);
        small.members().iter().map(|&u| self.degree_into(u, &mask)).sum()
    }

    /// `d(A,B) = e(A,B) / (|A||B|)`, exact.
    pub fn pair_density(&self, a: &VertexSet, b: &VertexSet) -> Result<Rational> {
        let e = self.edge_count_between(a, b)?;
        Ok(Rational::new(e as i64, (a.len() * b.len()) as i64))
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

pub(crate) fn check_pair_sides(n: usize, a: &VertexSet, b: &VertexSet) -> Result<()> {
    a.check(n)?;
    b.check(n)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(v) = a.first_common(b) {
        return Err(Error::Overlap(v));
    }
    Ok(())
}

/// A sorted set of distinct vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    /// Wraps a vector that is already strictly increasing.
    pub(crate) fn from_sorted(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn range(range: std::ops::Range<usize>) -> Self {
        VertexSet(range.collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&v) if v >= n => Err(Error::VertexOutOfRange { vertex: v, n }),
            _ => Ok(()),
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    fn first_common(&self, other: &VertexSet) -> Option<usize> {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(self.0[i]),
            }
        }
        None
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.first_common(other).is_none()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Maps local indices `0..len` of an induced subgraph back to members.
    pub fn lift(&self, local: &VertexSet) -> VertexSet {
        VertexSet(local.0.iter().map(|&i| self.0[i]).collect())
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        VertexSet::new(iter)
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::new(v)
    }
}
