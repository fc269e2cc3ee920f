//! Small pattern graphs `H` (order at most 10) with an isomorphism-invariant
//! canonical code.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const MAX_PATTERN_ORDER: usize = 10;

/// A labelled graph on at most [`MAX_PATTERN_ORDER`] vertices.
///
/// `canonical()` is the largest pair code over all relabellings that list
/// vertices by non-increasing degree. Isomorphic patterns share it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternGraph {
    adj: Vec<u16>,
    canonical: u64,
}

/// Bit position of the pair `(i, j)`, `i < j`, in a pair code on `r`
/// vertices. Pairs are listed column by column so that placing the vertex
/// at position `j` fixes the next `j` bits from the top.
#[inline]
pub(crate) fn pair_bit(i: usize, j: usize, r: usize) -> u32 {
    debug_assert!(i < j && j < r);
    let total = r * (r - 1) / 2;
    let index = j * (j - 1) / 2 + i;
    (total - 1 - index) as u32
}

/// Pair code of a labelled graph given as adjacency rows.
#[cfg(test)]
pub(crate) fn labelled_code(adj: &[u16]) -> u64 {
    let r = adj.len();
    let mut code = 0u64;
    for j in 1..r {
        for i in 0..j {
            if adj[i] >> j & 1 == 1 {
                code |= 1 << pair_bit(i, j, r);
            }
        }
    }
    code
}

/// Adjacency rows decoded from a pair code on `r` vertices.
pub(crate) fn rows_from_code(code: u64, r: usize) -> Vec<u16> {
    let mut adj = vec![0u16; r];
    for j in 1..r {
        for i in 0..j {
            if code >> pair_bit(i, j, r) & 1 == 1 {
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
        }
    }
    adj
}

/// Canonical code of the graph with the given rows.
pub(crate) fn canonical_code(adj: &[u16]) -> u64 {
    let r = adj.len();
    if r < 2 {
        return 0;
    }
    let degrees: Vec<u32> = adj.iter().map(|a| a.count_ones()).collect();
    let mut search = Canon {
        adj,
        degrees: &degrees,
        r,
        best: None,
        order: Vec::with_capacity(r),
    };
    search.run(0, 0);
    search.best.unwrap_or(0)
}

struct Canon<'a> {
    adj: &'a [u16],
    degrees: &'a [u32],
    r: usize,
    best: Option<u64>,
    order: Vec<usize>,
}

impl Canon<'_> {
    fn run(&mut self, used: u16, code: u64) {
        let depth = self.order.len();
        if depth == self.r {
            if self.best.is_none_or(|b| code > b) {
                self.best = Some(code);
            }
            return;
        }
        // only vertices of the largest remaining degree may come next
        let next_degree = (0..self.r)
            .filter(|&v| used >> v & 1 == 0)
            .map(|v| self.degrees[v])
            .max()
            .unwrap_or(0);
        let mut tried: Vec<usize> = Vec::new();
        for v in 0..self.r {
            if used >> v & 1 == 1 || self.degrees[v] != next_degree {
                continue;
            }
            // twins are interchangeable: swapping them is an automorphism
            // that fixes every placed vertex
            if tried.iter().any(|&w| self.twins(v, w)) {
                continue;
            }
            tried.push(v);
            let mut next = code;
            for (i, &u) in self.order.iter().enumerate() {
                if self.adj[u] >> v & 1 == 1 {
                    next |= 1 << pair_bit(i, depth, self.r);
                }
            }
            if let Some(best) = self.best {
                let placed = (depth + 1) * depth / 2;
                let total = self.r * (self.r - 1) / 2;
                let shift = (total - placed) as u32;
                let prefix = if shift >= 64 { 0 } else { next >> shift };
                let best_prefix = if shift >= 64 { 0 } else { best >> shift };
                if prefix < best_prefix {
                    continue;
                }
            }
            self.order.push(v);
            self.run(used | 1 << v, next);
            self.order.pop();
        }
    }

    fn twins(&self, v: usize, w: usize) -> bool {
        let mask = !((1u16 << v) | (1u16 << w));
        self.adj[v] & mask == self.adj[w] & mask
    }
}

impl PatternGraph {
    pub fn new<I>(r: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if r == 0 || r > MAX_PATTERN_ORDER {
            return Err(Error::OrderOutOfRange {
                r,
                min: 1,
                max: MAX_PATTERN_ORDER,
            });
        }
        let mut adj = vec![0u16; r];
        for (u, v) in edges {
            for x in [u, v] {
                if x >= r {
                    return Err(Error::VertexOutOfRange { vertex: x, n: r });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        Ok(Self::from_rows(adj))
    }

    pub(crate) fn from_rows(adj: Vec<u16>) -> Self {
        let canonical = canonical_code(&adj);
        PatternGraph { adj, canonical }
    }

    pub fn from_graph(g: &Graph) -> Result<Self> {
        PatternGraph::new(g.n(), g.edges())
    }

    pub fn complete(r: usize) -> Result<Self> {
        let edges: Vec<_> = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).collect();
        PatternGraph::new(r, edges)
    }

    pub fn empty(r: usize) -> Result<Self> {
        PatternGraph::new(r, [])
    }

    /// The path on `r` vertices `0-1-...-(r-1)`.
    pub fn path(r: usize) -> Result<Self> {
        PatternGraph::new(r, (1..r).map(|i| (i - 1, i)))
    }

    pub fn cycle(r: usize) -> Result<Self> {
        PatternGraph::new(r, (0..r).map(|i| (i, (i + 1) % r)))
    }

    pub fn order(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u] >> v & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.order()).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub(crate) fn rows(&self) -> &[u16] {
        &self.adj
    }

    /// Isomorphism-invariant key.
    pub fn canonical(&self) -> u64 {
        self.canonical
    }

    pub fn is_isomorphic(&self, other: &PatternGraph) -> bool {
        self.order() == other.order() && self.canonical == other.canonical
    }

    pub fn is_complete(&self) -> bool {
        let r = self.order();
        self.edge_count() == r * (r - 1) / 2
    }

    pub fn complement(&self) -> PatternGraph {
        let r = self.order();
        let full: u16 = if r == 16 { u16::MAX } else { (1 << r) - 1 };
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(v, a)| !a & full & !(1 << v))
            .collect();
        PatternGraph::from_rows(adj)
    }

    /// `H - v`, relabelled to `0..r-1` preserving order.
    pub fn remove_vertex(&self, v: usize) -> Result<PatternGraph> {
        let r = self.order();
        if v >= r || r < 2 {
            return Err(Error::VertexOutOfRange { vertex: v, n: r });
        }
        let keep: Vec<usize> = (0..r).filter(|&u| u != v).collect();
        let edges: Vec<(usize, usize)> = keep
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| {
                keep.iter()
                    .enumerate()
                    .skip(i + 1)
                    .filter(move |&(_, &b)| self.has_edge(a, b))
                    .map(move |(j, _)| (i, j))
            })
            .collect();
        PatternGraph::new(r - 1, edges)
    }

    pub fn to_graph(&self) -> Graph {
        let r = self.order();
        let edges: Vec<_> = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect();
        Graph::from_edges(r, edges).expect("pattern edges are in range")
    }
}

impl fmt::Debug for PatternGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.order();
        let edges: Vec<_> = (0..r)
            .flat_map(|i| (i + 1..r).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect();
        f.debug_struct("PatternGraph")
            .field("r", &r)
            .field("edges", &edges)
            .finish()
    }
}
