//! Exact counting of cliques `k_r(G)` and induced copies `k_H(G)`.
//!
//! An induced copy of `H` is a vertex subset `S` with `G[S] ≅ H`; labelled
//! embeddings are not counted separately.

use std::collections::HashMap;

use crate::bits;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::pattern::{canonical_code, pair_bit, PatternGraph, MAX_PATTERN_ORDER};

/// Number of `r`-subsets of `G` that induce a complete graph.
pub fn count_cliques(g: &Graph, r: usize) -> Result<u64> {
    if r == 0 || r > g.n() {
        return Err(Error::OrderOutOfRange {
            r,
            min: 1,
            max: g.n(),
        });
    }
    Ok(cliques_unchecked(g, r))
}

pub(crate) fn cliques_unchecked(g: &Graph, r: usize) -> u64 {
    match r {
        0 => 1,
        1 => g.n() as u64,
        2 => g.m() as u64,
        _ => {
            let w = g.words();
            let mut scratch = vec![0u64; w * r];
            let mut total = 0;
            for v in 0..g.n() {
                let cand = &mut scratch[..w];
                cand.copy_from_slice(g.row(v));
                clear_upto(cand, v);
                total += extend(g, &mut scratch, 0, r - 1);
            }
            total
        }
    }
}

/// Clears every bit with index `<= v`.
fn clear_upto(row: &mut [u64], v: usize) {
    let wi = v >> 6;
    for x in row.iter_mut().take(wi) {
        *x = 0;
    }
    let b = v & 63;
    row[wi] &= if b == 63 { 0 } else { !0u64 << (b + 1) };
}

/// Counts ways to pick `left` more pairwise adjacent vertices from the
/// candidate row stored at level `level` of `scratch`.
fn extend(g: &Graph, scratch: &mut [u64], level: usize, left: usize) -> u64 {
    let w = g.words();
    let (head, tail) = scratch.split_at_mut((level + 1) * w);
    let cand = &head[level * w..];
    if left == 1 {
        return bits::count(cand) as u64;
    }
    if bits::count(cand) < left {
        return 0;
    }
    let mut total = 0;
    for v in bits::ones(cand) {
        let next = &mut tail[..w];
        for ((dst, a), b) in next.iter_mut().zip(cand).zip(g.row(v)) {
            *dst = a & b;
        }
        clear_upto(next, v);
        // `tail` starts at level + 1
        total += extend(g, tail, 0, left - 1);
    }
    total
}

/// Number of induced copies of `h` in `g` counted as vertex subsets.
pub fn count_induced(g: &Graph, h: &PatternGraph) -> Result<u64> {
    let r = h.order();
    if r > MAX_PATTERN_ORDER {
        return Err(Error::OrderOutOfRange {
            r,
            min: 1,
            max: MAX_PATTERN_ORDER,
        });
    }
    if r > g.n() {
        return Err(Error::OrderOutOfRange {
            r,
            min: 1,
            max: g.n(),
        });
    }
    if h.is_complete() {
        return Ok(cliques_unchecked(g, r));
    }
    if h.edge_count() == 0 {
        return Ok(cliques_unchecked(&g.complement(), r));
    }
    let mut counter = InducedCounter {
        g,
        r,
        target_edges: h.edge_count(),
        target_canon: h.canonical(),
        target_degrees: sorted_degrees(h.rows()),
        memo: HashMap::new(),
        chosen: Vec::with_capacity(r),
        total: 0,
    };
    counter.walk(0, 0, 0);
    Ok(counter.total)
}

/// `k_H(G[U])`.
pub fn count_induced_in(g: &Graph, set: &VertexSet, h: &PatternGraph) -> Result<u64> {
    if set.len() < h.order() {
        return Ok(0);
    }
    count_induced(&g.induced(set)?, h)
}

/// `k_r(G[U])`, zero when `|U| < r`.
pub fn count_cliques_in(g: &Graph, set: &VertexSet, r: usize) -> Result<u64> {
    if set.len() < r {
        return Ok(0);
    }
    count_cliques(&g.induced(set)?, r)
}

fn sorted_degrees(rows: &[u16]) -> Vec<u32> {
    let mut d: Vec<u32> = rows.iter().map(|a| a.count_ones()).collect();
    d.sort_unstable();
    d
}

struct InducedCounter<'a> {
    g: &'a Graph,
    r: usize,
    target_edges: usize,
    target_canon: u64,
    target_degrees: Vec<u32>,
    memo: HashMap<u64, bool>,
    chosen: Vec<usize>,
    total: u64,
}

impl InducedCounter<'_> {
    fn walk(&mut self, start: usize, code: u64, edges: usize) {
        let depth = self.chosen.len();
        if depth == self.r {
            if self.matches(code) {
                self.total += 1;
            }
            return;
        }
        let n = self.g.n();
        let remaining_slots = self.r - depth;
        let placed_pairs = depth * depth.saturating_sub(1) / 2;
        let all_pairs = self.r * (self.r - 1) / 2;
        for v in start..=(n - remaining_slots) {
            let mut next = code;
            let mut added = 0;
            for (i, &u) in self.chosen.iter().enumerate() {
                if self.g.has_edge(u, v) {
                    next |= 1 << pair_bit(i, depth, self.r);
                    added += 1;
                }
            }
            let e = edges + added;
            let open_pairs = all_pairs - placed_pairs - depth;
            if e > self.target_edges || e + open_pairs < self.target_edges {
                continue;
            }
            self.chosen.push(v);
            self.walk(v + 1, next, e);
            self.chosen.pop();
        }
    }

    fn matches(&mut self, code: u64) -> bool {
        if let Some(&hit) = self.memo.get(&code) {
            return hit;
        }
        let rows = crate::pattern::rows_from_code(code, self.r);
        let hit = sorted_degrees(&rows) == self.target_degrees && canonical_code(&rows) == self.target_canon;
        self.memo.insert(code, hit);
        hit
    }
}
