//! Budgeted refinement towards a δ-uniform equitable partition.
//!
//! This stands in for the regularity lemma: start from an index-order split
//! into `l` classes, split a non-uniform pair along its witness, re-cut into
//! equal classes, and repeat while the mean-square density index does not
//! drop. Failure is reported as [`Status::Incomplete`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::params::{IncompleteReason, PipelineParams, Status};
use crate::partition::Partition;
use crate::ratio;
use crate::uniformity::{check_partition, PartitionReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub q: usize,
    pub bad_pairs: usize,
    /// Exact index as `"p/q"`.
    pub index: String,
    pub index_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformOutcome {
    pub partition: Partition,
    pub report: PartitionReport,
    pub trace: Vec<TraceStep>,
    pub status: Status,
    pub reasons: Vec<IncompleteReason>,
}

/// `Σ_{i<j} e(Vi,Vj)² / (|Vi||Vj|·n²)`.
pub fn partition_index(g: &Graph, part: &Partition) -> BigRational {
    let n = g.n() as u128;
    if n == 0 {
        return BigRational::zero();
    }
    let cls = part.classes();
    let mut sum = BigRational::zero();
    for i in 0..cls.len() {
        for j in i + 1..cls.len() {
            let e = g.edges_between_unchecked(&cls[i], &cls[j]) as u128;
            if e > 0 {
                let den = (cls[i].len() * cls[j].len()) as u128;
                sum += BigRational::new(BigInt::from(e * e), BigInt::from(den));
            }
        }
    }
    sum / BigRational::from_integer(BigInt::from(n * n))
}

fn trace_step(q: usize, bad_pairs: usize, index: &BigRational) -> TraceStep {
    TraceStep {
        q,
        bad_pairs,
        index: index.to_string(),
        index_value: ratio::big_to_f64(index),
    }
}

/// Re-cuts `parts` into `q` classes of `c = ⌊n/q⌋`: each part first yields
/// whole pieces of size `c`, then the remainders are pooled in order and cut
/// the same way. Pieces beyond the first `q` go to `V0`.
fn equalize(n: usize, parts: &[Vec<usize>], q: usize) -> Option<Partition> {
    let total: usize = parts.iter().map(Vec::len).sum();
    let size = total / q;
    if size == 0 {
        return None;
    }
    let mut pieces: Vec<VertexSet> = Vec::new();
    let mut pool = Vec::new();
    for part in parts {
        let whole = part.len() / size * size;
        pieces.extend(part[..whole].chunks(size).map(|c| VertexSet::new(c.iter().copied())));
        pool.extend_from_slice(&part[whole..]);
    }
    pieces.extend(pool.chunks_exact(size).map(|c| VertexSet::new(c.iter().copied())));
    pieces.truncate(q);
    Partition::from_classes(n, pieces).ok()
}

/// Grows a witness `(X, Y)` of `(A, B)` to every vertex of `A` whose density
/// to `Y` deviates from `d(A,B)` in the same direction as `d(X,Y)`, then
/// does the same for `B` against the grown `X`. Falls back to the original
/// sets when a side would become empty or all of its class.
fn extend_witness(g: &Graph, a: &VertexSet, b: &VertexSet, x: &VertexSet, y: &VertexSet) -> (VertexSet, VertexSet) {
    let e_ab = g.edges_between_unchecked(a, b) as i128;
    let p_ab = (a.len() * b.len()) as i128;
    let e_xy = g.edges_between_unchecked(x, y) as i128;
    // sign of d(X,Y) − d(A,B)
    let above = e_xy * p_ab > e_ab * (x.len() * y.len()) as i128;
    let grow = |side: &VertexSet, against: &VertexSet| -> VertexSet {
        let mask = g.mask(against);
        let t = against.len() as i128;
        side.iter()
            .filter(|&u| {
                let lhs = g.degree_into(u, &mask) as i128 * p_ab;
                let rhs = e_ab * t;
                if above {
                    lhs > rhs
                } else {
                    lhs < rhs
                }
            })
            .collect()
    };
    let proper = |s: &VertexSet, whole: &VertexSet| !s.is_empty() && s.len() < whole.len();
    let x2 = grow(a, y);
    let x2 = if proper(&x2, a) { x2 } else { x.clone() };
    let y2 = grow(b, &x2);
    let y2 = if proper(&y2, b) { y2 } else { y.clone() };
    (x2, y2)
}

/// Classes in order with classes `i` and `j` split along the witness sets,
/// followed by `V0`.
fn split_parts(part: &Partition, i: usize, x: &VertexSet, j: usize, y: &VertexSet) -> Vec<Vec<usize>> {
    let mut parts = Vec::new();
    for (c, class) in part.classes().iter().enumerate() {
        let cut = if c == i {
            Some(x)
        } else if c == j {
            Some(y)
        } else {
            None
        };
        match cut {
            Some(w) => {
                parts.push(w.members().to_vec());
                parts.push(class.difference(w).into_vec());
            }
            None => parts.push(class.members().to_vec()),
        }
    }
    parts.push(part.exceptional().members().to_vec());
    parts
}

pub fn uniform_partition(g: &Graph, p: &PipelineParams) -> Result<UniformOutcome> {
    p.validate()?;
    let n = g.n();
    if n < p.l {
        return Err(Error::param("l", format!("cannot split {n} vertices into {} classes", p.l)));
    }
    let up = p.uniformity(p.delta)?;
    let mut part = Partition::index_split(n, &VertexSet::range(0..n), p.l)?;
    let mut index = partition_index(g, &part);
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let report = check_partition(g, &part, &up)?;
        trace.push(trace_step(part.q(), report.bad_pairs, &index));
        if report.passes {
            return Ok(UniformOutcome {
                partition: part,
                report,
                trace,
                status: Status::Complete,
                reasons: Vec::new(),
            });
        }
        let stop = |part, report, trace, reason| {
            Ok(UniformOutcome {
                partition: part,
                report,
                trace,
                status: Status::Incomplete,
                reasons: vec![reason],
            })
        };
        if iterations == p.max_iterations {
            return stop(part, report, trace, IncompleteReason::IterationCap { iterations });
        }
        let q = part.q();
        if q + 1 > p.max_k {
            return stop(part, report, trace, IncompleteReason::QBudget { max_k: p.max_k });
        }
        let mut accepted: Option<(Partition, BigRational)> = None;
        for entry in report.pairs.iter().filter(|e| e.verdict.kind.is_bad()) {
            let Some(w) = &entry.verdict.witness else { continue };
            let (a, b) = (&part.classes()[entry.i], &part.classes()[entry.j]);
            let (x, y) = extend_witness(g, a, b, &w.x, &w.y);
            let parts = split_parts(&part, entry.i, &x, entry.j, &y);
            let top = p.max_k.min(2 * q + 2).min(n);
            for q2 in q + 1..=top {
                let Some(cand) = equalize(n, &parts, q2) else { continue };
                let idx = partition_index(g, &cand);
                let better = match &accepted {
                    Some((_, best)) => idx > *best,
                    None => idx >= index,
                };
                if better {
                    accepted = Some((cand, idx));
                }
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some((cand, idx)) => {
                part = cand;
                index = idx;
                iterations += 1;
            }
            None => return stop(part, report, trace, IncompleteReason::Stalled),
        }
    }
}
