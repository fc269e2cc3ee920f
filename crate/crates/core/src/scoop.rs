//! Minimum-edge subset selection and the scooping procedure.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::rng;
use crate::graph::{Graph, VertexSet};
use crate::partition::{Certificate, ClassTag, Partition};
use crate::ratio::{self, big_pow, to_big, Rational};

/// Largest `C(|pool|, s)` the exact strategy will enumerate.
pub const EXACT_SUBSET_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    Exact,
    ConditionalExpectation,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoopMode {
    Sparse,
    Dense,
}

impl ScoopMode {
    pub fn tag(self) -> ClassTag {
        match self {
            ScoopMode::Sparse => ClassTag::Sparse,
            ScoopMode::Dense => ClassTag::Dense,
        }
    }
}

/// An `s`-subset of `pool` with few edges; see [`Strategy`].
pub fn min_edge_subset(g: &Graph, pool: &VertexSet, s: usize, strategy: Strategy) -> Result<VertexSet> {
    pool.check(g.n())?;
    if s > pool.len() {
        return Err(Error::param("s", format!("{s} exceeds pool size {}", pool.len())));
    }
    match strategy {
        Strategy::Exact => exact_min(g, pool, s),
        Strategy::ConditionalExpectation => Ok(peel(g, pool, s)),
        Strategy::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::param("samples", "must be at least 1"));
            }
            Ok(sampled_min(g, pool, s, samples, seed))
        }
    }
}

/// Repeatedly drops a vertex of maximum degree into the surviving pool.
/// Ties drop the highest index, so low indices survive. Each drop removes at least the average share of
/// edges, so the result has at most `e(pool)·C(s,2)/C(|pool|,2)` edges.
fn peel(g: &Graph, pool: &VertexSet, s: usize) -> VertexSet {
    let members = pool.members();
    let mask = g.mask(pool);
    let mut alive = vec![true; members.len()];
    let mut deg: Vec<usize> = members.iter().map(|&v| g.degree_into(v, &mask)).collect();
    let mut pos = vec![usize::MAX; g.n()];
    for (i, &v) in members.iter().enumerate() {
        pos[v] = i;
    }
    let mut left = members.len();
    while left > s {
        let mut best = usize::MAX;
        for i in 0..members.len() {
            if alive[i] && (best == usize::MAX || deg[i] >= deg[best]) {
                best = i;
            }
        }
        alive[best] = false;
        left -= 1;
        for w in g.neighbors(members[best]) {
            let j = pos[w];
            if j != usize::MAX && alive[j] {
                deg[j] -= 1;
            }
        }
    }
    VertexSet::from_sorted(members.iter().zip(&alive).filter(|(_, &a)| a).map(|(&v, _)| v).collect())
}

fn exact_min(g: &Graph, pool: &VertexSet, s: usize) -> Result<VertexSet> {
    let needed = ratio::binom(pool.len() as u64, s as u64);
    if needed > EXACT_SUBSET_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "exact minimum-edge subset",
            needed,
            budget: EXACT_SUBSET_BUDGET,
        });
    }
    struct Search<'a> {
        g: &'a Graph,
        members: &'a [usize],
        s: usize,
        chosen: Vec<usize>,
        best: Option<(usize, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, start: usize, edges: usize) {
            if self.best.as_ref().is_some_and(|(b, _)| edges >= *b) {
                return;
            }
            if self.chosen.len() == self.s {
                self.best = Some((edges, self.chosen.clone()));
                return;
            }
            let need = self.s - self.chosen.len();
            for i in start..=self.members.len() - need {
                let v = self.members[i];
                let add = self.chosen.iter().filter(|&&u| self.g.has_edge(u, v)).count();
                self.chosen.push(v);
                self.go(i + 1, edges + add);
                self.chosen.pop();
                if self.best.as_ref().is_some_and(|(b, _)| *b == 0) {
                    return;
                }
            }
        }
    }
    let mut search = Search {
        g,
        members: pool.members(),
        s,
        chosen: Vec::with_capacity(s),
        best: None,
    };
    search.go(0, 0);
    Ok(VertexSet::from_sorted(search.best.map(|(_, v)| v).unwrap_or_default()))
}

fn sampled_min(g: &Graph, pool: &VertexSet, s: usize, samples: usize, seed: u64) -> VertexSet {
    let mut rng = rng(seed);
    let mut best: Option<(usize, VertexSet)> = None;
    for _ in 0..samples {
        let cand: VertexSet = pool.members().choose_multiple(&mut rng, s).copied().collect();
        let e = g.edges_within_unchecked(&cand);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, cand));
        }
    }
    best.expect("samples >= 1").1
}

/// `e ≤ e(pool)·C(s,2)/C(|pool|,2)`, compared exactly.
pub fn within_average_bound(e: usize, pool_edges: usize, s: usize, pool: usize) -> bool {
    e as u128 * ratio::pairs(pool) <= pool_edges as u128 * ratio::pairs(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoopResult {
    pub classes: Vec<VertexSet>,
    /// Target vertices left unassigned, `|leftover| ≤ ⌈ε|target|⌉`.
    pub leftover: VertexSet,
    pub mode: ScoopMode,
    /// `e ≤ ε³·C(|target|,2)` on the graph being scooped (the complement in
    /// Dense mode).
    pub precondition: bool,
    pub certificate: Certificate,
}

impl ScoopResult {
    /// Classes as a partition of `0..n`; vertices outside the target join
    /// `V0` with the leftover.
    pub fn partition(&self, n: usize) -> Result<Partition> {
        Partition::from_classes(n, self.classes.clone())
    }
}

/// `e ≤ ε³·C(t,2)`.
pub(crate) fn cube_sparse(e: usize, t: usize, eps: &Rational) -> bool {
    let lhs = BigRational::from_integer(BigInt::from(e));
    let rhs = big_pow(&to_big(eps), 3) * BigRational::from_integer(BigInt::from(ratio::pairs(t)));
    lhs <= rhs
}

/// Largest admissible class size `⌊ε|target|⌋`.
pub fn max_scoop_size(epsilon: &Rational, target: usize) -> usize {
    ratio::floor_mul(epsilon, target)
}

/// Selects classes of size `s` from `target` one at a time by
/// [`min_edge_subset`] on the shrinking pool, stopping once at most
/// `⌈ε|target|⌉` vertices remain. Dense mode scoops the complement.
pub fn scoop(
    g: &Graph,
    target: &VertexSet,
    s: usize,
    epsilon: &Rational,
    mode: ScoopMode,
    strategy: Strategy,
) -> Result<ScoopResult> {
    ratio::check_epsilon("epsilon", epsilon)?;
    target.check(g.n())?;
    if s == 0 {
        return Err(Error::param("s", "must be positive"));
    }
    if !ratio::le_scaled(s as u128, epsilon, target.len() as u128) {
        return Err(Error::param(
            "s",
            format!("{s} exceeds ε·|target| = {}·{}", ratio::format_rational(epsilon), target.len()),
        ));
    }
    let local = g.induced(target)?;
    let work = match mode {
        ScoopMode::Sparse => local,
        ScoopMode::Dense => local.complement(),
    };
    let t = target.len();
    let precondition = cube_sparse(work.m(), t, epsilon);
    let stop = ratio::ceil_mul(epsilon, t);
    let mut pool = VertexSet::range(0..t);
    let mut classes = Vec::new();
    let mut round = 0u64;
    while pool.len() > stop {
        let strat = match strategy {
            Strategy::Sampled { samples, seed } => Strategy::Sampled {
                samples,
                seed: seed.wrapping_add(round),
            },
            other => other,
        };
        let pick = min_edge_subset(&work, &pool, s, strat)?;
        pool = pool.difference(&pick);
        classes.push(target.lift(&pick));
        round += 1;
    }
    let leftover = target.lift(&pool);
    let part = Partition::from_classes(g.n(), classes.clone())?;
    let want = vec![mode.tag(); classes.len()];
    let certificate = Certificate::compute_expecting(g, &part, &want, &[*epsilon]);
    Ok(ScoopResult {
        classes,
        leftover,
        mode,
        precondition,
        certificate,
    })
}
