//! ε-uniform pair verdicts and enumeration verifiers for the counting lemmas
//! about uniform pairs.
//!
//! A pair `(A, B)` is ε-uniform when every `X ⊆ A`, `Y ⊆ B` with
//! `|X| ≥ ⌈ε|A|⌉`, `|Y| ≥ ⌈ε|B|⌉` has `|d(X,Y) − d(A,B)| ≤ ε`. This is the
//! usual regularity definition; it is imported, not derived here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::rng;
use crate::graph::{check_pair_sides, Graph, VertexSet};
use crate::partition::Partition;
use crate::ratio::{self, big_from_counts, big_pow, to_big, Rational};

pub const DEFAULT_EXACT_BUDGET: usize = 24;
/// Largest `|A| + |B|` accepted for exhaustive checking.
pub const MAX_EXACT_BUDGET: usize = 48;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityParams {
    #[serde(with = "ratio::serde_rational")]
    pub epsilon: Rational,
    pub exact_budget: usize,
    pub sample_count: usize,
    pub seed: u64,
}

impl UniformityParams {
    pub fn new(epsilon: Rational) -> Result<Self> {
        let p = UniformityParams {
            epsilon,
            exact_budget: DEFAULT_EXACT_BUDGET,
            sample_count: 256,
            seed: 0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exact_budget(mut self, budget: usize) -> Self {
        self.exact_budget = budget;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.sample_count = samples;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ratio::check_epsilon("epsilon", &self.epsilon)?;
        if self.sample_count == 0 {
            return Err(Error::param("sample_count", "must be at least 1"));
        }
        if self.exact_budget > MAX_EXACT_BUDGET {
            return Err(Error::param(
                "exact_budget",
                format!("{} exceeds {MAX_EXACT_BUDGET}", self.exact_budget),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    ExactPass,
    ExactFail,
    /// No witness found by the heuristics. One-sided: does not prove
    /// uniformity.
    SampledPass,
    WitnessFound,
}

impl VerdictKind {
    pub fn is_bad(self) -> bool {
        matches!(self, VerdictKind::ExactFail | VerdictKind::WitnessFound)
    }
}

/// Sub-pair `(X, Y)` whose density deviates from `d(A,B)` by more than ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: VertexSet,
    pub y: VertexSet,
    pub xy_edges: usize,
    pub ab_edges: usize,
    pub a_size: usize,
    pub b_size: usize,
}

impl Witness {
    /// `|d(X,Y) − d(A,B)|` exactly.
    pub fn deviation(&self) -> BigRational {
        let dxy = big_from_counts(self.xy_edges as u128, (self.x.len() * self.y.len()) as u128);
        let dab = big_from_counts(self.ab_edges as u128, (self.a_size * self.b_size) as u128);
        (dxy - dab).abs()
    }

    /// Recomputes everything from the graph: sizes, both densities and the
    /// strict deviation bound.
    pub fn verify(&self, g: &Graph, a: &VertexSet, b: &VertexSet, epsilon: &Rational) -> bool {
        if !self.x.is_subset(a) || !self.y.is_subset(b) || self.x.is_empty() || self.y.is_empty() {
            return false;
        }
        if self.x.len() < ratio::ceil_mul(epsilon, a.len()) || self.y.len() < ratio::ceil_mul(epsilon, b.len()) {
            return false;
        }
        let (Ok(dxy), Ok(dab)) = (g.pair_density(&self.x, &self.y), g.pair_density(a, b)) else {
            return false;
        };
        let dev = (to_big(&dxy) - to_big(&dab)).abs();
        dev > to_big(epsilon)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub kind: VerdictKind,
    pub witness: Option<Witness>,
    /// Sub-pairs `(X, Y)` whose density was evaluated.
    pub checked_pairs: u64,
    pub seed: Option<u64>,
}

/// Compact JSON record of a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub kind: VerdictKind,
    pub deviation: Option<f64>,
    pub witness_sizes: Option<(usize, usize)>,
    pub checked_pairs: u64,
    pub seed: Option<u64>,
}

impl PairVerdict {
    pub fn record(&self) -> VerdictRecord {
        VerdictRecord {
            kind: self.kind,
            deviation: self.witness.as_ref().map(|w| ratio::big_to_f64(&w.deviation())),
            witness_sizes: self.witness.as_ref().map(|w| (w.x.len(), w.y.len())),
            checked_pairs: self.checked_pairs,
            seed: self.seed,
        }
    }
}

/// Deviation `|e·P − eAB·x·y| / (x·y·P)` kept as an integer fraction,
/// `P = |A||B|`.
#[derive(Clone, Copy, Debug)]
struct Dev {
    num: i128,
    den: i128,
}

impl Dev {
    fn of(e: usize, x: usize, y: usize, ab: usize, p: usize) -> Dev {
        let num = (e as i128 * p as i128 - ab as i128 * x as i128 * y as i128).abs();
        Dev {
            num,
            den: x as i128 * y as i128 * p as i128,
        }
    }

    fn exceeds(&self, eps: &Rational) -> bool {
        self.num * *eps.denom() as i128 > *eps.numer() as i128 * self.den
    }

    fn gt(&self, other: &Dev) -> bool {
        self.num * other.den > other.num * self.den
    }
}

/// Best sub-pair for a fixed `X`: among all `|Y| ≥ ky`, the extreme
/// deviation is attained by the `|Y|` vertices of `B` with fewest or most
/// neighbours in `X`.
struct Response {
    dev: Dev,
    /// `k` and whether to take the top (most neighbours) vertices.
    k: usize,
    top: bool,
    edges: usize,
}

fn best_response(counts: &mut [(usize, usize)], x: usize, ky: usize, ab: usize, p: usize) -> (Response, u64) {
    counts.sort_unstable();
    let m = counts.len();
    let mut best: Option<Response> = None;
    let mut checked = 0;
    let (mut low, mut high) = (0usize, 0usize);
    for k in 1..=m {
        low += counts[k - 1].0;
        high += counts[m - k].0;
        if k < ky {
            continue;
        }
        for (edges, top) in [(low, false), (high, true)] {
            checked += 1;
            let dev = Dev::of(edges, x, k, ab, p);
            if best.as_ref().is_none_or(|b| dev.gt(&b.dev)) {
                best = Some(Response { dev, k, top, edges });
            }
        }
    }
    (best.expect("ky <= |B|"), checked)
}

fn response_set(counts: &[(usize, usize)], r: &Response) -> VertexSet {
    let m = counts.len();
    let slice = if r.top { &counts[m - r.k..] } else { &counts[..r.k] };
    slice.iter().map(|&(_, v)| v).collect()
}

pub fn check_pair(g: &Graph, a: &VertexSet, b: &VertexSet, p: &UniformityParams) -> Result<PairVerdict> {
    check_pair_sides(g.n(), a, b)?;
    p.validate()?;
    if a.len() + b.len() <= p.exact_budget {
        Ok(exact_check(g, a, b, &p.epsilon))
    } else {
        Ok(sampled_check(g, a, b, p))
    }
}

/// Exhaustive check. Subsets of the smaller side are enumerated; for each
/// the other side is solved by [`best_response`]. Returns the witness of
/// largest deviation.
fn exact_check(g: &Graph, a: &VertexSet, b: &VertexSet, eps: &Rational) -> PairVerdict {
    let swap = a.len() > b.len();
    let (s, o) = if swap { (b, a) } else { (a, b) };
    let ab = g.edges_between_unchecked(a, b);
    let p = a.len() * b.len();
    let ks = ratio::ceil_mul(eps, s.len()).max(1);
    let ko = ratio::ceil_mul(eps, o.len()).max(1);
    let nb: Vec<u64> = o
        .iter()
        .map(|v| {
            s.iter()
                .enumerate()
                .filter(|&(_, u)| g.has_edge(u, v))
                .fold(0u64, |acc, (i, _)| acc | 1 << i)
        })
        .collect();
    let mut counts: Vec<(usize, usize)> = vec![(0, 0); o.len()];
    let mut best: Option<(u64, Response)> = None;
    let mut checked = 0;
    for mask in 1u64..(1u64 << s.len()) {
        let x = mask.count_ones() as usize;
        if x < ks {
            continue;
        }
        for (slot, (&row, v)) in counts.iter_mut().zip(nb.iter().zip(o.iter())) {
            *slot = ((row & mask).count_ones() as usize, v);
        }
        let (resp, c) = best_response(&mut counts, x, ko, ab, p);
        checked += c;
        if best.as_ref().is_none_or(|(_, b)| resp.dev.gt(&b.dev)) {
            best = Some((mask, resp));
        }
    }
    let (mask, resp) = best.expect("side sizes are at least 1");
    if !resp.dev.exceeds(eps) {
        return PairVerdict {
            kind: VerdictKind::ExactPass,
            witness: None,
            checked_pairs: checked,
            seed: None,
        };
    }
    for (slot, (&row, v)) in counts.iter_mut().zip(nb.iter().zip(o.iter())) {
        *slot = ((row & mask).count_ones() as usize, v);
    }
    counts.sort_unstable();
    let side_x: VertexSet = s.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, v)| v).collect();
    let side_y = response_set(&counts, &resp);
    let (x, y) = if swap { (side_y, side_x) } else { (side_x, side_y) };
    PairVerdict {
        kind: VerdictKind::ExactFail,
        witness: Some(Witness {
            x,
            y,
            xy_edges: resp.edges,
            ab_edges: ab,
            a_size: a.len(),
            b_size: b.len(),
        }),
        checked_pairs: checked,
        seed: None,
    }
}

struct Sampler<'a> {
    g: &'a Graph,
    a: &'a VertexSet,
    b: &'a VertexSet,
    eps: Rational,
    ab: usize,
    p: usize,
    checked: u64,
    counts: Vec<(usize, usize)>,
}

impl Sampler<'_> {
    /// Tries `X ⊆ side` (`from_a` tells which side) against the best
    /// response on the other side, then alternates a few rounds.
    fn probe(&mut self, set: VertexSet, from_a: bool) -> Option<Witness> {
        let mut cur = set;
        let mut cur_from_a = from_a;
        for _ in 0..3 {
            let (own, other) = if cur_from_a { (self.a, self.b) } else { (self.b, self.a) };
            if cur.len() < ratio::ceil_mul(&self.eps, own.len()).max(1) {
                return None;
            }
            let mask = self.g.mask(&cur);
            self.counts.clear();
            self.counts.extend(other.iter().map(|v| (self.g.degree_into(v, &mask), v)));
            let ko = ratio::ceil_mul(&self.eps, other.len()).max(1);
            let (resp, c) = best_response(&mut self.counts, cur.len(), ko, self.ab, self.p);
            self.checked += c;
            let reply = response_set(&self.counts, &resp);
            if resp.dev.exceeds(&self.eps) {
                let (x, y) = if cur_from_a { (cur, reply) } else { (reply, cur) };
                return Some(Witness {
                    x,
                    y,
                    xy_edges: resp.edges,
                    ab_edges: self.ab,
                    a_size: self.a.len(),
                    b_size: self.b.len(),
                });
            }
            cur = reply;
            cur_from_a = !cur_from_a;
        }
        None
    }
}

fn sampled_check(g: &Graph, a: &VertexSet, b: &VertexSet, params: &UniformityParams) -> PairVerdict {
    let mut s = Sampler {
        g,
        a,
        b,
        eps: params.epsilon,
        ab: g.edges_between_unchecked(a, b),
        p: a.len() * b.len(),
        checked: 0,
        counts: Vec::new(),
    };
    let found = |w: Witness, checked| PairVerdict {
        kind: VerdictKind::WitnessFound,
        witness: Some(w),
        checked_pairs: checked,
        seed: Some(params.seed),
    };
    for from_a in [true, false] {
        let (own, other) = if from_a { (a, b) } else { (b, a) };
        let k = ratio::ceil_mul(&params.epsilon, own.len()).max(1);
        let mask = g.mask(other);
        let mut by_degree: Vec<(usize, usize)> = own.iter().map(|v| (g.degree_into(v, &mask), v)).collect();
        by_degree.sort_unstable();
        let mut sizes = vec![k, 2 * k, own.len() / 2];
        sizes.retain(|&z| z >= k && z <= own.len());
        sizes.dedup();
        for &z in &sizes {
            let low: VertexSet = by_degree[..z].iter().map(|&(_, v)| v).collect();
            let high: VertexSet = by_degree[by_degree.len() - z..].iter().map(|&(_, v)| v).collect();
            for cand in [low, high] {
                if let Some(w) = s.probe(cand, from_a) {
                    return found(w, s.checked);
                }
            }
        }
    }
    // neighbourhoods of the extreme-degree vertices on the opposite side
    for from_a in [true, false] {
        let (own, other) = if from_a { (a, b) } else { (b, a) };
        let own_mask = g.mask(own);
        let mut ext: Vec<(usize, usize)> = other.iter().map(|v| (g.degree_into(v, &own_mask), v)).collect();
        ext.sort_unstable();
        let picks: Vec<usize> = ext.iter().take(4).chain(ext.iter().rev().take(4)).map(|&(_, v)| v).collect();
        for v in picks {
            let inside: VertexSet = own.iter().filter(|&u| g.has_edge(u, v)).collect();
            let outside = own.difference(&inside);
            for cand in [inside, outside] {
                if let Some(w) = s.probe(cand, from_a) {
                    return found(w, s.checked);
                }
            }
        }
    }
    let mut rng = rng(params.seed);
    let kx = ratio::ceil_mul(&params.epsilon, a.len()).max(1);
    let ky = ratio::ceil_mul(&params.epsilon, b.len()).max(1);
    for i in 0..params.sample_count {
        let from_a = i % 2 == 0;
        let (own, k) = if from_a { (a, kx) } else { (b, ky) };
        let size = rng.gen_range(k..=own.len());
        let cand: VertexSet = own.members().choose_multiple(&mut rng, size).copied().collect();
        if let Some(w) = s.probe(cand, from_a) {
            return found(w, s.checked);
        }
    }
    PairVerdict {
        kind: VerdictKind::SampledPass,
        witness: None,
        checked_pairs: s.checked,
        seed: Some(params.seed),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEntry {
    pub i: usize,
    pub j: usize,
    pub verdict: PairVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub q: usize,
    pub bad_pairs: usize,
    pub sampled_pairs: usize,
    #[serde(with = "ratio::serde_rational")]
    pub epsilon: Rational,
    /// `bad_pairs ≤ ε·q²`.
    pub passes: bool,
    pub pairs: Vec<PairEntry>,
}

/// Checks every class pair. Sampled verdicts use `seed + pair index`.
pub fn check_partition(g: &Graph, part: &Partition, p: &UniformityParams) -> Result<PartitionReport> {
    p.validate()?;
    if part.n() != g.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices, graph has {}",
            part.n(),
            g.n()
        )));
    }
    part.validate()?;
    let q = part.q();
    let mut pairs = Vec::new();
    let mut idx = 0u64;
    for i in 0..q {
        for j in i + 1..q {
            let sub = p.clone().with_seed(p.seed.wrapping_add(idx));
            idx += 1;
            let verdict = check_pair(g, &part.classes()[i], &part.classes()[j], &sub)?;
            pairs.push(PairEntry { i, j, verdict });
        }
    }
    Ok(report_from(q, p.epsilon, pairs))
}

pub(crate) fn report_from(q: usize, epsilon: Rational, pairs: Vec<PairEntry>) -> PartitionReport {
    let bad_pairs = pairs.iter().filter(|e| e.verdict.kind.is_bad()).count();
    let sampled_pairs = pairs.iter().filter(|e| e.verdict.kind == VerdictKind::SampledPass).count();
    PartitionReport {
        q,
        bad_pairs,
        sampled_pairs,
        epsilon,
        passes: ratio::le_scaled(bad_pairs as u128, &epsilon, (q * q) as u128),
        pairs,
    }
}

/// `max{ε/α, 2ε}` for `0 < ε < α ≤ 1`.
pub fn slice_bound(epsilon: &Rational, alpha: &Rational) -> Result<Rational> {
    if !epsilon.is_positive() {
        return Err(Error::param("epsilon", "must be positive"));
    }
    if alpha <= epsilon || *alpha > Rational::one() {
        return Err(Error::param(
            "alpha",
            format!(
                "need {} < alpha <= 1, got {}",
                ratio::format_rational(epsilon),
                ratio::format_rational(alpha)
            ),
        ));
    }
    let a = epsilon / alpha;
    let b = epsilon * 2;
    Ok(if a > b { a } else { b })
}

/// Brute-force caps for the r-set counters.
pub const RSET_MAX_SIDE: usize = 16;
pub const RSET_MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RsetCount {
    pub count: u64,
    /// Total number of `r`-subsets of `A`.
    pub total: u128,
    /// The lemma's hypothesis on `(d, ε, r)` and the sets involved.
    pub precondition: bool,
    /// `count ≤ ceiling`, where `ceiling` is `ε·r·|A|^r` or `ε·2^r·|A|^r`.
    pub within_ceiling: bool,
    pub ceiling: f64,
}

fn rset_caps(a: &VertexSet, r: usize) -> Result<()> {
    if r == 0 || r > RSET_MAX_ORDER || r > a.len() {
        return Err(Error::OrderOutOfRange {
            r,
            min: 1,
            max: RSET_MAX_ORDER.min(a.len()),
        });
    }
    if a.len() > RSET_MAX_SIDE {
        return Err(Error::BudgetExceeded {
            what: "r-set enumeration side",
            needed: a.len() as u128,
            budget: RSET_MAX_SIDE as u128,
        });
    }
    Ok(())
}

/// All `r`-subsets of `0..n` as index vectors, in lexicographic order.
fn for_each_rset(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn big(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn ceiling(eps: &Rational, factor: u64, a: usize, r: usize) -> BigRational {
    to_big(eps) * BigRational::from_integer(BigInt::from(factor)) * big_pow(&big(a), r as u32)
}

fn finish(count: u64, a: usize, r: usize, precondition: bool, ceil: BigRational) -> RsetCount {
    RsetCount {
        count,
        total: ratio::binom(a as u64, r as u64),
        precondition,
        within_ceiling: big(count as usize) <= ceil,
        ceiling: ratio::big_to_f64(&ceil),
    }
}

/// Counts `r`-sets `R ⊆ A` with `|(∩_{u∈R} Γ(u)) ∩ Y| ≤ max(d−ε, 0)^r |Y|`.
/// The precondition reported is `d > ε` and `(d−ε)^{r−1}|Y| > ε|B|`.
pub fn count_shrinking_rsets(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    y: &VertexSet,
    r: usize,
    epsilon: &Rational,
) -> Result<RsetCount> {
    check_pair_sides(g.n(), a, b)?;
    rset_caps(a, r)?;
    if !y.is_subset(b) {
        return Err(Error::param("y", "must be a subset of B"));
    }
    let d = to_big(&g.pair_density(a, b)?);
    let eps = to_big(epsilon);
    let base = &d - &eps;
    let precondition = base.is_positive() && big_pow(&base, r as u32 - 1) * big(y.len()) > &eps * big(b.len());
    // a negative base is read as 0: the shrink threshold is then empty
    let clamped = if base.is_positive() { base.clone() } else { BigRational::zero() };
    let threshold = big_pow(&clamped, r as u32) * big(y.len());
    let ymask = g.mask(y);
    let members = a.members();
    let mut count = 0;
    let mut scratch = vec![0u64; ymask.len()];
    for_each_rset(a.len(), r, |idx| {
        scratch.copy_from_slice(&ymask);
        for &i in idx {
            for (s, w) in scratch.iter_mut().zip(g.row(members[i])) {
                *s &= w;
            }
        }
        let c = scratch.iter().map(|w| w.count_ones() as usize).sum::<usize>();
        if big(c) <= threshold {
            count += 1;
        }
    });
    Ok(finish(count, a.len(), r, precondition, ceiling(epsilon, r as u64, a.len(), r)))
}

/// `d^r > 2^r·ε`, i.e. `2ε^{1/r} < d`, for nonnegative `d`.
fn above_root(d: &BigRational, eps: &BigRational, r: usize) -> bool {
    d.is_positive() && big_pow(d, r as u32) > big_pow(&big(2), r as u32) * eps
}

/// Counts `r`-sets `R ⊆ A` with `|(∩_{u∈R} Γ(u)) ∩ B| ≤ ε|B|`. The
/// precondition reported is `2ε^{1/r} < d ≤ 1`.
pub fn count_low_common_rsets(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    epsilon: &Rational,
    r: usize,
) -> Result<RsetCount> {
    check_pair_sides(g.n(), a, b)?;
    rset_caps(a, r)?;
    let d = to_big(&g.pair_density(a, b)?);
    let eps = to_big(epsilon);
    let precondition = above_root(&d, &eps, r);
    let bmask = g.mask(b);
    let members = a.members();
    let mut count = 0;
    let mut scratch = vec![0u64; bmask.len()];
    for_each_rset(a.len(), r, |idx| {
        scratch.copy_from_slice(&bmask);
        for &i in idx {
            for (s, w) in scratch.iter_mut().zip(g.row(members[i])) {
                *s &= w;
            }
        }
        let c = scratch.iter().map(|w| w.count_ones() as u128).sum::<u128>();
        if ratio::le_scaled(c, epsilon, b.len() as u128) {
            count += 1;
        }
    });
    Ok(finish(count, a.len(), r, precondition, ceiling(epsilon, r as u64, a.len(), r)))
}

/// Counts `r`-sets `R ⊆ A` admitting a split `R = R₀ ∪ R₁` with
/// `|(∩_{R₀} Γ(u)) ∩ (∩_{R₁} (B∖Γ(u))) ∩ B| ≤ ε|B|`. The precondition
/// reported is `2ε^{1/r} < d < 1 − 2ε^{1/r}`.
pub fn count_low_induced_witness_rsets(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    epsilon: &Rational,
    r: usize,
) -> Result<RsetCount> {
    check_pair_sides(g.n(), a, b)?;
    rset_caps(a, r)?;
    let d = to_big(&g.pair_density(a, b)?);
    let eps = to_big(epsilon);
    let precondition = above_root(&d, &eps, r) && above_root(&(BigRational::one() - &d), &eps, r);
    let bmask = g.mask(b);
    let members = a.members();
    let mut count = 0;
    let mut scratch = vec![0u64; bmask.len()];
    for_each_rset(a.len(), r, |idx| {
        let hit = (0u32..1 << r).any(|split| {
            scratch.copy_from_slice(&bmask);
            for (bit, &i) in idx.iter().enumerate() {
                let row = g.row(members[i]);
                let in_r1 = split >> bit & 1 == 1;
                for (s, w) in scratch.iter_mut().zip(row) {
                    *s &= if in_r1 { !w } else { *w };
                }
            }
            let c = scratch.iter().map(|w| w.count_ones() as u128).sum::<u128>();
            ratio::le_scaled(c, epsilon, b.len() as u128)
        });
        if hit {
            count += 1;
        }
    });
    let factor = 1u64 << r;
    Ok(finish(count, a.len(), r, precondition, ceiling(epsilon, factor, a.len(), r)))
}

/// Full `(X, Y)` enumeration, used as the oracle for [`check_pair`].
#[cfg(test)]
pub(crate) fn naive_max_deviation(g: &Graph, a: &VertexSet, b: &VertexSet, eps: &Rational) -> BigRational {
    let kx = ratio::ceil_mul(eps, a.len()).max(1);
    let ky = ratio::ceil_mul(eps, b.len()).max(1);
    let dab = to_big(&g.pair_density(a, b).unwrap());
    let mut best = BigRational::zero();
    let subsets = |s: &VertexSet, k: usize| -> Vec<VertexSet> {
        (1u32..1 << s.len())
            .filter(|m| m.count_ones() as usize >= k)
            .map(|m| s.iter().enumerate().filter(|&(i, _)| m >> i & 1 == 1).map(|(_, v)| v).collect())
            .collect()
    };
    let ys = subsets(b, ky);
    for x in subsets(a, kx) {
        for y in &ys {
            let mut e = 0;
            for u in x.iter() {
                for v in y.iter() {
                    if g.has_edge(u, v) {
                        e += 1;
                    }
                }
            }
            let dev = (big_from_counts(e, (x.len() * y.len()) as u128) - &dab).abs();
            if dev > best {
                best = dev;
            }
        }
    }
    best
}
