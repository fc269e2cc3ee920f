//! The partition pipelines: cluster with [`uniform_partition`], recurse on
//! clusters with few copies of the smaller pattern, scoop the resulting
//! blocks into classes of a common size `s`, then redistribute the leftovers
//! and certify every class.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{maint_coefficients, Magnitude};
use crate::count::{count_cliques_in, count_induced_in};
use crate::error::{Error, Result};
use crate::generate::rng;
use crate::graph::{Graph, VertexSet};
use crate::params::{IncompleteReason, PipelineMode, PipelineParams, Status};
use crate::partition::{Certificate, ClassRecord, ClassTag, Partition};
use crate::pattern::PatternGraph;
use crate::ratio::{self, big_pow, to_big, Rational};
use crate::regularize::{uniform_partition, TraceStep, UniformOutcome};
use crate::scoop::{cube_sparse, scoop, ScoopMode, Strategy};
use crate::uniformity::{check_partition, slice_bound, PartitionReport};

/// Smallest class size used when the formula gives less; a class of one
/// vertex has no pairs and can never be certified.
pub const MIN_CLASS_SIZE: usize = 2;

/// Group sizes up to this are found by exhaustive search.
pub const EXACT_GROUP_MAX: usize = 4;

const GREEDY_RESTARTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairColor {
    Red,
    Blue,
    Green,
}

/// Edge colouring of the complete graph on the clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterColoring {
    g: usize,
    colors: Vec<PairColor>,
}

impl ClusterColoring {
    /// All pairs Green.
    pub fn new(g: usize) -> Self {
        ClusterColoring {
            g,
            colors: vec![PairColor::Green; g * g.saturating_sub(1) / 2],
        }
    }

    pub fn len(&self) -> usize {
        self.g
    }

    pub fn is_empty(&self) -> bool {
        self.g == 0
    }

    fn index(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.g && j < self.g, "pair ({i},{j}) out of range");
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.g - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn set(&mut self, i: usize, j: usize, c: PairColor) {
        let k = self.index(i, j);
        self.colors[k] = c;
    }

    pub fn get(&self, i: usize, j: usize) -> PairColor {
        self.colors[self.index(i, j)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyGroup {
    pub color: PairColor,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamseyGroups {
    pub groups: Vec<RamseyGroup>,
    pub leftover: Vec<usize>,
}

/// Repeatedly removes a Red or Blue monochromatic `b`-clique from the
/// remaining clusters until none is found. Up to [`EXACT_GROUP_MAX`] the
/// lexicographically first clique is taken; above that a greedy search with
/// seeded restarts is used.
pub fn ramsey_group_clusters(c: &ClusterColoring, b: usize, seed: u64) -> Result<RamseyGroups> {
    if b < 2 {
        return Err(Error::param("b", "group size must be at least 2"));
    }
    let mut free: Vec<usize> = (0..c.len()).collect();
    let mut rng = rng(seed);
    let mut groups = Vec::new();
    while free.len() >= b {
        let found = if b <= EXACT_GROUP_MAX {
            first_monochromatic(c, &free, b)
        } else {
            greedy_monochromatic(c, &free, b, &mut rng)
        };
        let Some((color, members)) = found else { break };
        free.retain(|v| !members.contains(v));
        groups.push(RamseyGroup { color, members });
    }
    Ok(RamseyGroups { groups, leftover: free })
}

fn first_monochromatic(c: &ClusterColoring, free: &[usize], b: usize) -> Option<(PairColor, Vec<usize>)> {
    fn extend(
        c: &ClusterColoring,
        free: &[usize],
        b: usize,
        start: usize,
        color: Option<PairColor>,
        chosen: &mut Vec<usize>,
    ) -> Option<PairColor> {
        if chosen.len() == b {
            return color;
        }
        for idx in start..free.len() {
            if free.len() - idx < b - chosen.len() {
                break;
            }
            let v = free[idx];
            let mut col = color;
            let fits = chosen.iter().all(|&u| match (c.get(u, v), col) {
                (PairColor::Green, _) => false,
                (k, None) => {
                    col = Some(k);
                    true
                }
                (k, Some(x)) => k == x,
            });
            if fits {
                chosen.push(v);
                if let Some(x) = extend(c, free, b, idx + 1, col, chosen) {
                    return Some(x);
                }
                chosen.pop();
            }
        }
        None
    }
    let mut chosen = Vec::with_capacity(b);
    extend(c, free, b, 0, None, &mut chosen).map(|col| (col, chosen))
}

fn greedy_monochromatic(
    c: &ClusterColoring,
    free: &[usize],
    b: usize,
    rng: &mut impl Rng,
) -> Option<(PairColor, Vec<usize>)> {
    let mut order = free.to_vec();
    for _ in 0..GREEDY_RESTARTS {
        order.shuffle(rng);
        for &start in &order {
            for color in [PairColor::Red, PairColor::Blue] {
                let mut clique = vec![start];
                for &w in &order {
                    if w != start && clique.iter().all(|&u| c.get(u, w) == color) {
                        clique.push(w);
                        if clique.len() == b {
                            clique.sort_unstable();
                            return Some((color, clique));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Moves `⌊|W0|/q⌋` leftover vertices into every class, one per class per
/// round, always taking the cheapest remaining `(cost, class, vertex)`.
/// The cost counts neighbours in the class, or non-neighbours for Dense
/// classes. Returns the vertices still left over, fewer than `q`.
pub fn redistribute(g: &Graph, classes: &mut [VertexSet], tags: &[ClassTag], leftover: &VertexSet) -> VertexSet {
    let q = classes.len();
    if q == 0 {
        return leftover.clone();
    }
    let rounds = leftover.len() / q;
    let mut free: Vec<usize> = leftover.members().to_vec();
    let mut members: Vec<Vec<usize>> = classes.iter().map(|c| c.members().to_vec()).collect();
    for _ in 0..rounds {
        let mut triples = Vec::with_capacity(q * free.len());
        for (i, cls) in members.iter().enumerate() {
            let mask = g.mask(&VertexSet::new(cls.iter().copied()));
            for &v in &free {
                let nb = g.degree_into(v, &mask);
                let cost = if tags[i] == ClassTag::Dense { cls.len() - nb } else { nb };
                triples.push((cost, i, v));
            }
        }
        triples.sort_unstable();
        let mut filled = vec![false; q];
        let mut used = BTreeSet::new();
        for (_, i, v) in triples {
            if !filled[i] && !used.contains(&v) {
                filled[i] = true;
                used.insert(v);
                members[i].push(v);
            }
        }
        free.retain(|v| !used.contains(v));
    }
    for (cls, m) in classes.iter_mut().zip(members) {
        *cls = VertexSet::new(m);
    }
    VertexSet::new(free)
}

/// How many pairs of final classes inherit uniformity from the cluster
/// partition by slicing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicingReport {
    pub pairs: usize,
    pub implied: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub partition: Partition,
    pub certificate: Certificate,
    pub status: Status,
    pub reasons: Vec<IncompleteReason>,
    /// Non-fatal observations, such as an inner cluster partition that did
    /// not reach uniformity.
    pub notes: Vec<String>,
    pub seed: u64,
    /// Class size used for scooping.
    pub s: usize,
    /// Clusters of the top-level cluster partition.
    pub clusters: usize,
    /// Uniformity of the final classes at `ε`, where the pipeline promises it.
    pub uniformity: Option<PartitionReport>,
    pub slicing: Option<SlicingReport>,
    pub trace: Vec<TraceStep>,
}

impl PipelineOutput {
    pub fn record(&self) -> PartitionRecord {
        PartitionRecord {
            n: self.partition.n(),
            q: self.partition.q(),
            class_size: self.partition.class_size(),
            exceptional: self.partition.exceptional().members().to_vec(),
            classes: self.partition.classes().iter().map(|c| c.members().to_vec()).collect(),
            certificate: self.certificate.classes.clone(),
            status: self.status,
            seed: self.seed,
            reasons: self.reasons.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.record())?)
    }

    /// Recounts the certificate against `g`.
    pub fn verify(&self, g: &Graph) -> bool {
        self.partition.n() == g.n() && self.partition.validate().is_ok() && self.certificate.verify(g, &self.partition)
    }
}

/// The serialized form of a pipeline result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub n: usize,
    pub q: usize,
    pub class_size: Option<usize>,
    pub exceptional: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub certificate: Vec<ClassRecord>,
    pub status: Status,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<IncompleteReason>,
}

impl PartitionRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn partition(&self) -> Result<Partition> {
        if self.q != self.classes.len() {
            return Err(Error::InvalidPartition(format!(
                "q = {} but {} classes listed",
                self.q,
                self.classes.len()
            )));
        }
        let classes = self.classes.iter().map(|c| VertexSet::new(c.iter().copied())).collect();
        let part = Partition::new(self.n, classes, VertexSet::new(self.exceptional.iter().copied()))?;
        if part.class_size() != self.class_size {
            return Err(Error::InvalidPartition("class_size does not match the classes".into()));
        }
        Ok(part)
    }

    pub fn certificate(&self) -> Certificate {
        Certificate {
            classes: self.certificate.clone(),
        }
    }

    /// Rebuilds the partition and recounts every certified class in `g`.
    pub fn verify(&self, g: &Graph) -> Result<bool> {
        let part = self.partition()?;
        Ok(part.n() == g.n() && self.certificate().verify(g, &part))
    }
}

/// `ε³`, rounded down to a multiple of `2^−62` when not representable and
/// never below `2^−62`.
fn cube(eps: &Rational) -> Rational {
    if let (Some(a), Some(b)) = (eps.numer().checked_pow(3), eps.denom().checked_pow(3)) {
        return Rational::new(a, b);
    }
    let num = BigInt::from(*eps.numer()).pow(3) << 62u32;
    let den = BigInt::from(*eps.denom()).pow(3);
    let scaled = (num / den).to_i64().unwrap_or(1).max(1);
    Rational::new(scaled, 1i64 << 62)
}

fn top_params(p: &PipelineParams, eps: Rational) -> PipelineParams {
    PipelineParams {
        epsilon: eps,
        delta: p.delta.min(eps),
        ..p.clone()
    }
}

/// Parameters for a level inside a cluster of `n` vertices.
fn level_params(p: &PipelineParams, eps: Rational, n: usize) -> PipelineParams {
    let l = p.l.min(n).max(1);
    PipelineParams {
        epsilon: eps,
        delta: p.delta.min(eps),
        l,
        max_k: p.max_k.max(l),
        ..p.clone()
    }
}

fn magnitude_le(count: u64, coeff: &Magnitude, t: usize, r: usize) -> bool {
    let bound = coeff.mul(&Magnitude::from_int(t as u128).pow(r as u32));
    Magnitude::from_int(count as u128) <= bound
}

fn coefficient(over: Option<Rational>, eps: &Rational, r: usize) -> Magnitude {
    match over {
        Some(x) => Magnitude::from_rational(&x),
        None => maint_coefficients(&Magnitude::from_rational(eps).pow(3), r as u32).0,
    }
}

type Block = (VertexSet, ClassTag);

/// One level of the recursion on `g`.
struct Level {
    uniform: UniformOutcome,
    /// Blocks from each cluster with few copies of the smaller pattern.
    blocks: Vec<Vec<Block>>,
    /// Union of the other clusters (clique recursion only).
    remainder: VertexSet,
    /// Red and Blue cluster groups (induced recursion only).
    groups: Vec<Block>,
    lost: Vec<usize>,
    notes: Vec<String>,
}

impl Level {
    fn new(uniform: UniformOutcome) -> Self {
        let mut notes = Vec::new();
        for r in &uniform.reasons {
            notes.push(format!("cluster partition incomplete: {r}"));
        }
        Level {
            lost: uniform.partition.exceptional().members().to_vec(),
            uniform,
            blocks: Vec::new(),
            remainder: VertexSet::default(),
            groups: Vec::new(),
            notes,
        }
    }

    fn trace(&self) -> Vec<TraceStep> {
        self.uniform.trace.clone()
    }

    fn clusters(&self) -> usize {
        self.uniform.partition.q()
    }

    fn inner_l(&self, p: &PipelineParams) -> usize {
        p.inner_l
            .unwrap_or_else(|| self.blocks.iter().map(Vec::len).max().unwrap_or(1))
            .max(1)
    }
}

fn clique_level(g: &Graph, r: usize, eps: Rational, lp: &PipelineParams) -> Result<Level> {
    let up = uniform_partition(g, lp)?;
    let mut level = Level::new(up);
    let inner = cube(&eps);
    let xi = coefficient(lp.xi_override, &eps, r - 1);
    let classes = level.uniform.partition.classes().to_vec();
    let t = classes.first().map_or(0, VertexSet::len);
    let mut rem = Vec::new();
    for cl in &classes {
        if magnitude_le(count_cliques_in(g, cl, r - 1)?, &xi, t, r - 1) {
            let b = clique_blocks(g, cl, r - 1, inner, lp, &mut level.lost, &mut level.notes)?;
            level.blocks.push(b);
        } else {
            rem.extend(cl.iter());
        }
    }
    level.remainder = VertexSet::new(rem);
    Ok(level)
}

/// Blocks of `G[set]` with few edges, produced by the clique recursion at
/// order `r`. Order 2 returns `set` itself.
fn clique_blocks(
    g: &Graph,
    set: &VertexSet,
    r: usize,
    eps: Rational,
    lp: &PipelineParams,
    lost: &mut Vec<usize>,
    notes: &mut Vec<String>,
) -> Result<Vec<Block>> {
    if r <= 2 || set.len() < 2 {
        if set.len() >= 2 && !ratio::le_scaled(g.edges_within_unchecked(set) as u128, &eps, ratio::pairs(set.len())) {
            notes.push(format!("block of {} vertices is not {}-sparse", set.len(), ratio::format_rational(&eps)));
        }
        return Ok(vec![(set.clone(), ClassTag::Sparse)]);
    }
    let sub = g.induced(set)?;
    let level = clique_level(&sub, r, eps, &level_params(lp, eps, set.len()))?;
    let mut out: Vec<Block> = level
        .blocks
        .into_iter()
        .flatten()
        .map(|(b, t)| (set.lift(&b), t))
        .collect();
    lost.extend(level.lost.iter().map(|&v| set.members()[v]));
    notes.extend(level.notes);
    let rem = level.remainder;
    if !rem.is_empty() {
        if ratio::lt_scaled(rem.len() as u128, &eps, set.len() as u128) {
            lost.extend(rem.iter().map(|v| set.members()[v]));
        } else {
            if !cube_sparse(sub.edges_within_unchecked(&rem), rem.len(), &eps) {
                notes.push(format!("inner remainder of {} vertices fails the cube bound", rem.len()));
            }
            out.push((set.lift(&rem), ClassTag::Sparse));
        }
    }
    Ok(out)
}

fn sparser_side(g: &Graph, set: &VertexSet) -> ClassTag {
    let e = g.edges_within_unchecked(set) as u128;
    if 2 * e <= ratio::pairs(set.len()) {
        ClassTag::Sparse
    } else {
        ClassTag::Dense
    }
}

fn induced_level(g: &Graph, h: &PatternGraph, eps: Rational, lp: &PipelineParams) -> Result<Level> {
    let up = uniform_partition(g, lp)?;
    let mut level = Level::new(up);
    let v = lp.pattern_vertex.min(h.order() - 1);
    let f = h.remove_vertex(v)?;
    let r = f.order();
    let inner = cube(&eps);
    let xi = coefficient(lp.xi_override, &eps, r);
    let classes = level.uniform.partition.classes().to_vec();
    let t = classes.first().map_or(0, VertexSet::len);
    let mut heavy = Vec::new();
    for (i, cl) in classes.iter().enumerate() {
        if magnitude_le(count_induced_in(g, cl, &f)?, &xi, t, r) {
            let b = induced_blocks(g, cl, &f, inner, lp, &mut level.lost, &mut level.notes)?;
            level.blocks.push(b);
        } else {
            heavy.push(i);
        }
    }
    let heavy_size: usize = heavy.iter().map(|&i| classes[i].len()).sum();
    if heavy.len() < 2 || ratio::lt_scaled(heavy_size as u128, &eps, g.n() as u128) {
        level.lost.extend(heavy.iter().flat_map(|&i| classes[i].iter()));
        return Ok(level);
    }
    let verdicts: HashMap<(usize, usize), bool> = level
        .uniform
        .report
        .pairs
        .iter()
        .map(|e| ((e.i, e.j), !e.verdict.kind.is_bad()))
        .collect();
    let delta = to_big(&lp.delta);
    let scale = big_pow(&to_big(&Rational::from_integer(2)), r as u32) * delta;
    let mut coloring = ClusterColoring::new(heavy.len());
    for a in 0..heavy.len() {
        for b in a + 1..heavy.len() {
            let (i, j) = (heavy[a], heavy[b]);
            let uniform = verdicts.get(&(i, j)).copied().unwrap_or(false);
            let d = to_big(&g.pair_density(&classes[i], &classes[j])?);
            let co = to_big(&Rational::one()) - &d;
            let color = if !uniform {
                PairColor::Green
            } else if big_pow(&d, r as u32) <= scale {
                PairColor::Red
            } else if big_pow(&co, r as u32) <= scale {
                PairColor::Blue
            } else {
                PairColor::Green
            };
            coloring.set(a, b, color);
        }
    }
    let b = match lp.group_size {
        Some(b) => b,
        None => Magnitude::from_rational(&eps)
            .pow(3)
            .recip()
            .ceil()
            .floor_u128()
            .map_or(usize::MAX, |x| x.min(usize::MAX as u128) as usize),
    }
    .clamp(2, heavy.len());
    let grouped = ramsey_group_clusters(&coloring, b, lp.seed)?;
    for grp in grouped.groups {
        let set: VertexSet = grp.members.iter().flat_map(|&a| classes[heavy[a]].iter()).collect();
        let tag = if grp.color == PairColor::Red { ClassTag::Sparse } else { ClassTag::Dense };
        level.groups.push((set, tag));
    }
    level.lost.extend(grouped.leftover.iter().flat_map(|&a| classes[heavy[a]].iter()));
    Ok(level)
}

/// Blocks of `G[set]`, each either sparse or dense, produced by the induced
/// recursion for pattern `h`. Order 2 returns `set` on its sparser side.
fn induced_blocks(
    g: &Graph,
    set: &VertexSet,
    h: &PatternGraph,
    eps: Rational,
    lp: &PipelineParams,
    lost: &mut Vec<usize>,
    notes: &mut Vec<String>,
) -> Result<Vec<Block>> {
    if h.order() <= 2 || set.len() < 2 {
        return Ok(vec![(set.clone(), sparser_side(g, set))]);
    }
    let sub = g.induced(set)?;
    let level = induced_level(&sub, h, eps, &level_params(lp, eps, set.len()))?;
    let out = level
        .blocks
        .into_iter()
        .flatten()
        .chain(level.groups)
        .map(|(b, t)| (set.lift(&b), t))
        .collect();
    lost.extend(level.lost.iter().map(|&v| set.members()[v]));
    notes.extend(level.notes);
    Ok(out)
}

/// `⌊ε·n/(4kL′)⌋`, capped at the largest admissible size of any target and
/// raised to [`MIN_CLASS_SIZE`]; `s_override` wins.
fn class_size(p: &PipelineParams, eps: &Rational, n: usize, k: usize, inner_l: usize, targets: &[usize]) -> usize {
    if let Some(s) = p.s_override {
        return s;
    }
    let den = 4 * k.max(1) as i128 * inner_l.max(1) as i128;
    let raw = (*eps.numer() as i128 * n as i128) / (*eps.denom() as i128 * den);
    let cap = targets.iter().map(|&t| ratio::floor_mul(eps, t)).max().unwrap_or(0) as i128;
    raw.min(cap).max(MIN_CLASS_SIZE as i128) as usize
}

/// Collects scooped classes and unassigned vertices.
struct Assembly<'a> {
    g: &'a Graph,
    eps: Rational,
    s: usize,
    strategy: Strategy,
    calls: u64,
    classes: Vec<VertexSet>,
    tags: Vec<ClassTag>,
    lost: Vec<usize>,
}

impl<'a> Assembly<'a> {
    fn new(g: &'a Graph, eps: Rational, s: usize, strategy: Strategy, lost: &[usize]) -> Self {
        Assembly {
            g,
            eps,
            s,
            strategy,
            calls: 0,
            classes: Vec::new(),
            tags: Vec::new(),
            lost: lost.to_vec(),
        }
    }

    /// Scoops `target`, or gives it up when `s` does not fit.
    fn scoop(&mut self, target: &VertexSet, tag: ClassTag) -> Result<()> {
        if target.is_empty() {
            return Ok(());
        }
        if !ratio::le_scaled(self.s as u128, &self.eps, target.len() as u128) {
            self.lost.extend(target.iter());
            return Ok(());
        }
        let mode = if tag == ClassTag::Dense { ScoopMode::Dense } else { ScoopMode::Sparse };
        let strategy = match self.strategy {
            Strategy::Sampled { samples, seed } => Strategy::Sampled {
                samples,
                seed: seed.wrapping_add(self.calls << 32),
            },
            other => other,
        };
        self.calls += 1;
        let res = scoop(self.g, target, self.s, &self.eps, mode, strategy)?;
        self.tags.extend(std::iter::repeat(mode.tag()).take(res.classes.len()));
        self.classes.extend(res.classes);
        self.lost.extend(res.leftover.iter());
        Ok(())
    }

    /// Redistributes and certifies at `[ε, 2ε]`, accepting either tag when
    /// `any_tag` is set.
    fn finish(mut self, any_tag: bool) -> Result<(Partition, Certificate)> {
        let lost = VertexSet::new(self.lost);
        let rest = redistribute(self.g, &mut self.classes, &self.tags, &lost);
        let part = Partition::new(self.g.n(), self.classes, rest)?;
        let thresholds = certificate_thresholds(&self.eps);
        let cert = if any_tag {
            Certificate::compute(self.g, &part, &thresholds)
        } else {
            Certificate::compute_expecting(self.g, &part, &self.tags, &thresholds)
        };
        Ok((part, cert))
    }
}

fn certificate_thresholds(eps: &Rational) -> Vec<Rational> {
    let two = eps * 2;
    if two < Rational::one() {
        vec![*eps, two]
    } else {
        vec![*eps]
    }
}

fn shape_reasons(part: &Partition, cert: &Certificate) -> Vec<IncompleteReason> {
    let mut reasons = Vec::new();
    if part.q() == 0 {
        reasons.push(IncompleteReason::NoClasses);
        return reasons;
    }
    let bad = cert.count(ClassTag::Untagged);
    if bad > 0 {
        reasons.push(IncompleteReason::UncertifiedClasses { count: bad });
    }
    if !part.is_equitable() {
        reasons.push(IncompleteReason::NotEquitable {
            exceptional: part.exceptional().len(),
            q: part.q(),
        });
    }
    reasons
}

struct Draft {
    partition: Partition,
    certificate: Certificate,
    reasons: Vec<IncompleteReason>,
    notes: Vec<String>,
    s: usize,
    clusters: usize,
    trace: Vec<TraceStep>,
}

impl Draft {
    fn finish(self, p: &PipelineParams) -> PipelineOutput {
        let mut reasons = self.reasons;
        reasons.extend(shape_reasons(&self.partition, &self.certificate));
        PipelineOutput {
            status: if reasons.is_empty() { Status::Complete } else { Status::Incomplete },
            partition: self.partition,
            certificate: self.certificate,
            reasons,
            notes: self.notes,
            seed: p.seed,
            s: self.s,
            clusters: self.clusters,
            uniformity: None,
            slicing: None,
            trace: self.trace,
        }
    }
}

fn check_order(r: usize, min: usize) -> Result<()> {
    if r < min || r > 16 {
        return Err(Error::OrderOutOfRange { r, min, max: 16 });
    }
    Ok(())
}

/// An equitable partition whose classes each have few edges, for a graph
/// with few `K_r`. Order 2 scoops the whole vertex set; higher orders
/// cluster, recurse on clusters with few `K_{r−1}` and scoop the blocks.
pub fn sparse_equitable_partition(g: &Graph, p: &PipelineParams) -> Result<PipelineOutput> {
    p.validate()?;
    check_order(p.r, 2)?;
    let eps = p.epsilon;
    let n = g.n();
    let any_tag = p.mode == PipelineMode::SparseOrDense;
    if p.r == 2 {
        let all = VertexSet::range(0..n);
        let s = class_size(p, &eps, n, 1, 1, &[n]);
        let mut asm = Assembly::new(g, eps, s, p.strategy, &[]);
        asm.scoop(&all, ClassTag::Sparse)?;
        let (partition, certificate) = asm.finish(any_tag)?;
        let draft = Draft {
            partition,
            certificate,
            reasons: Vec::new(),
            notes: Vec::new(),
            s,
            clusters: 1,
            trace: Vec::new(),
        };
        return Ok(draft.finish(p));
    }
    let level = clique_level(g, p.r, eps, &top_params(p, eps))?;
    let blocks: Vec<Block> = level.blocks.iter().flatten().cloned().collect();
    let rem = &level.remainder;
    let mut targets: Vec<usize> = blocks.iter().map(|b| b.0.len()).collect();
    targets.push(rem.len());
    let s = class_size(p, &eps, n, level.clusters(), level.inner_l(p), &targets);
    let mut asm = Assembly::new(g, eps, s, p.strategy, &level.lost);
    for (b, _) in &blocks {
        asm.scoop(b, ClassTag::Sparse)?;
    }
    let mut reasons = Vec::new();
    if !rem.is_empty() {
        if ratio::lt_scaled(rem.len() as u128, &eps, n as u128) {
            asm.lost.extend(rem.iter());
        } else {
            let edges = g.edges_within_unchecked(rem);
            if !cube_sparse(edges, rem.len(), &eps) {
                reasons.push(IncompleteReason::RemainderPrecondition { size: rem.len(), edges });
            }
            asm.scoop(rem, ClassTag::Sparse)?;
        }
    }
    let (partition, certificate) = asm.finish(any_tag)?;
    let draft = Draft {
        partition,
        certificate,
        reasons,
        notes: level.notes.clone(),
        s,
        clusters: level.clusters(),
        trace: level.trace(),
    };
    Ok(draft.finish(p))
}

/// Scoops `blocks` at decreasing `s` until at least `k_min` classes appear.
#[allow(clippy::too_many_arguments)]
fn scoop_to_minimum(
    g: &Graph,
    p: &PipelineParams,
    eps: Rational,
    mut s: usize,
    blocks: &[Block],
    lost: &[usize],
    k_min: usize,
    any_tag: bool,
) -> Result<(Partition, Certificate, usize)> {
    loop {
        let mut asm = Assembly::new(g, eps, s, p.strategy, lost);
        for (b, tag) in blocks {
            asm.scoop(b, *tag)?;
        }
        let (part, cert) = asm.finish(any_tag)?;
        if part.q() >= k_min || s <= MIN_CLASS_SIZE {
            return Ok((part, cert, s));
        }
        s = (s / 2).max(MIN_CLASS_SIZE);
    }
}

fn final_uniformity(
    g: &Graph,
    part: &Partition,
    p: &PipelineParams,
    eps: Rational,
    reasons: &mut Vec<IncompleteReason>,
) -> Result<PartitionReport> {
    let report = check_partition(g, part, &p.uniformity(eps)?)?;
    if !report.passes {
        let allowed = eps * Rational::from_integer((part.q() * part.q()) as i64);
        reasons.push(IncompleteReason::UniformityBudget {
            bad_pairs: report.bad_pairs,
            allowed: ratio::format_rational(&allowed),
        });
    }
    Ok(report)
}

/// Pairs of final classes lying in distinct clusters whose cluster pair was
/// uniform at `δ`, with `ε′ = max{δ/α, 2δ} ≤ ε` for the size ratio `α`.
fn slicing_report(up: &UniformOutcome, part: &Partition, delta: &Rational, eps: &Rational) -> SlicingReport {
    let clusters = up.partition.classes();
    let t = clusters.first().map_or(0, VertexSet::len);
    let home: Vec<Option<usize>> = part
        .classes()
        .iter()
        .map(|c| clusters.iter().position(|cl| c.is_subset(cl)))
        .collect();
    let bad: BTreeSet<(usize, usize)> = up
        .report
        .pairs
        .iter()
        .filter(|e| e.verdict.kind.is_bad())
        .map(|e| (e.i, e.j))
        .collect();
    let q = part.q();
    let mut implied = 0;
    for a in 0..q {
        for b in a + 1..q {
            let (Some(i), Some(j)) = (home[a], home[b]) else { continue };
            if i == j || bad.contains(&(i.min(j), i.max(j))) || t == 0 {
                continue;
            }
            let size = part.classes()[a].len().min(part.classes()[b].len());
            let alpha = Rational::new(size as i64, t as i64);
            if let Ok(bound) = slice_bound(delta, &alpha) {
                if bound <= *eps {
                    implied += 1;
                }
            }
        }
    }
    SlicingReport {
        pairs: q * q.saturating_sub(1) / 2,
        implied,
    }
}

/// An equitable partition into at least `k_min` classes, each with few
/// edges, whose classes are also `ε`-uniform: clusters come from
/// [`uniform_partition`] with at least `k_min` parts and each cluster is
/// partitioned at `ε³`.
pub fn sparse_uniform_partition(g: &Graph, k_min: usize, p: &PipelineParams) -> Result<PipelineOutput> {
    p.validate()?;
    check_order(p.r, 2)?;
    if k_min == 0 {
        return Err(Error::param("k_min", "must be at least 1"));
    }
    let eps = p.epsilon;
    let n = g.n();
    let mut lp = top_params(p, eps);
    lp.l = p.l.max(k_min);
    lp.max_k = lp.max_k.max(lp.l);
    let up = uniform_partition(g, &lp)?;
    let inner = cube(&eps);
    let mut level = Level::new(up);
    let xi = coefficient(p.xi_override, &eps, p.r);
    let classes = level.uniform.partition.classes().to_vec();
    let t = classes.first().map_or(0, VertexSet::len);
    for (i, cl) in classes.iter().enumerate() {
        if !magnitude_le(count_cliques_in(g, cl, p.r)?, &xi, t, p.r) {
            level.notes.push(format!("cluster {i} exceeds the clique bound"));
        }
        let b = clique_blocks(g, cl, p.r, inner, &lp, &mut level.lost, &mut level.notes)?;
        level.blocks.push(b);
    }
    let blocks: Vec<Block> = level.blocks.iter().flatten().cloned().collect();
    let targets: Vec<usize> = blocks.iter().map(|b| b.0.len()).collect();
    let s = class_size(p, &eps, n, level.clusters(), level.inner_l(p), &targets);
    let any_tag = p.mode == PipelineMode::SparseOrDense;
    let (partition, certificate, s) = scoop_to_minimum(g, p, eps, s, &blocks, &level.lost, k_min, any_tag)?;
    let mut reasons = Vec::new();
    if partition.q() < k_min {
        reasons.push(IncompleteReason::QBelowMinimum { q: partition.q(), k_min });
    }
    let report = final_uniformity(g, &partition, p, eps, &mut reasons)?;
    let slicing = slicing_report(&level.uniform, &partition, &lp.delta, &eps);
    let draft = Draft {
        partition,
        certificate,
        reasons,
        notes: level.notes.clone(),
        s,
        clusters: level.clusters(),
        trace: level.trace(),
    };
    let mut out = draft.finish(p);
    out.uniformity = Some(report);
    out.slicing = Some(slicing);
    Ok(out)
}

/// An equitable partition whose classes are each sparse or dense, for a
/// graph with few induced copies of `h`. Clusters with few copies of
/// `F = H − v` recurse at `ε³`; the rest are grouped along monochromatic
/// cliques of the Red/Blue cluster colouring.
pub fn sparse_dense_partition(g: &Graph, h: &PatternGraph, p: &PipelineParams) -> Result<PipelineOutput> {
    p.validate()?;
    check_order(h.order(), 2)?;
    if p.pattern_vertex >= h.order() {
        return Err(Error::VertexOutOfRange {
            vertex: p.pattern_vertex,
            n: h.order(),
        });
    }
    let eps = p.epsilon;
    let n = g.n();
    if h.order() == 2 {
        let all = VertexSet::range(0..n);
        let s = class_size(p, &eps, n, 1, 1, &[n]);
        let mut asm = Assembly::new(g, eps, s, p.strategy, &[]);
        asm.scoop(&all, sparser_side(g, &all))?;
        let (partition, certificate) = asm.finish(false)?;
        let draft = Draft {
            partition,
            certificate,
            reasons: Vec::new(),
            notes: Vec::new(),
            s,
            clusters: 1,
            trace: Vec::new(),
        };
        return Ok(draft.finish(p));
    }
    let level = induced_level(g, h, eps, &top_params(p, eps))?;
    let blocks: Vec<Block> = level.blocks.iter().flatten().chain(&level.groups).cloned().collect();
    let targets: Vec<usize> = blocks.iter().map(|b| b.0.len()).collect();
    let s = class_size(p, &eps, n, level.clusters(), level.inner_l(p), &targets);
    let mut asm = Assembly::new(g, eps, s, p.strategy, &level.lost);
    for (b, tag) in &blocks {
        asm.scoop(b, *tag)?;
    }
    let (partition, certificate) = asm.finish(false)?;
    let draft = Draft {
        partition,
        certificate,
        reasons: Vec::new(),
        notes: level.notes.clone(),
        s,
        clusters: level.clusters(),
        trace: level.trace(),
    };
    Ok(draft.finish(p))
}

/// Refines a `δ`-uniform equitable partition `part` into an `ε`-uniform
/// equitable partition with at least as many classes, each sparse or dense.
/// Each class is handled on the side (graph or complement) with few `K_r`.
pub fn refine_mixed_partition(g: &Graph, part: &Partition, p: &PipelineParams) -> Result<PipelineOutput> {
    p.validate()?;
    check_order(p.r, 2)?;
    if part.n() != g.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices, graph has {}",
            part.n(),
            g.n()
        )));
    }
    part.validate()?;
    let q = part.q();
    if q == 0 {
        return Err(Error::InvalidPartition("no classes to refine".into()));
    }
    let eps = p.epsilon;
    let n = g.n();
    let r = p.r;
    let mut notes = Vec::new();
    let pre = check_partition(g, part, &p.uniformity(p.delta)?)?;
    if !pre.passes {
        notes.push(format!(
            "input partition has {} pairs that are not {}-uniform",
            pre.bad_pairs,
            ratio::format_rational(&p.delta)
        ));
    }
    let inner = cube(&eps);
    let lp = top_params(p, eps);
    let rho = coefficient(p.rho_override, &eps, r);
    let t = n / q;
    let comp = g.complement();
    let mut reasons = Vec::new();
    let mut lost = part.exceptional().members().to_vec();
    let mut per_class = Vec::new();
    for (i, cl) in part.classes().iter().enumerate() {
        let ks = count_cliques_in(g, cl, r)?;
        let kd = count_cliques_in(&comp, cl, r)?;
        let sparse_ok = magnitude_le(ks, &rho, t, r);
        let dense_ok = magnitude_le(kd, &rho, t, r);
        let tag = match (sparse_ok, dense_ok) {
            (true, false) => ClassTag::Sparse,
            (false, true) => ClassTag::Dense,
            _ if ks <= kd => ClassTag::Sparse,
            _ => ClassTag::Dense,
        };
        if !sparse_ok && !dense_ok {
            reasons.push(IncompleteReason::CliqueConditionViolated { class: i });
        }
        let side = if tag == ClassTag::Sparse { g } else { &comp };
        let blocks = clique_blocks(side, cl, r, inner, &lp, &mut lost, &mut notes)?;
        per_class.push(blocks.into_iter().map(|(b, _)| (b, tag)).collect::<Vec<_>>());
    }
    let inner_l = p
        .inner_l
        .unwrap_or_else(|| per_class.iter().map(Vec::len).max().unwrap_or(1))
        .max(1);
    let blocks: Vec<Block> = per_class.into_iter().flatten().collect();
    let targets: Vec<usize> = blocks.iter().map(|b| b.0.len()).collect();
    let s = class_size(p, &eps, n, q, inner_l, &targets);
    let (partition, certificate, s) = scoop_to_minimum(g, p, eps, s, &blocks, &lost, q, false)?;
    if partition.q() < q {
        reasons.push(IncompleteReason::QBelowMinimum { q: partition.q(), k_min: q });
    }
    let report = final_uniformity(g, &partition, p, eps, &mut reasons)?;
    let draft = Draft {
        partition,
        certificate,
        reasons,
        notes,
        s,
        clusters: q,
        trace: Vec::new(),
    };
    let mut out = draft.finish(p);
    out.uniformity = Some(report);
    Ok(out)
}
