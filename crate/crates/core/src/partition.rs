//! Partitions `V0 ∪ V1 ∪ ... ∪ Vq` and per-class sparse/dense certificates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::ratio::{self, Rational};

/// An exceptional class `V0` plus classes `V1..Vq`, together covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    classes: Vec<VertexSet>,
    exceptional: VertexSet,
}

impl Partition {
    pub fn new(n: usize, classes: Vec<VertexSet>, exceptional: VertexSet) -> Result<Self> {
        let p = Partition {
            n,
            classes,
            exceptional,
        };
        p.validate()?;
        Ok(p)
    }

    /// Everything not covered by `classes` becomes the exceptional class.
    pub fn from_classes(n: usize, classes: Vec<VertexSet>) -> Result<Self> {
        let mut seen = vec![false; n];
        for c in &classes {
            c.check(n)?;
            for v in c.iter() {
                if seen[v] {
                    return Err(Error::InvalidPartition(format!("vertex {v} in two classes")));
                }
                seen[v] = true;
            }
        }
        let exceptional = VertexSet::from_sorted((0..n).filter(|&v| !seen[v]).collect());
        Partition::new(n, classes, exceptional)
    }

    /// `q` classes of `⌊|U|/q⌋` vertices of `U` taken in index order; the
    /// remainder of `U` and everything outside `U` goes to `V0`.
    pub fn index_split(n: usize, set: &VertexSet, q: usize) -> Result<Self> {
        if q == 0 || q > set.len() {
            return Err(Error::param("q", format!("cannot split {} vertices into {q} classes", set.len())));
        }
        let size = set.len() / q;
        let members = set.members();
        let classes = (0..q)
            .map(|i| VertexSet::from_sorted(members[i * size..(i + 1) * size].to_vec()))
            .collect();
        Partition::from_classes(n, classes)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for set in self.classes.iter().chain(std::iter::once(&self.exceptional)) {
            set.check(self.n)?;
            for v in set.iter() {
                if seen[v] {
                    return Err(Error::InvalidPartition(format!("vertex {v} covered twice")));
                }
                seen[v] = true;
            }
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("vertex {v} not covered")));
        }
        if self.classes.iter().any(|c| c.is_empty()) {
            return Err(Error::InvalidPartition("empty class".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[VertexSet] {
        &self.classes
    }

    pub fn exceptional(&self) -> &VertexSet {
        &self.exceptional
    }

    pub fn into_parts(self) -> (Vec<VertexSet>, VertexSet) {
        (self.classes, self.exceptional)
    }

    /// The common class size, if all classes have the same size.
    pub fn class_size(&self) -> Option<usize> {
        let first = self.classes.first()?.len();
        self.classes.iter().all(|c| c.len() == first).then_some(first)
    }

    /// All classes equal and `|V0| < q`.
    pub fn is_equitable(&self) -> bool {
        self.class_size().is_some() && self.exceptional.len() < self.q()
    }

    /// Class index of every vertex, `None` for `V0`.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut label = vec![None; self.n];
        for (i, c) in self.classes.iter().enumerate() {
            for v in c.iter() {
                label[v] = Some(i);
            }
        }
        label
    }

    /// Replaces vertex labels of a partition of `G[U]` by the members of `U`.
    pub fn lift(&self, n: usize, set: &VertexSet) -> Result<Partition> {
        if set.len() != self.n {
            return Err(Error::InvalidPartition(format!(
                "partition of {} vertices lifted through a set of {}",
                self.n,
                set.len()
            )));
        }
        let classes = self.classes.iter().map(|c| set.lift(c)).collect();
        let mut rest = set.lift(&self.exceptional).into_vec();
        rest.extend((0..n).filter(|&v| !set.contains(v)));
        Partition::new(n, classes, rest.into_iter().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    Sparse,
    Dense,
    Untagged,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::Sparse => "Sparse",
            ClassTag::Dense => "Dense",
            ClassTag::Untagged => "Untagged",
        };
        f.write_str(s)
    }
}

/// Measured density of one class: `density_num = e(Vi)`, `density_den =
/// C(|Vi|,2)`, unreduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub tag: ClassTag,
    pub density_num: u64,
    pub density_den: u64,
    #[serde(with = "ratio::serde_rational")]
    pub threshold: Rational,
}

impl ClassRecord {
    pub fn density(&self) -> f64 {
        if self.density_den == 0 {
            0.0
        } else {
            self.density_num as f64 / self.density_den as f64
        }
    }
}

/// Tag for a class with `e` edges among `pairs` pairs at threshold `t`:
/// Sparse iff `e < t·pairs`, Dense iff `e > (1−t)·pairs`. When both hold
/// (only possible for `t > 1/2`) the nearer side wins, Sparse on ties.
pub fn classify(e: u64, pairs: u64, t: &Rational) -> ClassTag {
    let sparse = ratio::lt_scaled(e as u128, t, pairs as u128) && pairs > 0;
    let dense = pairs > 0 && ratio::lt_scaled((pairs - e) as u128, t, pairs as u128);
    match (sparse, dense) {
        (true, true) if 2 * e <= pairs => ClassTag::Sparse,
        (true, true) => ClassTag::Dense,
        (true, false) => ClassTag::Sparse,
        (false, true) => ClassTag::Dense,
        (false, false) => ClassTag::Untagged,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub classes: Vec<ClassRecord>,
}

impl Certificate {
    /// Certifies each class at the first threshold in `thresholds` that
    /// yields a tag; untagged classes record the first threshold.
    pub fn compute(g: &Graph, p: &Partition, thresholds: &[Rational]) -> Certificate {
        assert!(!thresholds.is_empty());
        let classes = p
            .classes()
            .iter()
            .map(|c| {
                let e = g.edges_within_unchecked(c) as u64;
                let pairs = ratio::pairs(c.len()) as u64;
                let hit = thresholds
                    .iter()
                    .map(|t| (classify(e, pairs, t), *t))
                    .find(|(tag, _)| *tag != ClassTag::Untagged);
                let (tag, threshold) = hit.unwrap_or((ClassTag::Untagged, thresholds[0]));
                ClassRecord {
                    tag,
                    density_num: e,
                    density_den: pairs,
                    threshold,
                }
            })
            .collect();
        Certificate { classes }
    }

    /// Like [`Certificate::compute`] but only accepts the tag `want[i]` for
    /// class `i`.
    pub fn compute_expecting(g: &Graph, p: &Partition, want: &[ClassTag], thresholds: &[Rational]) -> Certificate {
        let mut cert = Certificate::compute(g, p, thresholds);
        for (i, rec) in cert.classes.iter_mut().enumerate() {
            let w = want[i];
            if rec.tag == w {
                continue;
            }
            let hit = thresholds.iter().find(|t| tag_holds(rec.density_num, rec.density_den, t, w));
            match hit {
                Some(t) => {
                    rec.tag = w;
                    rec.threshold = *t;
                }
                None => {
                    rec.tag = ClassTag::Untagged;
                    rec.threshold = thresholds[0];
                }
            }
        }
        cert
    }

    pub fn all_certified(&self) -> bool {
        self.classes.iter().all(|c| c.tag != ClassTag::Untagged)
    }

    pub fn all_at(&self, threshold: &Rational) -> bool {
        self.all_certified() && self.classes.iter().all(|c| c.threshold == *threshold)
    }

    pub fn count(&self, tag: ClassTag) -> usize {
        self.classes.iter().filter(|c| c.tag == tag).count()
    }

    /// Recounts every class from the graph and checks each record, including
    /// that its tag actually holds at its threshold.
    pub fn verify(&self, g: &Graph, p: &Partition) -> bool {
        if self.classes.len() != p.q() {
            return false;
        }
        self.classes.iter().zip(p.classes()).all(|(rec, c)| {
            let e = g.edges_within_unchecked(c) as u64;
            let pairs = ratio::pairs(c.len()) as u64;
            e == rec.density_num
                && pairs == rec.density_den
                && match rec.tag {
                    ClassTag::Untagged => true,
                    tag => tag_holds(e, pairs, &rec.threshold, tag),
                }
        })
    }

    pub fn max_density(&self) -> f64 {
        self.classes.iter().map(ClassRecord::density).fold(f64::NAN, f64::max)
    }

    pub fn min_density(&self) -> f64 {
        self.classes.iter().map(ClassRecord::density).fold(f64::NAN, f64::min)
    }
}

pub(crate) fn tag_holds(e: u64, pairs: u64, t: &Rational, tag: ClassTag) -> bool {
    pairs > 0
        && match tag {
            ClassTag::Sparse => ratio::lt_scaled(e as u128, t, pairs as u128),
            ClassTag::Dense => ratio::lt_scaled((pairs - e) as u128, t, pairs as u128),
            ClassTag::Untagged => false,
        }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let p = Partition::from_classes(5, vec![VertexSet::new([0, 1]), VertexSet::new([2, 3])]).unwrap();
        assert_eq!(p.exceptional().members(), &[4]);
        assert!(p.is_equitable());
        assert_eq!(p.class_size(), Some(2));
        assert!(Partition::from_classes(4, vec![VertexSet::new([0, 1]), VertexSet::new([1, 2])]).is_err());
        assert!(Partition::new(3, vec![VertexSet::new([0, 1])], VertexSet::new([])).is_err());
        assert!(Partition::new(3, vec![VertexSet::new([0, 1])], VertexSet::new([2, 5])).is_err());
        let uneven = Partition::from_classes(5, vec![VertexSet::new([0, 1, 2]), VertexSet::new([3])]).unwrap();
        assert!(!uneven.is_equitable());
    }

    #[test]
    fn index_split_and_lift() {
        let p = Partition::index_split(10, &VertexSet::range(0..10), 3).unwrap();
        assert_eq!(p.q(), 3);
        assert_eq!(p.classes()[1].members(), &[3, 4, 5]);
        assert_eq!(p.exceptional().members(), &[9]);
        assert!(Partition::index_split(3, &VertexSet::range(0..3), 4).is_err());
        let sub = Partition::index_split(4, &VertexSet::range(0..4), 2).unwrap();
        let lifted = sub.lift(8, &VertexSet::new([1, 3, 5, 7])).unwrap();
        assert_eq!(lifted.classes()[0].members(), &[1, 3]);
        assert_eq!(lifted.exceptional().members(), &[0, 2, 4, 6]);
    }

    #[test]
    fn tags() {
        let q = Rational::new(1, 4);
        assert_eq!(classify(0, 3, &q), ClassTag::Sparse);
        assert_eq!(classify(3, 3, &q), ClassTag::Dense);
        assert_eq!(classify(1, 4, &q), ClassTag::Untagged);
        assert_eq!(classify(0, 0, &q), ClassTag::Untagged);
        let big = Rational::new(3, 5);
        assert_eq!(classify(2, 4, &big), ClassTag::Sparse);
        assert_eq!(classify(3, 4, &big), ClassTag::Dense);
    }

    #[test]
    fn certificate_recount() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let p = Partition::from_classes(6, vec![VertexSet::new([0, 1, 2]), VertexSet::new([3, 4, 5])]).unwrap();
        let eps = Rational::new(1, 4);
        let cert = Certificate::compute(&g, &p, &[eps]);
        assert_eq!(cert.classes[0].tag, ClassTag::Dense);
        assert_eq!(cert.classes[1].tag, ClassTag::Sparse);
        assert!(cert.verify(&g, &p));
        let mut forged = cert.clone();
        forged.classes[0].density_num = 2;
        assert!(!forged.verify(&g, &p));
        let mut wrong_tag = cert.clone();
        wrong_tag.classes[0].tag = ClassTag::Sparse;
        assert!(!wrong_tag.verify(&g, &p));
        let want = Certificate::compute_expecting(&g, &p, &[ClassTag::Sparse, ClassTag::Sparse], &[eps]);
        assert_eq!(want.classes[0].tag, ClassTag::Untagged);
    }
}
