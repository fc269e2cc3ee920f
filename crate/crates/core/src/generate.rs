//! Deterministic graph generators for experiments and tests.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::count::cliques_unchecked;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Erdős–Rényi `G(n, p)`.
    Gnp { n: usize, p: f64 },
    CompleteMultipartite { parts: Vec<usize> },
    /// Blocks of the given sizes; pairs inside block `i` are edges with
    /// probability `densities[i][i]`, pairs across `i`,`j` with
    /// `densities[i][j]`.
    PlantedBlocks {
        sizes: Vec<usize>,
        densities: Vec<Vec<f64>>,
    },
    /// Turán graph `T(n, parts)`: complete `parts`-partite with part sizes
    /// as equal as possible.
    TuranGraph { n: usize, parts: usize },
    /// Every vertex of the base graph becomes an independent set of `size`
    /// vertices; edges become complete bipartite joins.
    BlowUp {
        base_n: usize,
        base_edges: Vec<(usize, usize)>,
        size: usize,
    },
    /// Random greedy `K_r`-free process: pairs are visited in random order,
    /// each offered with probability `p`, and kept when no `K_r` appears.
    RandomKrFree { n: usize, r: usize, p: f64 },
    FromFile { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, seed: u64) -> Self {
        GeneratorSpec { kind, seed }
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param("p", format!("{p} not in [0,1]")))
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Graph> {
    match &spec.kind {
        GeneratorKind::Gnp { n, p } => {
            check_p(*p)?;
            Ok(gnp(*n, *p, spec.seed))
        }
        GeneratorKind::CompleteMultipartite { parts } => complete_multipartite(parts),
        GeneratorKind::PlantedBlocks { sizes, densities } => planted_blocks(sizes, densities, spec.seed),
        GeneratorKind::TuranGraph { n, parts } => turan(*n, *parts),
        GeneratorKind::BlowUp {
            base_n,
            base_edges,
            size,
        } => {
            let base = Graph::from_edges(*base_n, base_edges.iter().copied())?;
            Ok(blow_up(&base, *size))
        }
        GeneratorKind::RandomKrFree { n, r, p } => {
            check_p(*p)?;
            if *r < 2 {
                return Err(Error::param("r", "must be at least 2"));
            }
            Ok(random_kr_free(*n, *r, *p, spec.seed))
        }
        GeneratorKind::FromFile { path } => Ok(crate::io::load_edge_list(path)?.0),
    }
}

pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("generated pairs are valid")
}

pub fn complete_multipartite(parts: &[usize]) -> Result<Graph> {
    let n: usize = parts.iter().sum();
    let mut label = Vec::with_capacity(n);
    for (i, &size) in parts.iter().enumerate() {
        label.extend(std::iter::repeat_n(i, size));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if label[u] != label[v] {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

pub fn turan(n: usize, parts: usize) -> Result<Graph> {
    if parts == 0 {
        return Err(Error::param("parts", "must be positive"));
    }
    let sizes: Vec<usize> = (0..parts).map(|i| n / parts + usize::from(i < n % parts)).collect();
    complete_multipartite(&sizes)
}

pub fn planted_blocks(sizes: &[usize], densities: &[Vec<f64>], seed: u64) -> Result<Graph> {
    let k = sizes.len();
    if densities.len() != k || densities.iter().any(|row| row.len() != k) {
        return Err(Error::param("densities", "must be a square matrix matching sizes"));
    }
    for row in densities {
        for &p in row {
            check_p(p)?;
        }
    }
    let n: usize = sizes.iter().sum();
    let mut label = Vec::with_capacity(n);
    for (i, &size) in sizes.iter().enumerate() {
        label.extend(std::iter::repeat_n(i, size));
    }
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let (a, b) = (label[u].min(label[v]), label[u].max(label[v]));
            let p = densities[a][b];
            if p >= 1.0 || (p > 0.0 && rng.gen_bool(p)) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Replaces vertex `i` of `base` by the independent set
/// `{i*size, ..., i*size + size - 1}`.
pub fn blow_up(base: &Graph, size: usize) -> Graph {
    let mut edges = Vec::new();
    for (a, b) in base.edges() {
        for x in 0..size {
            for y in 0..size {
                edges.push((a * size + x, b * size + y));
            }
        }
    }
    Graph::from_edges(base.n() * size, edges).expect("blow-up pairs are valid")
}

pub fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle pairs are valid")
}

pub fn random_kr_free(n: usize, r: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(&mut rng);
    let mut g = Graph::empty(n);
    for (u, v) in pairs {
        if p < 1.0 && !rng.gen_bool(p) {
            continue;
        }
        // adding uv creates a K_r iff N(u) ∩ N(v) holds a K_{r-2}
        let common = VertexSet::from_sorted(g.neighbors(u).filter(|&w| g.has_edge(v, w)).collect());
        let creates = if r == 2 {
            true
        } else if common.len() < r - 2 {
            false
        } else {
            let sub = g.induced(&common).expect("members are in range");
            cliques_unchecked(&sub, r - 2) > 0
        };
        if !creates {
            g.insert(u, v);
        }
    }
    g
}
