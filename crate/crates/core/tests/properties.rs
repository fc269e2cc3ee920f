use proptest::prelude::*;

use edgedist::generate::{gnp, planted_blocks};
use edgedist::params::{PipelineParams, Status};
use edgedist::partition::{Certificate, ClassTag, Partition};
use edgedist::pipeline::{
    ramsey_group_clusters, refine_mixed_partition, ClusterColoring, PairColor, PartitionRecord,
};
use edgedist::regularize::uniform_partition;
use edgedist::scoop::{scoop, ScoopMode, Strategy};
use edgedist::{Graph, Rational, VertexSet};

fn pairs(n: usize) -> u64 {
    (n * n.saturating_sub(1) / 2) as u64
}

fn edges_in(g: &Graph, c: &VertexSet) -> u64 {
    let m = c.members();
    let mut e = 0;
    for (i, &u) in m.iter().enumerate() {
        for &v in &m[i + 1..] {
            e += g.has_edge(u, v) as u64;
        }
    }
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scoop_output_is_a_valid_partition(n in 10usize..80, p in 0.0f64..0.2, seed in 0u64..1000, den in 2i64..6) {
        let g = gnp(n, p, seed);
        let eps = Rational::new(1, den);
        let s = (n / den as usize).max(1);
        let res = scoop(&g, &VertexSet::range(0..n), s, &eps, ScoopMode::Sparse, Strategy::ConditionalExpectation)
            .unwrap();
        let part = res.partition(n).unwrap();
        prop_assert!(part.validate().is_ok());
        prop_assert!(res.classes.iter().all(|c| c.len() == s));
        prop_assert!(res.leftover.len() <= (n + den as usize - 1) / den as usize);
        prop_assert!(res.certificate.verify(&g, &part));
        for (c, rec) in res.classes.iter().zip(&res.certificate.classes) {
            prop_assert_eq!(rec.density_num, edges_in(&g, c));
            prop_assert_eq!(rec.density_den, pairs(c.len()));
        }
        prop_assert_eq!(Certificate::compute(&g, &part, &[eps]), res.certificate.clone());
    }

    #[test]
    fn dense_scoop_is_sparse_scoop_of_the_complement(n in 10usize..60, p in 0.8f64..1.0, seed in 0u64..1000) {
        let g = gnp(n, p, seed);
        let eps = Rational::new(1, 3);
        let s = n / 4;
        prop_assume!(s >= 1);
        let all = VertexSet::range(0..n);
        let dense = scoop(&g, &all, s, &eps, ScoopMode::Dense, Strategy::ConditionalExpectation).unwrap();
        let sparse = scoop(&g.complement(), &all, s, &eps, ScoopMode::Sparse, Strategy::ConditionalExpectation)
            .unwrap();
        prop_assert_eq!(&dense.classes, &sparse.classes);
        prop_assert_eq!(&dense.leftover, &sparse.leftover);
        prop_assert_eq!(dense.precondition, sparse.precondition);
        for (d, s) in dense.certificate.classes.iter().zip(&sparse.certificate.classes) {
            prop_assert_eq!(d.density_num + s.density_num, d.density_den);
            prop_assert_eq!(s.tag == ClassTag::Sparse, d.tag == ClassTag::Dense);
        }
    }

    #[test]
    fn ramsey_groups_are_monochromatic_and_disjoint(
        g in 2usize..14,
        b in 2usize..7,
        seed in 0u64..1000,
        colors in proptest::collection::vec(0u8..3, 91),
    ) {
        let mut c = ClusterColoring::new(g);
        let mut k = 0;
        for i in 0..g {
            for j in i + 1..g {
                c.set(i, j, [PairColor::Red, PairColor::Blue, PairColor::Green][colors[k] as usize]);
                k += 1;
            }
        }
        let out = ramsey_group_clusters(&c, b, seed).unwrap();
        let mut seen = vec![false; g];
        for grp in &out.groups {
            prop_assert_eq!(grp.members.len(), b);
            prop_assert!(grp.color != PairColor::Green);
            for (x, &i) in grp.members.iter().enumerate() {
                prop_assert!(!seen[i]);
                seen[i] = true;
                for &j in &grp.members[x + 1..] {
                    prop_assert_eq!(c.get(i, j), grp.color);
                }
            }
        }
        for &i in &out.leftover {
            prop_assert!(!seen[i]);
            seen[i] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
        if b <= 4 {
            // exact search leaves no monochromatic b-clique behind
            let left = &out.leftover;
            let mono = |color: PairColor| {
                let mut idx: Vec<usize> = (0..b).collect();
                if left.len() < b {
                    return false;
                }
                loop {
                    let ok = (0..b).all(|x| (x + 1..b).all(|y| c.get(left[idx[x]], left[idx[y]]) == color));
                    if ok {
                        return true;
                    }
                    let mut i = b;
                    while i > 0 && idx[i - 1] == left.len() - b + i - 1 {
                        i -= 1;
                    }
                    if i == 0 {
                        return false;
                    }
                    idx[i - 1] += 1;
                    for j in i..b {
                        idx[j] = idx[j - 1] + 1;
                    }
                }
            };
            prop_assert!(!mono(PairColor::Red) && !mono(PairColor::Blue));
        }
    }

    #[test]
    fn refinement_index_never_drops(n in 40usize..100, seed in 0u64..500) {
        let g = gnp(n, 0.5, seed);
        let p = PipelineParams {
            epsilon: Rational::new(1, 4),
            delta: Rational::new(1, 4),
            l: 2,
            max_k: 12,
            max_iterations: 6,
            ..PipelineParams::default()
        };
        let out = uniform_partition(&g, &p).unwrap();
        for w in out.trace.windows(2) {
            let a: num_rational::BigRational = w[0].index.parse().unwrap();
            let b: num_rational::BigRational = w[1].index.parse().unwrap();
            prop_assert!(b >= a);
        }
        prop_assert!(out.partition.validate().is_ok());
        prop_assert_eq!(out.status == Status::Complete, out.report.passes);
    }
}

/// Blocks that are cliques or independent sets, with random densities
/// across them.
fn block_instance(seed: u64) -> (Graph, Partition) {
    let k = 3 + (seed % 3) as usize;
    let size = 12 + (seed % 5) as usize;
    let mut densities = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            densities[i][j] = if i == j {
                ((seed >> i) & 1) as f64
            } else {
                let x = (i.min(j) * 7 + i.max(j) * 3 + seed as usize) % 5;
                x as f64 / 4.0
            };
        }
    }
    let g = planted_blocks(&vec![size; k], &densities, seed).unwrap();
    let classes = (0..k).map(|i| VertexSet::range(i * size..(i + 1) * size)).collect();
    (g, Partition::from_classes(k * size, classes).unwrap())
}

#[test]
fn refinement_of_random_valid_inputs() {
    for seed in 0..25 {
        let (g, part) = block_instance(seed);
        let p = PipelineParams {
            epsilon: Rational::new(1, 4),
            delta: Rational::new(1, 4),
            seed,
            ..PipelineParams::default()
        };
        let out = refine_mixed_partition(&g, &part, &p).unwrap();
        assert!(out.verify(&g), "seed {seed}");
        assert!(out.partition.validate().is_ok());
        assert!(out.certificate.all_certified(), "seed {seed}: {:?}", out.reasons);
        assert!(
            !out.reasons.iter().any(|r| matches!(r, edgedist::params::IncompleteReason::CliqueConditionViolated { .. })),
            "seed {seed}"
        );
        // every refined class sits inside one input class
        for c in out.partition.classes() {
            let owner = part.classes().iter().position(|b| b.contains(c.members()[0])).unwrap();
            assert!(c.is_subset(&part.classes()[owner]), "seed {seed}");
        }
    }
}

#[test]
fn partition_record_survives_json() {
    let (g, part) = block_instance(4);
    let p = PipelineParams {
        epsilon: Rational::new(1, 4),
        delta: Rational::new(1, 4),
        ..PipelineParams::default()
    };
    let out = refine_mixed_partition(&g, &part, &p).unwrap();
    let rec = PartitionRecord::from_json(&out.to_json().unwrap()).unwrap();
    assert_eq!(rec, out.record());
    assert_eq!(rec.partition().unwrap(), out.partition);
    assert!(rec.verify(&g).unwrap());
}
