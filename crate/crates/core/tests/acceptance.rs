//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Oracles here are brute force and share no
//! code with the library beyond the graph container.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgedist::bipartition::{balanced_cut_search, judicious_bipartition, phi, phi_inequality_check, CutParams};
use edgedist::constants::{feasibility_report, schedule, Magnitude, SulBound, Theorem};
use edgedist::count::{count_cliques, count_induced};
use edgedist::generate::{blow_up, complete_multipartite, cycle, gnp, random_kr_free, turan};
use edgedist::params::{PipelineParams, Status};
use edgedist::partition::ClassTag;
use edgedist::pipeline::{sparse_dense_partition, sparse_equitable_partition, PipelineOutput};
use edgedist::scoop::{min_edge_subset, scoop, ScoopMode, Strategy};
use edgedist::uniformity::{
    check_pair, count_low_common_rsets, count_low_induced_witness_rsets, count_shrinking_rsets, slice_bound,
    UniformityParams, VerdictKind,
};
use edgedist::{Graph, PatternGraph, Rational, VertexSet};

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn big(x: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn br(x: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

fn pow(x: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

fn choose(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Edges inside `set`, by pair enumeration.
fn edges_in(g: &Graph, set: &[usize]) -> usize {
    let mut e = 0;
    for (i, &u) in set.iter().enumerate() {
        for &v in &set[i + 1..] {
            if g.has_edge(u, v) {
                e += 1;
            }
        }
    }
    e
}

fn edges_across(g: &Graph, a: &[usize], b: &[usize]) -> usize {
    a.iter().map(|&u| b.iter().filter(|&&v| g.has_edge(u, v)).count()).sum()
}

/// Every `k`-subset of `items`.
fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, k, 0, &mut cur, &mut out);
    out
}

fn permutations(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(r - 1) {
        for i in 0..r {
            let mut q = p.clone();
            q.insert(i, r - 1);
            out.push(q);
        }
    }
    out
}

// 1. counting

fn criterion_counting() -> Outcome {
    let mut rng = rng(1);
    let mut checked = 0;
    for trial in 0..500u64 {
        let n = rng.gen_range(1..=12);
        let r = rng.gen_range(1..=5usize.min(n));
        let g = gnp(n, rng.gen_range(0.1..0.9), trial);
        let pattern_edges: Vec<(usize, usize)> = (0..r)
            .flat_map(|u| (u + 1..r).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        let h = PatternGraph::new(r, pattern_edges.clone()).map_err(|e| e.to_string())?;
        let perms = permutations(r);
        let all: Vec<usize> = (0..n).collect();
        let mut cliques = 0u64;
        let mut induced = 0u64;
        for s in subsets(&all, r) {
            if edges_in(&g, &s) == r * (r - 1) / 2 {
                cliques += 1;
            }
            let iso = perms.iter().any(|p| {
                (0..r).all(|i| (i + 1..r).all(|j| g.has_edge(s[p[i]], s[p[j]]) == pattern_edges.contains(&(i, j))))
            });
            if iso {
                induced += 1;
            }
        }
        let got_k = count_cliques(&g, r).map_err(|e| e.to_string())?;
        let got_h = count_induced(&g, &h).map_err(|e| e.to_string())?;
        if got_k != cliques || got_h != induced {
            return Err(format!(
                "trial {trial}: n={n} r={r} cliques {got_k} vs {cliques}, induced {got_h} vs {induced}"
            ));
        }
        checked += 1;
    }
    Ok(format!("{checked} graphs, exact"))
}

// 2. scooping

fn criterion_scooping() -> Outcome {
    let mut rng = rng(2);
    let epsilons = [Rational::new(1, 5), Rational::new(3, 10), Rational::new(1, 2)];
    let mut done = 0;
    let mut attempt = 0u64;
    while done < 1000 {
        attempt += 1;
        let n = rng.gen_range(50..=300);
        let eps = epsilons[done % 3];
        let cube = br(&eps) * br(&eps) * br(&eps);
        let p = rng.gen_range(0.0..1.0) * (*eps.numer() as f64 / *eps.denom() as f64).powi(3);
        let g = gnp(n, p, attempt);
        // precondition e ≤ ε³·C(n,2)
        if big(g.m() as u128) > cube.clone() * big(choose(n as u128, 2)) {
            continue;
        }
        let s = (*eps.numer() as usize * n) / (3 * *eps.denom() as usize);
        let out = scoop(&g, &VertexSet::range(0..n), s, &eps, ScoopMode::Sparse, Strategy::ConditionalExpectation)
            .map_err(|e| e.to_string())?;
        let stop = (*eps.numer() as usize * n).div_ceil(*eps.denom() as usize);
        if out.leftover.len() > stop {
            return Err(format!("instance {done}: |V0| = {} > {stop}", out.leftover.len()));
        }
        let covered: usize = out.classes.iter().map(VertexSet::len).sum::<usize>() + out.leftover.len();
        if covered != n {
            return Err(format!("instance {done}: classes do not cover the vertex set"));
        }
        for c in &out.classes {
            let e = edges_in(&g, c.members());
            if c.len() != s || big(e as u128) >= br(&eps) * big(choose(s as u128, 2)) {
                return Err(format!("instance {done}: class of {} with {e} edges at s={s}", c.len()));
            }
        }
        done += 1;
    }
    Ok(format!("{done}/1000 instances ({attempt} generated)"))
}

// 3. conditional expectation bound

fn brute_min_edges(g: &Graph, pool: &[usize], s: usize) -> usize {
    subsets(pool, s).iter().map(|c| edges_in(g, c)).min().unwrap_or(0)
}

fn criterion_peeling_bound() -> Outcome {
    let mut rng = rng(3);
    let mut exact_compared = 0;
    for trial in 0..500u64 {
        let n = rng.gen_range(4..=20);
        let g = gnp(n, rng.gen_range(0.05..0.95), 1000 + trial);
        let pool: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.8)).collect();
        if pool.is_empty() {
            continue;
        }
        let s = rng.gen_range(1..=pool.len());
        let pset = VertexSet::new(pool.iter().copied());
        let pick = min_edge_subset(&g, &pset, s, Strategy::ConditionalExpectation).map_err(|e| e.to_string())?;
        let e = edges_in(&g, pick.members()) as u128;
        let ep = edges_in(&g, &pool) as u128;
        // e·C(|pool|,2) ≤ e(pool)·C(s,2)
        if e * choose(pool.len() as u128, 2) > ep * choose(s as u128, 2) || pick.len() != s || !pick.is_subset(&pset)
        {
            return Err(format!("trial {trial}: {e} edges above the average bound"));
        }
        if choose(pool.len() as u128, s as u128) <= 200_000 {
            let best = brute_min_edges(&g, &pool, s) as u128;
            let lib = min_edge_subset(&g, &pset, s, Strategy::Exact).map_err(|e| e.to_string())?;
            if e < best || edges_in(&g, lib.members()) as u128 != best {
                return Err(format!("trial {trial}: peeling {e} vs optimum {best}"));
            }
            exact_compared += 1;
        }
    }
    Ok(format!("500 instances, {exact_compared} against the exact optimum"))
}

// 4. Φ inequality

/// `min over |U| = k` of `(n−k)e(U) + k·e(V∖U)` for every `k`, by one pass
/// over all vertex masks.
fn phi_oracle(g: &Graph) -> Vec<Rational> {
    let n = g.n();
    let m = g.m() as i64;
    let mut best = vec![i64::MAX; n];
    let edges: Vec<(usize, usize)> = g.edges().collect();
    for mask in 0u32..1 << n {
        let k = mask.count_ones() as usize;
        if k == 0 || k == n {
            continue;
        }
        let mut inside = 0i64;
        let mut outside = 0i64;
        for &(u, v) in &edges {
            match (mask >> u & 1, mask >> v & 1) {
                (1, 1) => inside += 1,
                (0, 0) => outside += 1,
                _ => {}
            }
        }
        let w = (n - k) as i64 * inside + k as i64 * outside;
        best[k] = best[k].min(w);
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                Rational::zero()
            } else {
                Rational::new(best[k], (k * (n - k)) as i64) - Rational::new(m, n as i64)
            }
        })
        .collect()
}

fn inequality_holds(values: &[Rational], n: usize) -> bool {
    let top = values[n / 2];
    (1..=n / 2).all(|k| top <= Rational::new(k as i64, (n - k) as i64) * values[k])
}

fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::from_edges(n, pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p))
        .expect("valid pairs")
}

fn criterion_phi() -> Outcome {
    let mut graphs = 0u64;
    for n in 2..=7usize {
        let pairs = n * (n - 1) / 2;
        for mask in 0u64..1 << pairs {
            let g = graph_from_mask(n, mask);
            let rep = phi_inequality_check(&g).map_err(|e| e.to_string())?;
            if !rep.passes {
                return Err(format!("n={n} mask={mask}: violations at k={:?}", rep.violations));
            }
            let oracle = phi_oracle(&g);
            if !inequality_holds(&oracle, n) || rep.values.iter().any(|v| v.value != oracle[v.k]) {
                return Err(format!("n={n} mask={mask}: Φ disagrees with the oracle"));
            }
            graphs += 1;
        }
    }
    let mut rng = rng(4);
    for trial in 0..500u64 {
        let n = rng.gen_range(2..=16);
        let g = gnp(n, rng.gen_range(0.0..1.0), 5000 + trial);
        let rep = phi_inequality_check(&g).map_err(|e| e.to_string())?;
        let oracle = phi_oracle(&g);
        if !rep.passes || !inequality_holds(&oracle, n) || rep.values.iter().any(|v| v.value != oracle[v.k]) {
            return Err(format!("random trial {trial} (n={n}) fails"));
        }
    }
    for n in 2..=10 {
        let g = Graph::complete(n);
        for k in 1..n {
            let v = phi(&g, k, 0).map_err(|e| e.to_string())?;
            if v.value != Rational::new(-1, 2) || phi_oracle(&g)[k] != Rational::new(-1, 2) {
                return Err(format!("Φ(K_{n},{k}) = {}", v.value));
            }
        }
    }
    Ok(format!("{graphs} labelled graphs n<=7, 500 random n<=16, K_n spot values"))
}

// 5. slicing

/// Whether every sub-pair with `|X| ≥ ⌈ε|A|⌉`, `|Y| ≥ ⌈ε|B|⌉` has density
/// within ε of `d(A,B)`, by full enumeration.
fn uniform_by_enumeration(g: &Graph, a: &[usize], b: &[usize], eps: &Rational) -> bool {
    uniform_enum(g, a, b, eps, false)
}

/// As above; `strict` also rejects a deviation of exactly ε.
fn uniform_enum(g: &Graph, a: &[usize], b: &[usize], eps: &Rational, strict: bool) -> bool {
    let kx = ceil_mul(eps, a.len()).max(1);
    let ky = ceil_mul(eps, b.len()).max(1);
    let dab = BigRational::new(
        BigInt::from(edges_across(g, a, b)),
        BigInt::from(a.len() * b.len()),
    );
    let e = br(eps);
    // column masks: for each y in B, which x in A are adjacent
    let cols: Vec<u32> = b
        .iter()
        .map(|&y| a.iter().enumerate().filter(|&(_, &x)| g.has_edge(x, y)).fold(0, |m, (i, _)| m | 1 << i))
        .collect();
    for xm in 1u32..1 << a.len() {
        let xs = xm.count_ones() as usize;
        if xs < kx {
            continue;
        }
        for ym in 1u32..1 << b.len() {
            let ys = ym.count_ones() as usize;
            if ys < ky {
                continue;
            }
            let exy: u32 = (0..b.len()).filter(|&j| ym >> j & 1 == 1).map(|j| (cols[j] & xm).count_ones()).sum();
            let d = BigRational::new(BigInt::from(exy), BigInt::from(xs * ys));
            let dev = if d > dab { &d - &dab } else { &dab - &d };
            if dev > e || (strict && dev == e) {
                return false;
            }
        }
    }
    true
}

fn ceil_mul(x: &Rational, n: usize) -> usize {
    let num = *x.numer() as i128 * n as i128;
    let den = *x.denom() as i128;
    ((num + den - 1) / den) as usize
}

fn criterion_slicing() -> Outcome {
    let mut rng = rng(5);
    let alphas = [Rational::new(3, 10), Rational::new(1, 2)];
    let mut pairs = 0;
    let mut subpairs = 0u64;
    let mut attempt = 0u64;
    while pairs < 100 {
        attempt += 1;
        if attempt > 200_000 {
            return Err(format!("only {pairs} uniform pairs found"));
        }
        let alpha = alphas[pairs % 2];
        let sa = rng.gen_range(3..=7);
        let sb = rng.gen_range(3..=7);
        let n = sa + sb;
        let eps = alpha * Rational::new(rng.gen_range(5..=9), 10);
        let p = match rng.gen_range(0..4) {
            0 => 1.0,
            1 => 0.0,
            _ => rng.gen_range(0.2..0.8),
        };
        let g = gnp(n, p, 9000 + attempt);
        let a: Vec<usize> = (0..sa).collect();
        let b: Vec<usize> = (sa..n).collect();
        let up = UniformityParams::new(eps).map_err(|e| e.to_string())?;
        let verdict = check_pair(&g, &VertexSet::new(a.clone()), &VertexSet::new(b.clone()), &up)
            .map_err(|e| e.to_string())?;
        let uniform = uniform_by_enumeration(&g, &a, &b, &eps);
        if (verdict.kind == VerdictKind::ExactPass) != uniform {
            return Err(format!("attempt {attempt}: check_pair {:?} vs enumeration {uniform}", verdict.kind));
        }
        if !uniform {
            continue;
        }
        let eps2 = slice_bound(&eps, &alpha).map_err(|e| e.to_string())?;
        let expect = if eps / alpha > eps * 2 { eps / alpha } else { eps * 2 };
        if eps2 != expect {
            return Err(format!("slice bound {eps2} != {expect}"));
        }
        let min_x = ceil_mul(&alpha, sa);
        let min_y = ceil_mul(&alpha, sb);
        for kx in min_x..=sa {
            for x in subsets(&a, kx) {
                for ky in min_y..=sb {
                    for y in subsets(&b, ky) {
                        subpairs += 1;
                        if eps2 < Rational::one() && !uniform_by_enumeration(&g, &x, &y, &eps2) {
                            return Err(format!("attempt {attempt}: sub-pair {x:?} {y:?} fails at {eps2}"));
                        }
                    }
                }
            }
        }
        pairs += 1;
    }
    Ok(format!("{pairs} pairs, {subpairs} sub-pairs"))
}

// 6. r-set ceilings

#[derive(Clone, Copy, Debug)]
enum Counter {
    Shrinking,
    LowCommon,
    LowInduced,
}

fn common(g: &Graph, rset: &[usize], within: &[usize], flip: u32) -> usize {
    within
        .iter()
        .filter(|&&y| {
            rset.iter()
                .enumerate()
                .all(|(i, &u)| g.has_edge(u, y) != (flip >> i & 1 == 1))
        })
        .count()
}

fn criterion_rsets() -> Outcome {
    let mut rng = rng(6);
    let mut accepted = [0usize; 3];
    let mut attempt = 0u64;
    let mut excess = Vec::new();
    while accepted.iter().sum::<usize>() < 200 {
        attempt += 1;
        if attempt > 500_000 {
            return Err(format!("only {accepted:?} qualifying pairs"));
        }
        let kind = match attempt % 3 {
            0 => Counter::Shrinking,
            1 => Counter::LowCommon,
            _ => Counter::LowInduced,
        };
        let sa = rng.gen_range(3..=12);
        let sb = rng.gen_range(3..=12);
        let r = rng.gen_range(1..=3usize.min(sa));
        let eps = Rational::new(rng.gen_range(1..=9), 20);
        let n = sa + sb;
        let p = rng.gen_range(0.3..1.0);
        let g = gnp(n, p, 20_000 + attempt);
        let a: Vec<usize> = (0..sa).collect();
        let b: Vec<usize> = (sa..n).collect();
        let (av, bv) = (VertexSet::new(a.clone()), VertexSet::new(b.clone()));
        let d = BigRational::new(BigInt::from(edges_across(&g, &a, &b)), BigInt::from(sa * sb));
        let e = br(&eps);
        let two_r = big(1 << r);
        let above = |x: &BigRational| x > &BigRational::zero() && pow(x, r) > &two_r * &e;
        let (y, precondition) = match kind {
            Counter::Shrinking => {
                let ky = rng.gen_range(1..=sb);
                let y: Vec<usize> = b[..ky].to_vec();
                let base = &d - &e;
                let pre = base > BigRational::zero() && pow(&base, r - 1) * big(ky as u128) > &e * big(sb as u128);
                (y, pre)
            }
            Counter::LowCommon => (b.clone(), above(&d)),
            Counter::LowInduced => (b.clone(), above(&d) && above(&(BigRational::one() - &d))),
        };
        if !precondition {
            continue;
        }
        let up = UniformityParams::new(eps).map_err(|e| e.to_string())?;
        if check_pair(&g, &av, &bv, &up).map_err(|e| e.to_string())?.kind != VerdictKind::ExactPass {
            continue;
        }
        // oracle count
        let mut count = 0u128;
        for rset in subsets(&a, r) {
            let hit = match kind {
                Counter::Shrinking => {
                    let base = &d - &e;
                    big(common(&g, &rset, &y, 0) as u128) <= pow(&base, r) * big(y.len() as u128)
                }
                Counter::LowCommon => big(common(&g, &rset, &b, 0) as u128) <= &e * big(sb as u128),
                Counter::LowInduced => {
                    (0u32..1 << r).any(|f| big(common(&g, &rset, &b, f) as u128) <= &e * big(sb as u128))
                }
            };
            if hit {
                count += 1;
            }
        }
        let factor = match kind {
            Counter::LowInduced => big(1 << r),
            _ => big(r as u128),
        };
        let ceiling = &e * factor * pow(&big(sa as u128), r);
        let over = big(count) > ceiling;
        if over {
            excess.push(format!(
                "{kind:?} count {count} > {ceiling} at |A|={sa} |B|={sb} |Y|={} r={r} ε={eps} d={d}, strictly uniform: {}",
                y.len(),
                uniform_enum(&g, &a, &b, &eps, true)
            ));
        }
        let yv = VertexSet::new(y.clone());
        let lib = match kind {
            Counter::Shrinking => count_shrinking_rsets(&g, &av, &bv, &yv, r, &eps),
            Counter::LowCommon => count_low_common_rsets(&g, &av, &bv, &eps, r),
            Counter::LowInduced => count_low_induced_witness_rsets(&g, &av, &bv, &eps, r),
        }
        .map_err(|e| e.to_string())?;
        if lib.count as u128 != count || !lib.precondition || lib.within_ceiling == over {
            return Err(format!("attempt {attempt}: {kind:?} library count {} vs oracle {count}", lib.count));
        }
        accepted[kind as usize] += 1;
    }
    let summary = format!(
        "shrinking {}, low-common {}, low-induced {}",
        accepted[0], accepted[1], accepted[2]
    );
    if excess.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {} above the ceiling: {}", excess.len(), excess.join(" | ")))
    }
}

// 7. pipelines

fn recount(g: &Graph, out: &PipelineOutput, eps: &Rational) -> Result<(), String> {
    let part = &out.partition;
    let mut seen = vec![0u8; g.n()];
    for v in part.classes().iter().flat_map(|c| c.iter()).chain(part.exceptional().iter()) {
        seen[v] += 1;
    }
    if seen.iter().any(|&c| c != 1) {
        return Err("classes and V0 do not partition the vertex set".into());
    }
    if part.exceptional().len() >= part.q() {
        return Err(format!("|V0| = {} not below q = {}", part.exceptional().len(), part.q()));
    }
    for (c, rec) in part.classes().iter().zip(&out.certificate.classes) {
        let e = edges_in(g, c.members()) as u64;
        let pairs = choose(c.len() as u128, 2) as u64;
        if rec.density_num != e || rec.density_den != pairs || rec.threshold != *eps {
            return Err(format!("certificate record {rec:?} does not match recount {e}/{pairs}"));
        }
        let ok = match rec.tag {
            ClassTag::Sparse => big(e as u128) < br(eps) * big(pairs as u128),
            ClassTag::Dense => big((pairs - e) as u128) < br(eps) * big(pairs as u128),
            ClassTag::Untagged => false,
        };
        if !ok {
            return Err(format!("class tagged {} fails its recount", rec.tag));
        }
    }
    if !out.verify(g) {
        return Err("library verification disagrees".into());
    }
    Ok(())
}

fn criterion_pipelines() -> Outcome {
    let eps = Rational::new(1, 4);
    let g = complete_multipartite(&[64, 64]).map_err(|e| e.to_string())?;
    let p = PipelineParams {
        epsilon: eps,
        delta: eps,
        r: 3,
        ..PipelineParams::default()
    };
    let out = sparse_equitable_partition(&g, &p).map_err(|e| e.to_string())?;
    if out.status != Status::Complete {
        return Err(format!("bipartite run incomplete: {:?}", out.reasons));
    }
    recount(&g, &out, &eps)?;
    let q1 = out.partition.q();
    let base = cycle(5);
    let g = blow_up(&base, 20);
    let p = PipelineParams { l: 5, ..p };
    let k3 = PatternGraph::complete(3).map_err(|e| e.to_string())?;
    let out = sparse_dense_partition(&g, &k3, &p).map_err(|e| e.to_string())?;
    if out.status != Status::Complete {
        return Err(format!("blow-up run incomplete: {:?}", out.reasons));
    }
    recount(&g, &out, &eps)?;
    Ok(format!(
        "K64,64: q={q1}; C5 blow-up: q={} |V0|={}",
        out.partition.q(),
        out.partition.exceptional().len()
    ))
}

// 8. judicious bipartition

fn criterion_judicious() -> Outcome {
    let eps = Rational::new(1, 4);
    let mut parts = Vec::new();
    for (name, g) in [
        ("K64,64", complete_multipartite(&[64, 64]).map_err(|e| e.to_string())?),
        ("T(128,2)", turan(128, 2).map_err(|e| e.to_string())?),
    ] {
        let out = judicious_bipartition(&g, 3, &eps, &PipelineParams::default()).map_err(|e| e.to_string())?;
        let n = g.n() as u128;
        let m = g.m() as u128;
        let v1 = out.v1.members();
        let v2 = out.v2.members();
        if v1.len() + v2.len() != g.n() || !out.v1.is_disjoint(&out.v2) || v1.is_empty() {
            return Err(format!("{name}: V1, V2 do not split the vertex set"));
        }
        let e1 = edges_in(&g, v1) as u128;
        let e2 = edges_in(&g, v2) as u128;
        let t1 = v1.len() as u128;
        let t2 = v2.len() as u128;
        if e1 != out.e1 as u128 || e2 != out.e2 as u128 {
            return Err(format!("{name}: reported edge counts differ from the recount"));
        }
        if big(e1) >= br(&eps) * big(t1 * t1) {
            return Err(format!("{name}: e(V1) = {e1} not below ε|V1|²"));
        }
        if e2 * n * n >= m * t2 * t2 {
            return Err(format!("{name}: e(V2)/|V2|² not below m/n²"));
        }
        parts.push(format!("{name}: |V1|={} e(V2)/|V2|²={:.4}", t1, e2 as f64 / (t2 * t2) as f64));
    }
    Ok(parts.join("; "))
}

// 9. balanced cut

fn exhaustive_balanced_cut(g: &Graph) -> usize {
    let n = g.n();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let mut best = 0;
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != n / 2 {
            continue;
        }
        let cut = edges.iter().filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1)).count();
        best = best.max(cut);
    }
    best
}

fn criterion_balanced_cut() -> Outcome {
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let g = random_kr_free(20, 3, 0.5, seed);
        if count_cliques(&g, 3).map_err(|e| e.to_string())? != 0 {
            return Err(format!("seed {seed}: instance has a triangle"));
        }
        let best = exhaustive_balanced_cut(&g);
        let found = balanced_cut_search(&g, &CutParams { seed, ..CutParams::default() }).map_err(|e| e.to_string())?;
        let cut = edges_across(&g, found.v1.members(), found.v2.members());
        if found.v1.len() != 10 || found.v2.len() != 10 || cut != found.cut {
            return Err(format!("seed {seed}: reported cut is not balanced or miscounted"));
        }
        if cut != best {
            return Err(format!("seed {seed}: search found {cut}, optimum {best}"));
        }
        if 2 * best <= g.m() {
            return Err(format!("seed {seed}: optimum ratio {best}/{} not above 1/2", g.m()));
        }
        ratios.push(best as f64 / g.m() as f64);
    }
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(format!("10 instances, min optimum ratio {min:.3}"))
}

// 10. constants

fn criterion_constants() -> Outcome {
    let sul = SulBound::default();
    let mut rng = rng(10);
    for _ in 0..20 {
        let den = rng.gen_range(2..=1000i64);
        let eps = Rational::new(rng.gen_range(1..den), den);
        let s = schedule(Theorem::Maint, &eps, 2, None, &sul).map_err(|e| e.to_string())?;
        if *s.value("xi") != Magnitude::from_rational(&eps) || *s.value("L") != Magnitude::one() {
            return Err(format!("ε = {eps}: ξ or L differs at r = 2"));
        }
        let s3 = schedule(Theorem::Maint, &eps, 3, None, &sul).map_err(|e| e.to_string())?;
        let delta = s3.value("delta");
        let cap = Magnitude::from_rational(&eps).pow(15).div(&Magnitude::from_int(4096));
        if !delta.is_positive() || *delta > cap || !s3.value("xi").is_positive() {
            return Err(format!("ε = {eps}: r = 3 δ = {delta} violates 0 < δ ≤ ε^15/4096"));
        }
        for key in ["l", "M", "L_next", "xi_next"] {
            if !s3.value(key).is_positive() {
                return Err(format!("ε = {eps}: {key} not positive"));
            }
        }
    }
    let eps = Rational::new(1, 10);
    let rep = feasibility_report(Theorem::Maint, &eps, 3, 1_000_000, None, &sul).map_err(|e| e.to_string())?;
    if rep.feasible {
        return Err("r = 3 at n = 10^6 reported feasible".into());
    }
    Ok(format!("20 values of ε; r=3 at n=10^6: threshold {}", rep.threshold))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("counting oracle", criterion_counting, Duration::from_secs(60)),
        ("scooping", criterion_scooping, Duration::from_secs(120)),
        ("peeling average bound", criterion_peeling_bound, Duration::from_secs(60)),
        ("phi inequality", criterion_phi, Duration::from_secs(300)),
        ("slicing bound", criterion_slicing, Duration::from_secs(300)),
        ("r-set ceilings", criterion_rsets, Duration::from_secs(300)),
        ("pipelines end to end", criterion_pipelines, Duration::from_secs(120)),
        ("judicious bipartition", criterion_judicious, Duration::from_secs(60)),
        ("balanced cut", criterion_balanced_cut, Duration::from_secs(300)),
        ("constants schedule", criterion_constants, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let result = match result {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {took:.1?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {:>2} {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
