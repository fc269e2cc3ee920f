//! Named experiment scenarios.
//!
//! Every run records the generator spec of its input and a serialized
//! artifact (a partition record, a cut side, ...). Metrics and pass/fail
//! checks are computed from `(graph, artifact)` only, so [`revalidate`] can
//! rebuild the graph from the spec and reproduce every flag.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use edgedist::bipartition::{balanced_cut_search, judicious_bipartition, phi_inequality_check, CutParams};
use edgedist::generate::{generate, GeneratorKind, GeneratorSpec};
use edgedist::params::{PipelineParams, Status};
use edgedist::partition::{ClassTag, Certificate};
use edgedist::pipeline::{sparse_dense_partition, sparse_equitable_partition, PartitionRecord};
use edgedist::ratio::{self, Rational};
use edgedist::scoop::{scoop, ScoopMode, Strategy};
use edgedist::{Graph, PatternGraph, VertexSet};

use crate::error::{HarnessError, Result};

pub const SCENARIOS: &[&str] = &["scoop-random", "phi-exhaustive", "ers1", "ers1-com", "maint", "ers2"];

/// Scenario knobs; anything unset takes the scenario's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of seeded runs.
    pub runs: Option<usize>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    /// Rationals such as `"1/4"`, cycled over the runs.
    pub epsilons: Option<Vec<String>>,
    pub r: Option<usize>,
    pub p: Option<f64>,
    /// Required margin `β` for the cut scenarios, as a rational.
    pub beta_min: Option<String>,
    pub restarts: Option<usize>,
    /// Replaces the generated inputs of the `ers1` scenarios.
    pub inputs: Option<Vec<GeneratorSpec>>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn epsilons(&self, default: &[&str]) -> Result<Vec<Rational>> {
        let list: Vec<String> = match &self.epsilons {
            Some(v) if !v.is_empty() => v.clone(),
            Some(_) => return Err(HarnessError::invalid("epsilons must not be empty")),
            None => default.iter().map(|s| s.to_string()).collect(),
        };
        list.iter().map(|s| Ok(ratio::parse_rational(s)?)).collect()
    }

    fn beta(&self) -> Result<Rational> {
        match &self.beta_min {
            Some(s) => Ok(ratio::parse_rational(s)?),
            None => Ok(Rational::new(0, 1)),
        }
    }
}

/// One CSV line. Columns are fixed for comparison across runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scenario: String,
    pub seed: u64,
    pub n: usize,
    pub q: Option<usize>,
    pub v0: Option<usize>,
    pub max_class_density: Option<f64>,
    pub min_class_density: Option<f64>,
    pub bad_pairs: Option<usize>,
    pub cut_ratio: Option<f64>,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Artifact {
    Partition {
        record: PartitionRecord,
        epsilon: String,
    },
    /// One side of a bipartition; the other side is the rest of `0..n`.
    Cut { v1: Vec<usize> },
    Judicious { v1: Vec<usize>, epsilon: String },
    /// Exhaustive Φ check over every labelled graph on `n` vertices.
    PhiSweep { n: usize, graphs: u64, violations: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub metrics: Row,
    pub input: Option<GeneratorSpec>,
    /// The run used the complement of the generated graph.
    #[serde(default)]
    pub complement: bool,
    pub artifact: Artifact,
    pub checks: Vec<Check>,
}

impl Run {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub runs: Vec<Run>,
    pub passed: bool,
    /// `"seed: check"` for every failed check.
    pub failures: Vec<String>,
}

impl ExperimentReport {
    fn new(scenario: &str, seed: u64, config: ScenarioConfig, mut runs: Vec<Run>) -> Self {
        runs.sort_by_key(|r| r.metrics.seed);
        let failures: Vec<String> = runs
            .iter()
            .flat_map(|r| {
                r.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(move |c| format!("{}: {}", r.metrics.seed, c.name))
            })
            .collect();
        ExperimentReport {
            scenario: scenario.to_string(),
            seed,
            config,
            passed: failures.is_empty(),
            failures,
            runs,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for run in &self.runs {
            w.serialize(&run.metrics)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn run_scenario(name: &str, config: &ScenarioConfig, seed: u64) -> Result<ExperimentReport> {
    let runs = match name {
        "scoop-random" => scoop_random(config, seed)?,
        "phi-exhaustive" => phi_exhaustive(config, seed)?,
        "ers1" => cut_runs(name, config, seed, false)?,
        "ers1-com" => cut_runs(name, config, seed, true)?,
        "maint" => maint_runs(config, seed)?,
        "ers2" => ers2_runs(config, seed)?,
        _ => return Err(HarnessError::UnknownScenario(name.to_string())),
    };
    Ok(ExperimentReport::new(name, seed, config.clone(), runs))
}

/// Rebuilds every input and recomputes metrics and checks. Returns one line
/// per disagreement with the stored report; empty when it reproduces.
pub fn revalidate(report: &ExperimentReport) -> Result<Vec<String>> {
    let mut diffs = Vec::new();
    for run in &report.runs {
        let g = match &run.input {
            Some(spec) => {
                let g = generate(spec)?;
                if run.complement {
                    g.complement()
                } else {
                    g
                }
            }
            None => Graph::empty(run.metrics.n),
        };
        let (mut metrics, checks) = evaluate(&report.scenario, &report.config, &g, &run.artifact)?;
        metrics.scenario = run.metrics.scenario.clone();
        metrics.seed = run.metrics.seed;
        metrics.runtime_ms = run.metrics.runtime_ms;
        if metrics != run.metrics {
            diffs.push(format!("{}: metrics differ", run.metrics.seed));
        }
        if checks != run.checks {
            diffs.push(format!("{}: checks differ", run.metrics.seed));
        }
    }
    let rebuilt = ExperimentReport::new(&report.scenario, report.seed, report.config.clone(), report.runs.clone());
    if rebuilt.passed != report.passed || rebuilt.failures != report.failures {
        diffs.push("overall verdict differs".into());
    }
    Ok(diffs)
}

fn check(name: &str, passed: bool) -> Check {
    Check {
        name: name.to_string(),
        passed,
    }
}

fn density(e: usize, size: usize) -> f64 {
    let pairs = ratio::pairs(size);
    if pairs == 0 {
        0.0
    } else {
        e as f64 / pairs as f64
    }
}

fn complement_of(n: usize, v1: &[usize]) -> VertexSet {
    let side = VertexSet::new(v1.iter().copied());
    VertexSet::range(0..n).difference(&side)
}

fn scaled_lt(lhs: u128, rhs_factor: &Rational, rhs: u128) -> bool {
    ratio::lt_scaled(lhs, rhs_factor, rhs)
}

/// Metrics and checks of one artifact on its graph.
fn evaluate(scenario: &str, config: &ScenarioConfig, g: &Graph, artifact: &Artifact) -> Result<(Row, Vec<Check>)> {
    let n = g.n();
    let mut row = Row {
        scenario: scenario.to_string(),
        n,
        ..Row::default()
    };
    let mut checks = Vec::new();
    match artifact {
        Artifact::Partition { record, epsilon } => {
            let eps = ratio::parse_rational(epsilon)?;
            let part = record.partition();
            checks.push(check("partition_valid", part.is_ok() && record.n == n));
            checks.push(check("certificate_recount", record.verify(g).unwrap_or(false)));
            let mut densities = Vec::new();
            let mut classes_ok = true;
            for c in &record.classes {
                let set = VertexSet::new(c.iter().copied());
                let e = g.edge_count_within(&set)?;
                let pairs = ratio::pairs(c.len());
                densities.push(density(e, c.len()));
                let sparse = scaled_lt(e as u128, &eps, pairs);
                let dense = scaled_lt(pairs - e as u128, &eps, pairs);
                classes_ok &= match scenario {
                    "scoop-random" => sparse,
                    _ => sparse || dense,
                };
            }
            checks.push(check("classes_certified_at_epsilon", classes_ok && !record.classes.is_empty()));
            checks.push(check(
                "thresholds_at_epsilon",
                record
                    .certificate
                    .iter()
                    .all(|c| c.threshold == eps && c.tag != ClassTag::Untagged),
            ));
            let v0 = record.exceptional.len();
            if scenario == "scoop-random" {
                let e = g.m();
                let cube = eps * eps * eps;
                checks.push(check("precondition", !ratio::gt_scaled(e as u128, &cube, ratio::pairs(n))));
                checks.push(check("v0_bound", v0 <= ratio::ceil_mul(&eps, n)));
            } else {
                checks.push(check("complete", record.status == Status::Complete));
                checks.push(check("v0_below_q", v0 < record.q));
            }
            row.q = Some(record.q);
            row.v0 = Some(v0);
            row.max_class_density = densities.iter().cloned().reduce(f64::max);
            row.min_class_density = densities.iter().cloned().reduce(f64::min);
        }
        Artifact::Cut { v1 } => {
            let a = VertexSet::new(v1.iter().copied());
            let b = complement_of(n, v1);
            let cut = g.edge_count_between(&a, &b)?;
            let m = g.m();
            checks.push(check("balanced", a.len() == n / 2 && a.members().iter().all(|&v| v < n)));
            let beta = config.beta()?;
            let half = Rational::new(1, 2);
            // cut/m > 1/2 + β, or cut/m < 1/2 − β for the complement mirror
            let ok = m > 0
                && if scenario == "ers1-com" {
                    scaled_lt(cut as u128, &(half - beta), m as u128)
                } else {
                    ratio::gt_scaled(cut as u128, &(half + beta), m as u128)
                };
            checks.push(check("cut_margin", ok));
            row.cut_ratio = (m > 0).then(|| cut as f64 / m as f64);
            row.max_class_density = Some(density(g.edge_count_within(&a)?, a.len()));
            row.min_class_density = Some(density(g.edge_count_within(&b)?, b.len()));
            if let (Some(x), Some(y)) = (row.max_class_density, row.min_class_density) {
                row.max_class_density = Some(x.max(y));
                row.min_class_density = Some(x.min(y));
            }
        }
        Artifact::Judicious { v1, epsilon } => {
            let eps = ratio::parse_rational(epsilon)?;
            let a = VertexSet::new(v1.iter().copied());
            let b = complement_of(n, v1);
            let (e1, e2) = (g.edge_count_within(&a)? as u128, g.edge_count_within(&b)? as u128);
            let (t1, t2) = (a.len() as u128, b.len() as u128);
            let (nn, m) = (n as u128, g.m() as u128);
            checks.push(check("split", !a.is_empty() && !b.is_empty() && a.members().iter().all(|&v| v < n)));
            checks.push(check("v1_sparse", scaled_lt(e1, &eps, t1 * t1)));
            // e2/t2² < m/n²
            checks.push(check("v2_below_ambient", t2 > 0 && e2 * nn * nn < m * t2 * t2));
            let d1 = density(e1 as usize, a.len());
            let d2 = density(e2 as usize, b.len());
            row.q = Some(2);
            row.max_class_density = Some(d1.max(d2));
            row.min_class_density = Some(d1.min(d2));
            row.cut_ratio = (m > 0).then(|| g.edge_count_between(&a, &b).unwrap_or(0) as f64 / m as f64);
        }
        Artifact::PhiSweep { n: order, .. } => {
            let (graphs, violations) = phi_sweep(*order)?;
            row.n = *order;
            checks.push(check("graph_count", graphs == 1u64 << (order * (order - 1) / 2)));
            checks.push(check("no_violations", violations == 0));
            if let Artifact::PhiSweep {
                graphs: g0,
                violations: v0,
                ..
            } = artifact
            {
                checks.push(check("sweep_reproduces", *g0 == graphs && *v0 == violations));
            }
        }
    }
    Ok((row, checks))
}

fn finish(
    scenario: &str,
    config: &ScenarioConfig,
    seed: u64,
    g: &Graph,
    input: Option<GeneratorSpec>,
    complement: bool,
    artifact: Artifact,
    start: Instant,
) -> Result<Run> {
    let (mut metrics, checks) = evaluate(scenario, config, g, &artifact)?;
    metrics.seed = seed;
    metrics.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(Run {
        metrics,
        input,
        complement,
        artifact,
        checks,
    })
}

fn scoop_record(g: &Graph, classes: Vec<VertexSet>, cert: Certificate, seed: u64) -> Result<PartitionRecord> {
    let part = edgedist::partition::Partition::from_classes(g.n(), classes)?;
    let status = if cert.all_certified() {
        Status::Complete
    } else {
        Status::Incomplete
    };
    Ok(PartitionRecord {
        n: part.n(),
        q: part.q(),
        class_size: part.class_size(),
        exceptional: part.exceptional().members().to_vec(),
        classes: part.classes().iter().map(|c| c.members().to_vec()).collect(),
        certificate: cert.classes,
        status,
        seed,
        reasons: Vec::new(),
    })
}

/// Random sparse instances meeting `e ≤ ε³·C(n,2)`, scooped with
/// `s = ⌊εn/3⌋`.
fn scoop_random(config: &ScenarioConfig, seed: u64) -> Result<Vec<Run>> {
    let runs = config.runs.unwrap_or(1000);
    let n_min = config.n_min.unwrap_or(50);
    let n_max = config.n_max.unwrap_or(300);
    if n_min == 0 || n_min > n_max {
        return Err(HarnessError::invalid(format!("bad size range {n_min}..={n_max}")));
    }
    let epsilons = config.epsilons(&["1/5", "3/10", "1/2"])?;
    let mut out = Vec::with_capacity(runs);
    for i in 0..runs {
        let run_seed = seed + i as u64;
        let start = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
        let n = rng.gen_range(n_min..=n_max);
        let eps = epsilons[i % epsilons.len()];
        let cube = ratio::to_f64(&eps).powi(3);
        let cube_exact = eps * eps * eps;
        let mut found = None;
        for attempt in 0..100u64 {
            let spec = GeneratorSpec::new(
                GeneratorKind::Gnp {
                    n,
                    p: rng.gen_range(0.0..1.0) * cube,
                },
                run_seed.wrapping_mul(1000).wrapping_add(attempt),
            );
            let g = generate(&spec)?;
            if !ratio::gt_scaled(g.m() as u128, &cube_exact, ratio::pairs(n)) {
                found = Some((spec, g));
                break;
            }
        }
        let (spec, g) = found.ok_or_else(|| HarnessError::invalid(format!("seed {run_seed}: no sparse instance")))?;
        let s = ratio::floor_mul(&eps, n) / 3;
        let s = s.max(1);
        let res = scoop(
            &g,
            &VertexSet::range(0..n),
            s,
            &eps,
            ScoopMode::Sparse,
            Strategy::ConditionalExpectation,
        )?;
        let record = scoop_record(&g, res.classes, res.certificate, run_seed)?;
        let artifact = Artifact::Partition {
            record,
            epsilon: ratio::format_rational(&eps),
        };
        out.push(finish("scoop-random", config, run_seed, &g, Some(spec), false, artifact, start)?);
    }
    Ok(out)
}

pub(crate) fn phi_sweep(n: usize) -> Result<(u64, u64)> {
    if !(2..=7).contains(&n) {
        return Err(HarnessError::invalid(format!("phi sweep needs 2 <= n <= 7, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut violations = 0;
    let total = 1u64 << pairs.len();
    for mask in 0..total {
        let g = Graph::from_edges(
            n,
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p),
        )?;
        if !phi_inequality_check(&g)?.passes {
            violations += 1;
        }
    }
    Ok((total, violations))
}

fn phi_exhaustive(config: &ScenarioConfig, _seed: u64) -> Result<Vec<Run>> {
    let n_max = config.n_max.unwrap_or(7);
    let n_min = config.n_min.unwrap_or(2);
    let mut out = Vec::new();
    for n in n_min..=n_max {
        let start = Instant::now();
        let (graphs, violations) = phi_sweep(n)?;
        let artifact = Artifact::PhiSweep { n, graphs, violations };
        out.push(finish("phi-exhaustive", config, n as u64, &Graph::empty(n), None, false, artifact, start)?);
    }
    Ok(out)
}

/// `K_{64,64}` followed by seeded random `K_r`-free graphs, or the
/// configured inputs. The mirror scenario runs on their complements.
fn cut_runs(name: &str, config: &ScenarioConfig, seed: u64, mirror: bool) -> Result<Vec<Run>> {
    let inputs = match &config.inputs {
        Some(v) => v.clone(),
        None => {
            let n = config.n_min.unwrap_or(20);
            let r = config.r.unwrap_or(3);
            let p = config.p.unwrap_or(0.5);
            let mut v = vec![GeneratorSpec::new(GeneratorKind::CompleteMultipartite { parts: vec![64, 64] }, seed)];
            v.extend((0..config.runs.unwrap_or(10) as u64).map(|i| {
                GeneratorSpec::new(GeneratorKind::RandomKrFree { n, r, p }, seed + 1 + i)
            }));
            v
        }
    };
    let restarts = config.restarts.unwrap_or(CutParams::default().restarts);
    let mut out = Vec::new();
    for (i, spec) in inputs.into_iter().enumerate() {
        let start = Instant::now();
        let base = generate(&spec)?;
        // a maximum balanced cut of the base is a minimum one of its complement
        let cut = balanced_cut_search(
            &base,
            &CutParams {
                restarts,
                seed: spec.seed,
                ..CutParams::default()
            },
        )?;
        let g = if mirror { base.complement() } else { base };
        let artifact = Artifact::Cut {
            v1: cut.v1.members().to_vec(),
        };
        out.push(finish(name, config, seed + i as u64, &g, Some(spec), mirror, artifact, start)?);
    }
    Ok(out)
}

/// The clique-sparse pipeline on `K_{64,64}` with `r = 3`, and the
/// sparse-or-dense pipeline on the 20-fold blow-up of `C_5` with `H = K_3`.
fn maint_runs(config: &ScenarioConfig, seed: u64) -> Result<Vec<Run>> {
    let eps = config.epsilons(&["1/4"])?[0];
    let p = PipelineParams {
        epsilon: eps,
        delta: eps,
        r: config.r.unwrap_or(3),
        seed,
        ..PipelineParams::default()
    };
    let c5: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
    let cases = [
        (GeneratorSpec::new(GeneratorKind::CompleteMultipartite { parts: vec![64, 64] }, seed), false),
        (
            GeneratorSpec::new(
                GeneratorKind::BlowUp {
                    base_n: 5,
                    base_edges: c5,
                    size: 20,
                },
                seed,
            ),
            true,
        ),
    ];
    let mut out = Vec::new();
    for (i, (spec, induced)) in cases.into_iter().enumerate() {
        let start = Instant::now();
        let g = generate(&spec)?;
        let res = if induced {
            let pp = PipelineParams { l: 5, ..p.clone() };
            sparse_dense_partition(&g, &PatternGraph::complete(3)?, &pp)?
        } else {
            sparse_equitable_partition(&g, &p)?
        };
        let artifact = Artifact::Partition {
            record: res.record(),
            epsilon: ratio::format_rational(&eps),
        };
        out.push(finish("maint", config, seed + i as u64, &g, Some(spec), false, artifact, start)?);
    }
    Ok(out)
}

fn ers2_runs(config: &ScenarioConfig, seed: u64) -> Result<Vec<Run>> {
    let eps = config.epsilons(&["1/4"])?[0];
    let r = config.r.unwrap_or(3);
    let p = PipelineParams {
        seed,
        ..PipelineParams::default()
    };
    let cases = [
        GeneratorSpec::new(GeneratorKind::CompleteMultipartite { parts: vec![64, 64] }, seed),
        GeneratorSpec::new(GeneratorKind::TuranGraph { n: 128, parts: 2 }, seed),
    ];
    let mut out = Vec::new();
    for (i, spec) in cases.into_iter().enumerate() {
        let start = Instant::now();
        let g = generate(&spec)?;
        let res = judicious_bipartition(&g, r, &eps, &p)?;
        let artifact = Artifact::Judicious {
            v1: res.v1.members().to_vec(),
            epsilon: ratio::format_rational(&eps),
        };
        out.push(finish("ers2", config, seed + i as u64, &g, Some(spec), false, artifact, start)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_scoop_run_reproduces() {
        let cfg = ScenarioConfig {
            runs: Some(6),
            n_min: Some(50),
            n_max: Some(80),
            ..ScenarioConfig::default()
        };
        let rep = run_scenario("scoop-random", &cfg, 3).unwrap();
        assert_eq!(rep.runs.len(), 6);
        assert!(rep.passed, "{:?}", rep.failures);
        let back = ExperimentReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert!(revalidate(&back).unwrap().is_empty());
    }

    #[test]
    fn tampered_artifact_is_caught() {
        let cfg = ScenarioConfig {
            runs: Some(1),
            ..ScenarioConfig::default()
        };
        let mut rep = run_scenario("ers1", &cfg, 0).unwrap();
        assert!(rep.passed);
        // K64,64 cut found is all of m
        assert_eq!(rep.runs[0].metrics.cut_ratio, Some(1.0));
        if let Artifact::Cut { v1 } = &mut rep.runs[0].artifact {
            v1.pop();
        }
        assert!(!revalidate(&rep).unwrap().is_empty());
    }

    #[test]
    fn unknown_scenario_and_config_keys() {
        assert!(matches!(
            run_scenario("nope", &ScenarioConfig::default(), 0),
            Err(HarnessError::UnknownScenario(_))
        ));
        assert!(ScenarioConfig::from_json(r#"{"runz": 3}"#).is_err());
        assert_eq!(ScenarioConfig::from_json(r#"{"runs": 3}"#).unwrap().runs, Some(3));
    }

    #[test]
    fn phi_sweep_small() {
        assert_eq!(phi_sweep(4).unwrap(), (64, 0));
        assert!(phi_sweep(8).is_err());
    }
}
