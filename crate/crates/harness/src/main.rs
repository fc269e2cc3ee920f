use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use edgedist::bipartition::{balanced_cut_search, judicious_bipartition, phi, phi_inequality_check, CutParams};
use edgedist::constants::{feasibility_report, schedule, SulBound, Theorem};
use edgedist::count::{count_cliques, count_induced};
use edgedist::generate::{generate, GeneratorKind, GeneratorSpec};
use edgedist::io::{edge_list_string, parse_edge_list};
use edgedist::params::{PipelineMode, PipelineParams, Status};
use edgedist::partition::{Partition, Certificate};
use edgedist::pipeline::{
    refine_mixed_partition, sparse_dense_partition, sparse_equitable_partition, sparse_uniform_partition,
    PartitionRecord, PipelineOutput,
};
use edgedist::ratio::{self, Rational};
use edgedist::scoop::{scoop, ScoopMode, Strategy};
use edgedist::uniformity::{check_pair, check_partition, UniformityParams};
use edgedist::{Graph, VertexSet};

use edgedist_harness::args::{parse_list, parse_pattern, parse_set};
use edgedist_harness::scenario::{revalidate, run_scenario, ExperimentReport, ScenarioConfig};
use edgedist_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "edgedist", version, about = "Certified partitions and edge-distribution experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Edge-list file; stdin when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Where the JSON result goes; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Pipeline parameters as `key = value` lines.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Count `K_r` or induced copies of a pattern.
    Count {
        #[arg(long, conflicts_with = "pattern")]
        r: Option<usize>,
        /// `k3`, `e3`, `p4`, `c5`, or `order:u-v,...`.
        #[arg(long)]
        pattern: Option<String>,
    },
    /// Edge density of the graph, a set, or a pair of sets.
    Density {
        #[arg(long)]
        a: Option<String>,
        #[arg(long, requires = "a")]
        b: Option<String>,
    },
    #[command(subcommand)]
    Uniformity(UniformityCmd),
    /// Extract equal classes of minimum (or maximum) edge count.
    Scoop {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        epsilon: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Sparse)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = StrategyArg::Ce)]
        strategy: StrategyArg,
        /// Target vertices; all of them when omitted.
        #[arg(long)]
        target: Option<String>,
    },
    #[command(subcommand)]
    Partition(PartitionCmd),
    #[command(subcommand)]
    Bipartition(BipartitionCmd),
    #[command(subcommand)]
    Cut(CutCmd),
    /// Φ(G,k) for one `k`, or the full inequality check.
    Phi {
        #[arg(long)]
        k: Option<usize>,
    },
    /// Evaluate a constants schedule.
    Constants {
        #[arg(long, default_value = "maint")]
        theorem: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 3)]
        r: u32,
        /// Also report feasibility at this order.
        #[arg(long)]
        n: Option<u64>,
        /// Schedule-specific extra input (for example `c`).
        #[arg(long)]
        extra: Option<String>,
    },
    #[command(subcommand)]
    Generate(GenerateCmd),
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum UniformityCmd {
    CheckPair {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        exact_budget: Option<usize>,
    },
    CheckPartition {
        /// A partition record or plain partition JSON.
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        epsilon: String,
    },
}

#[derive(Subcommand)]
enum PartitionCmd {
    /// Few `K_r`: every class sparse.
    Maint(PipelineArgs),
    /// Few `K_r`: sparse classes forming a uniform partition.
    Maint3 {
        #[command(flatten)]
        common: PipelineArgs,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
    },
    /// Few induced `H`: sparse or dense classes.
    Maintx {
        #[command(flatten)]
        common: PipelineArgs,
        #[arg(long)]
        pattern: String,
    },
    /// Refine a uniform partition into sparse or dense classes.
    Rams {
        #[command(flatten)]
        common: PipelineArgs,
        #[arg(long)]
        partition: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Subcommand)]
enum BipartitionCmd {
    Ers2 {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value = "1/4")]
        epsilon: String,
    },
}

#[derive(Subcommand)]
enum CutCmd {
    Ers1 {
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Required margin `β` over one half.
        #[arg(long)]
        beta: Option<String>,
    },
}

#[derive(Subcommand)]
enum GenerateCmd {
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    Multipartite {
        #[arg(long)]
        parts: String,
    },
    Turan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        parts: usize,
    },
    KrFree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        p: f64,
    },
    /// Blow-up of the cycle `C_k`.
    CycleBlowup {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        size: usize,
    },
    /// A generator spec as JSON.
    Spec {
        spec: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    Run {
        name: String,
        /// Scenario config JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Recompute every flag of a saved report.
    Check { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sparse,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exact,
    Ce,
    Sampled,
}

/// A finished command: the JSON to emit and whether expectations held.
struct Outcome {
    value: serde_json::Value,
    ok: bool,
}

impl Outcome {
    fn ok(value: serde_json::Value) -> Self {
        Outcome { value, ok: true }
    }
}

fn rational(s: &str) -> Result<Rational> {
    Ok(ratio::parse_rational(s)?)
}

fn read_graph(g: &Global) -> Result<Graph> {
    let text = match &g.input {
        Some(p) => fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(parse_edge_list(&text)?.0)
}

fn pipeline_params(g: &Global, a: &PipelineArgs) -> Result<PipelineParams> {
    let mut p = match &g.params {
        Some(path) => PipelineParams::load(path)?,
        None => PipelineParams::default(),
    };
    p.seed = g.seed;
    if let Some(e) = &a.epsilon {
        p.epsilon = rational(e)?;
        if g.params.is_none() {
            p.delta = p.epsilon;
        }
    }
    if let Some(r) = a.r {
        p.r = r;
    }
    if let Some(l) = a.l {
        p.l = l;
    }
    if a.s.is_some() {
        p.s_override = a.s;
    }
    p.validate()?;
    Ok(p)
}

fn read_partition(path: &Path, n: usize) -> Result<Partition> {
    let text = fs::read_to_string(path)?;
    if let Ok(rec) = PartitionRecord::from_json(&text) {
        return Ok(rec.partition()?);
    }
    let part: Partition = serde_json::from_str(&text)?;
    part.validate()?;
    if part.n() != n {
        return Err(HarnessError::invalid(format!("partition covers {} vertices, graph has {n}", part.n())));
    }
    Ok(part)
}

fn pipeline_outcome(g: &Graph, out: PipelineOutput) -> Result<Outcome> {
    let verified = out.verify(g);
    let mut value = serde_json::to_value(out.record())?;
    value["verified"] = json!(verified);
    value["notes"] = json!(out.notes);
    if let Some(u) = &out.uniformity {
        value["bad_pairs"] = json!(u.bad_pairs);
    }
    Ok(Outcome {
        value,
        ok: verified && out.status == Status::Complete,
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let gl = &cli.global;
    match &cli.cmd {
        Command::Count { r, pattern } => {
            let g = read_graph(gl)?;
            match (r, pattern) {
                (Some(r), _) => Ok(Outcome::ok(json!({"r": r, "count": count_cliques(&g, *r)?}))),
                (None, Some(p)) => {
                    let h = parse_pattern(p)?;
                    Ok(Outcome::ok(json!({"pattern": p, "count": count_induced(&g, &h)?})))
                }
                (None, None) => Err(HarnessError::invalid("give --r or --pattern")),
            }
        }
        Command::Density { a, b } => {
            let g = read_graph(gl)?;
            let value = match (a, b) {
                (Some(a), Some(b)) => {
                    let (a, b) = (parse_set(a)?, parse_set(b)?);
                    let d = g.pair_density(&a, &b)?;
                    json!({"edges": g.edge_count_between(&a, &b)?, "density": ratio::format_rational(&d),
                           "value": ratio::to_f64(&d)})
                }
                (Some(a), None) => {
                    let a = parse_set(a)?;
                    a.check(g.n())?;
                    let e = g.edge_count_within(&a)?;
                    json!({"edges": e, "pairs": ratio::pairs(a.len()), "value": e as f64 / (ratio::pairs(a.len()).max(1)) as f64})
                }
                _ => {
                    let pairs = ratio::pairs(g.n());
                    json!({"n": g.n(), "m": g.m(), "density": g.m() as f64 / pairs.max(1) as f64})
                }
            };
            Ok(Outcome::ok(value))
        }
        Command::Uniformity(UniformityCmd::CheckPair {
            a,
            b,
            epsilon,
            exact_budget,
        }) => {
            let g = read_graph(gl)?;
            let mut up = UniformityParams::new(rational(epsilon)?)?.with_seed(gl.seed);
            if let Some(b) = exact_budget {
                up = up.with_exact_budget(*b);
            }
            let v = check_pair(&g, &parse_set(a)?, &parse_set(b)?, &up)?;
            Ok(Outcome {
                ok: !v.kind.is_bad(),
                value: serde_json::to_value(v.record())?,
            })
        }
        Command::Uniformity(UniformityCmd::CheckPartition { partition, epsilon }) => {
            let g = read_graph(gl)?;
            let part = read_partition(partition, g.n())?;
            let up = UniformityParams::new(rational(epsilon)?)?.with_seed(gl.seed);
            let rep = check_partition(&g, &part, &up)?;
            Ok(Outcome {
                ok: rep.passes,
                value: json!({"q": rep.q, "bad_pairs": rep.bad_pairs, "sampled_pairs": rep.sampled_pairs,
                              "passes": rep.passes}),
            })
        }
        Command::Scoop {
            s,
            epsilon,
            mode,
            strategy,
            target,
        } => {
            let g = read_graph(gl)?;
            let eps = rational(epsilon)?;
            let target = match target {
                Some(t) => parse_set(t)?,
                None => VertexSet::range(0..g.n()),
            };
            let mode = match mode {
                ModeArg::Sparse => ScoopMode::Sparse,
                ModeArg::Dense => ScoopMode::Dense,
            };
            let strategy = match strategy {
                StrategyArg::Exact => Strategy::Exact,
                StrategyArg::Ce => Strategy::ConditionalExpectation,
                StrategyArg::Sampled => Strategy::Sampled {
                    samples: 64,
                    seed: gl.seed,
                },
            };
            let res = scoop(&g, &target, *s, &eps, mode, strategy)?;
            let part = res.partition(g.n())?;
            let verified = Certificate::verify(&res.certificate, &g, &part);
            Ok(Outcome {
                ok: verified && res.certificate.all_certified(),
                value: json!({"classes": res.classes, "leftover": res.leftover, "precondition": res.precondition,
                              "certificate": res.certificate, "verified": verified}),
            })
        }
        Command::Partition(cmd) => {
            let g = read_graph(gl)?;
            let out = match cmd {
                PartitionCmd::Maint(a) => sparse_equitable_partition(&g, &pipeline_params(gl, a)?)?,
                PartitionCmd::Maint3 { common, k_min } => {
                    sparse_uniform_partition(&g, *k_min, &pipeline_params(gl, common)?)?
                }
                PartitionCmd::Maintx { common, pattern } => {
                    let mut p = pipeline_params(gl, common)?;
                    p.mode = PipelineMode::SparseOrDense;
                    sparse_dense_partition(&g, &parse_pattern(pattern)?, &p)?
                }
                PartitionCmd::Rams { common, partition } => {
                    let part = read_partition(partition, g.n())?;
                    refine_mixed_partition(&g, &part, &pipeline_params(gl, common)?)?
                }
            };
            pipeline_outcome(&g, out)
        }
        Command::Bipartition(BipartitionCmd::Ers2 { r, epsilon }) => {
            let g = read_graph(gl)?;
            let mut p = match &gl.params {
                Some(path) => PipelineParams::load(path)?,
                None => PipelineParams::default(),
            };
            p.seed = gl.seed;
            let res = judicious_bipartition(&g, *r, &rational(epsilon)?, &p)?;
            Ok(Outcome {
                ok: res.v1_sparse && res.v2_below_ambient,
                value: json!({"v1": res.v1, "v2": res.v2, "e1": res.e1, "e2": res.e2,
                              "sigma": ratio::format_rational(&res.sigma), "v1_sparse": res.v1_sparse,
                              "v2_below_ambient": res.v2_below_ambient, "status": res.status}),
            })
        }
        Command::Cut(CutCmd::Ers1 { restarts, beta }) => {
            let g = read_graph(gl)?;
            let res = balanced_cut_search(
                &g,
                &CutParams {
                    restarts: *restarts,
                    seed: gl.seed,
                    ..CutParams::default()
                },
            )?;
            let half = Rational::new(1, 2);
            let beta = beta.as_deref().map(rational).transpose()?.unwrap_or(Rational::new(0, 1));
            let ok = res.m > 0 && ratio::gt_scaled(res.cut as u128, &(half + beta), res.m as u128);
            Ok(Outcome {
                ok,
                value: json!({"v1": res.v1, "v2": res.v2, "cut": res.cut, "m": res.m, "ratio": res.ratio}),
            })
        }
        Command::Phi { k } => {
            let g = read_graph(gl)?;
            match k {
                Some(k) => {
                    let v = phi(&g, *k, gl.seed)?;
                    Ok(Outcome::ok(json!({"k": v.k, "value": ratio::format_rational(&v.value),
                                          "subset": v.subset, "exact": v.exact})))
                }
                None => {
                    let rep = phi_inequality_check(&g)?;
                    let values: Vec<_> = rep
                        .values
                        .iter()
                        .map(|v| json!({"k": v.k, "value": ratio::format_rational(&v.value)}))
                        .collect();
                    Ok(Outcome {
                        ok: rep.passes,
                        value: json!({"n": rep.n, "values": values, "violations": rep.violations,
                                      "passes": rep.passes}),
                    })
                }
            }
        }
        Command::Constants {
            theorem,
            epsilon,
            r,
            n,
            extra,
        } => {
            let th: Theorem = theorem.parse()?;
            let eps = rational(epsilon)?;
            let extra = extra.as_deref().map(rational).transpose()?;
            let sul = SulBound::default();
            let sched = schedule(th, &eps, *r, extra, &sul)?;
            let values: serde_json::Map<String, serde_json::Value> =
                sched.values.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect();
            let mut value = json!({"theorem": th.to_string(), "epsilon": epsilon, "r": r, "values": values});
            if let Some(n) = n {
                let rep = feasibility_report(th, &eps, *r, *n, extra, &sul)?;
                value["feasibility"] = json!({"n": n, "threshold": rep.threshold.to_string(), "s": rep.s.to_string(),
                                              "feasible": rep.feasible});
            }
            Ok(Outcome::ok(value))
        }
        Command::Generate(cmd) => {
            let kind = match cmd {
                GenerateCmd::Gnp { n, p } => GeneratorKind::Gnp { n: *n, p: *p },
                GenerateCmd::Multipartite { parts } => GeneratorKind::CompleteMultipartite {
                    parts: parse_list(parts)?,
                },
                GenerateCmd::Turan { n, parts } => GeneratorKind::TuranGraph { n: *n, parts: *parts },
                GenerateCmd::KrFree { n, r, p } => GeneratorKind::RandomKrFree { n: *n, r: *r, p: *p },
                GenerateCmd::CycleBlowup { k, size } => {
                    if *k < 3 {
                        return Err(HarnessError::invalid("a cycle needs at least 3 vertices"));
                    }
                    GeneratorKind::BlowUp {
                        base_n: *k,
                        base_edges: (0..*k).map(|i| (i, (i + 1) % k)).collect(),
                        size: *size,
                    }
                }
                GenerateCmd::Spec { spec } => {
                    let spec: GeneratorSpec = serde_json::from_str(&fs::read_to_string(spec)?)?;
                    spec.kind
                }
            };
            let g = generate(&GeneratorSpec::new(kind, gl.seed))?;
            Ok(Outcome::ok(serde_json::Value::String(edge_list_string(&g))))
        }
        Command::Experiment(ExperimentCmd::Run { name, config, csv }) => {
            let cfg = match config {
                Some(p) => ScenarioConfig::from_json(&fs::read_to_string(p)?)?,
                None => ScenarioConfig::default(),
            };
            let rep = run_scenario(name, &cfg, gl.seed)?;
            if let Some(path) = csv {
                rep.write_csv(fs::File::create(path)?)?;
            }
            for f in &rep.failures {
                eprintln!("expectation failed: {f}");
            }
            eprintln!(
                "{}: {}/{} runs passed",
                rep.scenario,
                rep.runs.iter().filter(|r| r.passed()).count(),
                rep.runs.len()
            );
            Ok(Outcome {
                ok: rep.passed,
                value: serde_json::to_value(&rep)?,
            })
        }
        Command::Experiment(ExperimentCmd::Check { report }) => {
            let rep = ExperimentReport::from_json(&fs::read_to_string(report)?)?;
            let diffs = revalidate(&rep)?;
            Ok(Outcome {
                ok: diffs.is_empty(),
                value: json!({"scenario": rep.scenario, "reproduced": diffs.is_empty(), "differences": diffs}),
            })
        }
    }
}

fn emit(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    // generated graphs are written as edge-list text, everything else as JSON
    let text = match value {
        serde_json::Value::String(s) => s.clone(),
        v => serde_json::to_string_pretty(v)? + "\n",
    };
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|out| emit(cli.global.output.as_deref(), &out.value).map(|_| out.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
