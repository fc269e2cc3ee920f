//! Pipeline parameters, their key=value file format, and outcome status.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio::{self, Rational};
use crate::scoop::Strategy;
use crate::uniformity::{UniformityParams, MAX_EXACT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PipelineMode {
    /// Every class must be Sparse.
    Sparse,
    /// Classes may be Sparse or Dense.
    SparseOrDense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    #[serde(with = "ratio::serde_rational")]
    pub epsilon: Rational,
    pub r: usize,
    /// Uniformity parameter of the inner cluster partition.
    #[serde(with = "ratio::serde_rational")]
    pub delta: Rational,
    /// Minimum cluster count.
    pub l: usize,
    /// Cluster budget, standing in for `M(δ,l)`.
    pub max_k: usize,
    pub s_override: Option<usize>,
    pub seed: u64,
    pub mode: PipelineMode,
    /// Cluster classification coefficient `ξ′`; the schedule value when unset.
    #[serde(default, with = "opt_rational")]
    pub xi_override: Option<Rational>,
    /// `L′` in the class-size formula; the largest inner class count when unset.
    pub inner_l: Option<usize>,
    /// Ramsey group size `b`; `⌈ε^−3⌉` clamped to the cluster count when unset.
    pub group_size: Option<usize>,
    /// Vertex `v` of the pattern removed to form `F = H − v`.
    pub pattern_vertex: usize,
    /// Few-cliques coefficient `ρ` of the refinement precondition.
    #[serde(default, with = "opt_rational")]
    pub rho_override: Option<Rational>,
    pub max_iterations: usize,
    pub strategy: Strategy,
    pub exact_budget: usize,
    pub sample_count: usize,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            epsilon: Rational::new(1, 4),
            r: 3,
            delta: Rational::new(1, 4),
            l: 2,
            max_k: 64,
            s_override: None,
            seed: 0,
            mode: PipelineMode::Sparse,
            xi_override: None,
            inner_l: None,
            group_size: None,
            pattern_vertex: 0,
            rho_override: None,
            max_iterations: 32,
            strategy: Strategy::ConditionalExpectation,
            exact_budget: 24,
            sample_count: 64,
        }
    }
}

impl PipelineParams {
    pub fn new(epsilon: Rational, delta: Rational, l: usize, max_k: usize) -> Result<Self> {
        let p = PipelineParams {
            epsilon,
            delta,
            l,
            max_k,
            ..PipelineParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ratio::check_epsilon("epsilon", &self.epsilon)?;
        if self.delta <= Rational::from_integer(0) || self.delta > self.epsilon {
            return Err(Error::param("delta", "need 0 < delta <= epsilon"));
        }
        if self.l == 0 {
            return Err(Error::param("l", "must be at least 1"));
        }
        if self.max_k < self.l {
            return Err(Error::param("max_k", format!("{} is below l = {}", self.max_k, self.l)));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        if self.exact_budget > MAX_EXACT_BUDGET {
            return Err(Error::param("exact_budget", format!("at most {MAX_EXACT_BUDGET}")));
        }
        if self.sample_count == 0 {
            return Err(Error::param("sample_count", "must be at least 1"));
        }
        if self.s_override == Some(0) {
            return Err(Error::param("s_override", "must be positive"));
        }
        if matches!(self.group_size, Some(b) if b < 2) {
            return Err(Error::param("group_size", "must be at least 2"));
        }
        for (name, v) in [("xi", &self.xi_override), ("rho", &self.rho_override)] {
            if matches!(v, Some(x) if *x <= Rational::from_integer(0)) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(())
    }

    /// Uniformity settings at `epsilon` sharing this run's budgets and seed.
    pub fn uniformity(&self, epsilon: Rational) -> Result<UniformityParams> {
        Ok(UniformityParams::new(epsilon)?
            .with_exact_budget(self.exact_budget)
            .with_samples(self.sample_count)
            .with_seed(self.seed))
    }

    /// Parses `key = value` lines; `#` starts a comment. Unknown keys are
    /// rejected. Keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = PipelineParams::default();
        let mut samples_for_strategy = None;
        let mut strategy_name: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: String| Error::Parse { line: line_no, msg };
            let num = |v: &str| -> Result<usize> {
                v.parse().map_err(|_| bad(format!("`{key}` needs a nonnegative integer, got `{v}`")))
            };
            let rat = |v: &str| -> Result<Rational> {
                ratio::parse_rational(v).map_err(|_| bad(format!("`{key}` needs a rational, got `{v}`")))
            };
            let opt = |v: &str| v.eq_ignore_ascii_case("none") || v.is_empty();
            match key {
                "epsilon" => p.epsilon = rat(value)?,
                "r" => p.r = num(value)?,
                "delta" => p.delta = rat(value)?,
                "l" => p.l = num(value)?,
                "max_k" => p.max_k = num(value)?,
                "s_override" | "s" => p.s_override = if opt(value) { None } else { Some(num(value)?) },
                "seed" => p.seed = value.parse().map_err(|_| bad(format!("bad seed `{value}`")))?,
                "mode" => {
                    p.mode = match value.to_ascii_lowercase().as_str() {
                        "sparse" => PipelineMode::Sparse,
                        "sparse_or_dense" | "sparseordense" | "mixed" => PipelineMode::SparseOrDense,
                        _ => return Err(bad(format!("unknown mode `{value}`"))),
                    }
                }
                "xi" | "xi_override" => p.xi_override = if opt(value) { None } else { Some(rat(value)?) },
                "inner_l" => p.inner_l = if opt(value) { None } else { Some(num(value)?) },
                "group_size" | "b" => p.group_size = if opt(value) { None } else { Some(num(value)?) },
                "pattern_vertex" | "vertex" => p.pattern_vertex = num(value)?,
                "rho" | "rho_override" => p.rho_override = if opt(value) { None } else { Some(rat(value)?) },
                "max_iterations" => p.max_iterations = num(value)?,
                "strategy" => strategy_name = Some(value.to_ascii_lowercase()),
                "strategy_samples" => samples_for_strategy = Some(num(value)?),
                "exact_budget" => p.exact_budget = num(value)?,
                "sample_count" => p.sample_count = num(value)?,
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        if let Some(name) = strategy_name {
            p.strategy = match name.as_str() {
                "exact" => Strategy::Exact,
                "ce" | "conditional_expectation" | "conditionalexpectation" => Strategy::ConditionalExpectation,
                "sampled" => Strategy::Sampled {
                    samples: samples_for_strategy.unwrap_or(p.sample_count),
                    seed: p.seed,
                },
                _ => return Err(Error::param("strategy", format!("unknown strategy `{name}`"))),
            };
        }
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        PipelineParams::parse(&std::fs::read_to_string(path)?)
    }

    /// The key=value form accepted by [`PipelineParams::parse`].
    pub fn to_kv(&self) -> String {
        let opt_n = |v: Option<usize>| v.map_or("none".to_string(), |x| x.to_string());
        let opt_r = |v: Option<Rational>| v.map_or("none".to_string(), |x| ratio::format_rational(&x));
        let (strategy, samples) = match self.strategy {
            Strategy::Exact => ("exact", None),
            Strategy::ConditionalExpectation => ("ce", None),
            Strategy::Sampled { samples, .. } => ("sampled", Some(samples)),
        };
        let mode = match self.mode {
            PipelineMode::Sparse => "sparse",
            PipelineMode::SparseOrDense => "sparse_or_dense",
        };
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        put("epsilon", ratio::format_rational(&self.epsilon));
        put("r", self.r.to_string());
        put("delta", ratio::format_rational(&self.delta));
        put("l", self.l.to_string());
        put("max_k", self.max_k.to_string());
        put("s_override", opt_n(self.s_override));
        put("seed", self.seed.to_string());
        put("mode", mode.to_string());
        put("xi", opt_r(self.xi_override));
        put("inner_l", opt_n(self.inner_l));
        put("group_size", opt_n(self.group_size));
        put("pattern_vertex", self.pattern_vertex.to_string());
        put("rho", opt_r(self.rho_override));
        put("max_iterations", self.max_iterations.to_string());
        put("strategy", strategy.to_string());
        if let Some(s) = samples {
            put("strategy_samples", s.to_string());
        }
        put("exact_budget", self.exact_budget.to_string());
        put("sample_count", self.sample_count.to_string());
        out
    }
}

mod opt_rational {
    use super::{ratio, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_some(&ratio::format_rational(r)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| ratio::parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Complete,
    Incomplete,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Complete => "Complete",
            Status::Incomplete => "Incomplete",
        })
    }
}

/// Why a pipeline stopped short of its postcondition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum IncompleteReason {
    /// The uniformity report still exceeds `ε·q²` bad pairs.
    UniformityBudget { bad_pairs: usize, allowed: String },
    IterationCap { iterations: usize },
    /// Refinement would exceed `max_k` clusters.
    QBudget { max_k: usize },
    /// No refinement step kept the index from decreasing.
    Stalled,
    UncertifiedClasses { count: usize },
    /// The remainder `V″` fails `e ≤ ε³·C(|V″|,2)` before scooping.
    RemainderPrecondition { size: usize, edges: usize },
    NoClasses,
    QBelowMinimum { q: usize, k_min: usize },
    NotEquitable { exceptional: usize, q: usize },
    /// A class has many cliques in both the graph and its complement.
    CliqueConditionViolated { class: usize },
}

impl fmt::Display for IncompleteReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IncompleteReason::UniformityBudget { bad_pairs, allowed } => {
                write!(f, "{bad_pairs} non-uniform pairs exceed the allowance {allowed}")
            }
            IncompleteReason::IterationCap { iterations } => write!(f, "iteration cap {iterations} reached"),
            IncompleteReason::QBudget { max_k } => write!(f, "cluster budget max_k = {max_k} reached"),
            IncompleteReason::Stalled => f.write_str("no refinement step kept the index from decreasing"),
            IncompleteReason::UncertifiedClasses { count } => write!(f, "{count} classes uncertified"),
            IncompleteReason::RemainderPrecondition { size, edges } => {
                write!(f, "remainder of {size} vertices has {edges} edges, above ε³·C(size,2)")
            }
            IncompleteReason::NoClasses => f.write_str("no classes produced"),
            IncompleteReason::QBelowMinimum { q, k_min } => write!(f, "q = {q} below the minimum {k_min}"),
            IncompleteReason::NotEquitable { exceptional, q } => {
                write!(f, "|V0| = {exceptional} is not below q = {q}")
            }
            IncompleteReason::CliqueConditionViolated { class } => {
                write!(f, "class {class} has many cliques in the graph and in its complement")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "# run\nepsilon = 0.2\ndelta=1/10\nl=3\nmax_k=40\ns=4\nmode=sparse_or_dense\nstrategy=sampled\nstrategy_samples=9\nseed=17\n";
        let p = PipelineParams::parse(text).unwrap();
        assert_eq!(p.epsilon, Rational::new(1, 5));
        assert_eq!(p.delta, Rational::new(1, 10));
        assert_eq!(p.s_override, Some(4));
        assert_eq!(p.mode, PipelineMode::SparseOrDense);
        assert_eq!(p.strategy, Strategy::Sampled { samples: 9, seed: 17 });
        assert_eq!(PipelineParams::parse(&p.to_kv()).unwrap(), p);
    }

    #[test]
    fn parse_rejects() {
        assert!(PipelineParams::parse("epsilon=0.2\ndelta=0.3").is_err());
        assert!(PipelineParams::parse("l=0").is_err());
        assert!(PipelineParams::parse("l=5\nmax_k=4").is_err());
        assert!(PipelineParams::parse("colour=red").is_err());
        assert!(PipelineParams::parse("epsilon").is_err());
        assert!(PipelineParams::parse("epsilon=1.5").is_err());
        assert!(PipelineParams::parse("").is_ok());
    }

    #[test]
    fn json_round_trip() {
        let p = PipelineParams {
            xi_override: Some(Rational::new(1, 1000)),
            ..PipelineParams::default()
        };
        let s = serde_json::to_string(&p).unwrap();
        let back: PipelineParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
