//! Parsers for patterns and vertex sets given on the command line.

use edgedist::{PatternGraph, VertexSet};

use crate::error::{HarnessError, Result};

/// `k4` (clique), `e3` (independent set), `p4` (path), `c5` (cycle), or an
/// explicit `order:u-v,u-v,...` such as `3:0-1,1-2`.
pub fn parse_pattern(s: &str) -> Result<PatternGraph> {
    let s = s.trim();
    if let Some((order, edges)) = s.split_once(':') {
        let r = parse_usize(order)?;
        let mut list = Vec::new();
        for e in edges.split(',').map(str::trim).filter(|e| !e.is_empty()) {
            let (u, v) = e
                .split_once('-')
                .ok_or_else(|| HarnessError::invalid(format!("edge `{e}` is not of the form u-v")))?;
            list.push((parse_usize(u)?, parse_usize(v)?));
        }
        return Ok(PatternGraph::new(r, list)?);
    }
    let (kind, r) = s.split_at(s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len()));
    let r = parse_usize(r)?;
    let h = match kind.to_ascii_lowercase().as_str() {
        "k" => PatternGraph::complete(r),
        "e" => PatternGraph::empty(r),
        "p" => PatternGraph::path(r),
        "c" => PatternGraph::cycle(r),
        _ => return Err(HarnessError::invalid(format!("unknown pattern `{s}`"))),
    };
    Ok(h?)
}

/// Comma-separated vertices and inclusive ranges: `0-4,9,12-13`.
pub fn parse_set(s: &str) -> Result<VertexSet> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse_usize(a)?, parse_usize(b)?);
                if a > b {
                    return Err(HarnessError::invalid(format!("empty range `{part}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_usize(part)?),
        }
    }
    Ok(VertexSet::new(out))
}

pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(parse_usize).collect()
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| HarnessError::invalid(format!("expected a nonnegative integer, got `{s}`")))
}
