//! Edge-list text format.
//!
//! ```text
//! c optional comment
//! p 4 3
//! e 0 1
//! e 1 2
//! e 2 3
//! ```
//!
//! Vertices are 0-indexed. Repeated pairs (in either orientation) are
//! merged; the number merged is reported in [`LoadReport`].

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub n: usize,
    /// `m` as declared on the `p` line.
    pub declared_m: usize,
    pub edge_lines: usize,
    pub duplicates: usize,
}

pub fn parse_edge_list(text: &str) -> Result<(Graph, LoadReport)> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut tok = raw.split_whitespace();
        let Some(tag) = tok.next() else { continue };
        let mut num = |what: &str| -> Result<usize> {
            let t = tok.next().ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing {what}"),
            })?;
            t.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {what} `{t}`"),
            })
        };
        match tag {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "second `p` line".into(),
                    });
                }
                let n = num("vertex count")?;
                let m = num("edge count")?;
                header = Some((n, m));
            }
            "e" => {
                if header.is_none() {
                    return Err(Error::Parse {
                        line,
                        msg: "edge before `p` line".into(),
                    });
                }
                let u = num("endpoint")?;
                let v = num("endpoint")?;
                edges.push((u, v, line));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown line tag `{other}`"),
                })
            }
        }
        if tok.next().is_some() {
            return Err(Error::Parse {
                line,
                msg: "trailing tokens".into(),
            });
        }
    }
    let (n, declared_m) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing `p` line".into(),
    })?;
    for &(u, v, line) in &edges {
        if u >= n || v >= n {
            return Err(Error::Parse {
                line,
                msg: format!("endpoint out of range for n={n}"),
            });
        }
        if u == v {
            return Err(Error::Parse {
                line,
                msg: format!("self-loop at {u}"),
            });
        }
    }
    let edge_lines = edges.len();
    let (g, duplicates) = Graph::from_edges_counting(n, edges.into_iter().map(|(u, v, _)| (u, v)))?;
    Ok((
        g,
        LoadReport {
            n,
            declared_m,
            edge_lines,
            duplicates,
        },
    ))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, LoadReport)> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "p {} {}", g.n(), g.m())?;
    for (u, v) in g.edges() {
        writeln!(out, "e {u} {v}")?;
    }
    Ok(())
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_edge_list(g, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn edge_list_string(g: &Graph) -> String {
    let mut buf = Vec::new();
    write_edge_list(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
