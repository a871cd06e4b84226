//! Graph files.
//!
//! ```text
//! # comment
//! vertex u
//! vertex w
//! edge e u w
//! omega b w w
//! ```
//!
//! `edge <id> <source> <range>` is a single edge, `omega` a bundle of
//! countably many parallel edges addressed as `b[k]`. Vertices must be
//! declared before use and ids are unique across edges and bundles. Names
//! may not contain the characters the path and sequence grammars use.

use regulim_core::{Graph, GraphError};

use crate::{CliError, Result};

const RESERVED: &[char] = &[',', '[', ']', ';', ':', '(', ')', '=', '@', '#'];

fn check_name(line: usize, name: &str) -> Result<()> {
    if let Some(c) = name.chars().find(|c| RESERVED.contains(c)) {
        return Err(CliError::Parse {
            line,
            msg: format!("name `{name}` contains reserved character `{c}`"),
        });
    }
    Ok(())
}

pub fn parse(text: &str) -> Result<Graph> {
    let mut g = Graph::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let arity = match toks[0] {
            "vertex" => 2,
            "edge" | "omega" => 4,
            other => {
                return Err(CliError::Parse {
                    line,
                    msg: format!("unknown keyword `{other}`"),
                })
            }
        };
        if toks.len() != arity {
            return Err(CliError::Parse {
                line,
                msg: format!("`{}` takes {} field(s), found {}", toks[0], arity - 1, toks.len() - 1),
            });
        }
        for t in &toks[1..] {
            check_name(line, t)?;
        }
        let res: std::result::Result<(), GraphError> = match toks[0] {
            "vertex" => g.add_vertex(toks[1]).map(|_| ()),
            "edge" => g.add_edge(toks[1], toks[2], toks[3]).map(|_| ()),
            _ => g.add_bundle(toks[1], toks[2], toks[3]).map(|_| ()),
        };
        res.map_err(|e| CliError::Parse {
            line,
            msg: e.to_string(),
        })?;
    }
    Ok(g)
}

/// Canonical text: vertices, then edges, then bundles, in declaration order.
pub fn emit(g: &Graph) -> String {
    let mut out = String::new();
    for v in g.vertex_names() {
        out.push_str(&format!("vertex {v}\n"));
    }
    for d in g.edges() {
        out.push_str(&format!(
            "edge {} {} {}\n",
            d.id,
            g.vertex_name(d.source),
            g.vertex_name(d.range)
        ));
    }
    for d in g.bundles() {
        out.push_str(&format!(
            "omega {} {} {}\n",
            d.id,
            g.vertex_name(d.source),
            g.vertex_name(d.range)
        ));
    }
    out
}
