//! Sequence specs for `converge`.
//!
//! ```text
//! prefix=<edge ids>; tail=const:<path>
//! prefix=<edge ids>; tail=walk:<bundle>:<a>n+<b>
//! ```
//!
//! `const` is the constant sequence at `prefix ++ path`, where `path` is any
//! point literal (`@v`, an edge list, or `inf:<prefix>:(<period>)`).
//! `walk` is `x_n = prefix · bundle[a·n+b]`, with the bundle edge repeated
//! forever when the bundle is a loop, so `prefix=b[2]; tail=walk:b:n+0` on a
//! one-vertex bundle is `b[2] b[n] b[n] …`. The `prefix=` part may be
//! omitted.

use regulim_core::graph::parse_edge_list;
use regulim_core::graph_paths::{InfinitePath, PathTemplate, Slot};
use regulim_core::{EdgeRef, Graph, Path, PathPoint};

use crate::{CliError, Result};

fn grammar(msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("sequence spec: {msg}"))
}

/// `<a>n+<b>` with `a ≥ 1`; `n`, `3n` and `n+2` are accepted.
fn parse_affine(text: &str) -> Result<(u64, u64)> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (a, b) = t
        .split_once('n')
        .ok_or_else(|| grammar(format!("`{text}` is not of the form <a>n+<b>")))?;
    let a = if a.is_empty() {
        1
    } else {
        a.parse().map_err(|_| grammar(format!("bad step `{a}`")))?
    };
    let b = match b.strip_prefix('+') {
        Some(b) => b.parse().map_err(|_| grammar(format!("bad offset `{b}`")))?,
        None if b.is_empty() => 0,
        None => return Err(grammar(format!("`{text}` is not of the form <a>n+<b>"))),
    };
    if a == 0 {
        return Err(grammar("walk step must be at least 1"));
    }
    Ok((a, b))
}

pub fn parse_target(g: &Graph, text: &str) -> Result<PathPoint> {
    PathPoint::parse(g, text).map_err(|e| CliError::Input(format!("target: {e}")))
}

pub fn parse_sequence(g: &Graph, text: &str) -> Result<PathTemplate> {
    let mut prefix: Vec<EdgeRef> = Vec::new();
    let mut tail: Option<&str> = None;
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| grammar(format!("`{part}` is not key=value")))?;
        match key.trim() {
            "prefix" => prefix = parse_edge_list(g, value).map_err(grammar)?,
            "tail" => tail = Some(value.trim()),
            other => return Err(grammar(format!("unknown key `{other}`"))),
        }
    }
    let tail = tail.ok_or_else(|| grammar("missing `tail=`"))?;
    let head = if prefix.is_empty() {
        None
    } else {
        Some(Path::new(g, prefix.clone()).map_err(grammar)?)
    };

    if let Some(lit) = tail.strip_prefix("const:") {
        let point = PathPoint::parse(g, lit).map_err(grammar)?;
        let joined = match (head, point) {
            (None, p) => p,
            (Some(h), PathPoint::Finite(p)) if p.is_empty() => {
                if h.source(g) != p.range() {
                    return Err(grammar("`@v` after a prefix must name the prefix source"));
                }
                PathPoint::Finite(h)
            }
            (Some(_), PathPoint::Finite(p)) => {
                let edges = prefix.iter().chain(p.edges()).copied().collect();
                PathPoint::Finite(Path::new(g, edges).map_err(grammar)?)
            }
            (Some(_), PathPoint::Infinite(x)) => {
                let pre = prefix.iter().chain(x.prefix()).copied().collect();
                PathPoint::Infinite(InfinitePath::new(g, pre, x.period().to_vec()).map_err(grammar)?)
            }
        };
        return Ok(PathTemplate::constant(g, &joined));
    }

    if let Some(rest) = tail.strip_prefix("walk:") {
        let (name, affine) = rest
            .split_once(':')
            .ok_or_else(|| grammar("expected walk:<bundle>:<a>n+<b>"))?;
        let bundle = g.bundle(name.trim()).map_err(grammar)?;
        let (a, b) = parse_affine(affine)?;
        let decl = &g.bundles()[bundle];
        let slot = Slot::Param { bundle, a, b };
        let mut slots: Vec<Slot> = prefix.iter().map(|&e| Slot::Edge(e)).collect();
        let base = prefix.first().map_or(decl.range, |&e| g.r(e));
        let period = if decl.source == decl.range {
            vec![slot]
        } else {
            slots.push(slot);
            Vec::new()
        };
        let t = PathTemplate {
            base,
            prefix: slots,
            period,
        };
        t.validate(g).map_err(grammar)?;
        return Ok(t);
    }
    Err(grammar(format!(
        "tail `{tail}` is neither const:<path> nor walk:<bundle>:<a>n+<b>"
    )))
}
