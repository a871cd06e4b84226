//! The JSON report and the DOT rendering of a stage tower.
//!
//! Reports are built as `serde_json::Value` maps, whose keys serialize in
//! sorted order, so equal inputs give byte-identical output.

use regulim_core::graph_correspondence::{bratteli, BlockKind, BratteliDiagram, StageTower};
use regulim_core::graph_paths::classify;
use regulim_core::{Graph, Path};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

fn names(g: &Graph, vs: impl IntoIterator<Item = usize>) -> Value {
    vs.into_iter().map(|v| Value::from(g.vertex_name(v))).collect()
}

fn graph_json(g: &Graph) -> Value {
    let decl = |d: &regulim_core::graph::EdgeDecl| json!({"id": d.id, "source": g.vertex_name(d.source), "range": g.vertex_name(d.range)});
    json!({
        "vertices": g.vertex_names(),
        "edges": g.edges().iter().map(decl).collect::<Vec<_>>(),
        "omega": g.bundles().iter().map(decl).collect::<Vec<_>>(),
    })
}

fn classification_json(g: &Graph) -> Value {
    let c = classify(g);
    json!({
        "fin": names(g, c.fin),
        "src": names(g, c.src),
        "sing": names(g, c.sing),
        "reg": names(g, c.reg),
    })
}

/// A report with every fixed key present and nothing computed yet.
pub fn base(g: &Graph, mode: Option<&str>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("graph".into(), graph_json(g));
    m.insert("classification".into(), classification_json(g));
    m.insert("mode".into(), mode.map_or(Value::Null, Value::from));
    m.insert("stages".into(), Value::Array(Vec::new()));
    m.insert("connecting".into(), Value::Array(Vec::new()));
    m.insert("verification".into(), Value::Null);
    m
}

fn node_ref(n: &regulim_core::graph_correspondence::BratteliNode) -> Value {
    json!({"stage": n.stage, "level": n.level, "vertex": n.vertex})
}

pub fn add_tower(m: &mut Map<String, Value>, g: &Graph, t: &StageTower) {
    let stages = t
        .stages
        .iter()
        .map(|s| {
            let blocks: Vec<Value> = s
                .provenance
                .iter()
                .zip(s.algebra.blocks())
                .map(|(p, b)| json!({"level": p.level, "vertex": g.vertex_name(p.vertex), "size": b.size}))
                .collect();
            json!({"index": s.index, "blocks": blocks, "dim": s.algebra.dim()})
        })
        .collect();
    let d = bratteli(g, t);
    let connecting = d
        .edges
        .iter()
        .map(|e| json!({"from": node_ref(&d.nodes[e.from]), "to": node_ref(&d.nodes[e.to]), "multiplicity": e.multiplicity}))
        .collect();
    m.insert("stages".into(), Value::Array(stages));
    m.insert("connecting".into(), Value::Array(connecting));
}

pub fn path_entry(g: &Graph, p: &Path) -> Value {
    json!({"path": p.display(g), "length": p.len(), "source": g.vertex_name(p.source(g))})
}

pub fn render(m: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("report values are plain JSON");
    s.push('\n');
    s
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Stages left to right, one ranked cluster each, nodes in block order.
/// Quotient blocks are dashed; a stage with no blocks gets a `0` placeholder.
pub fn dot(d: &BratteliDiagram) -> String {
    let mut out = String::from("digraph bratteli {\n  rankdir=LR;\n  node [shape=box];\n");
    for s in 0..d.num_stages() {
        out.push_str(&format!(
            "  subgraph cluster_{s} {{\n    label={};\n    rank=same;\n",
            quote(&format!("stage {s}"))
        ));
        let mut empty = true;
        for (k, n) in d.nodes.iter().enumerate().filter(|(_, n)| n.stage == s) {
            empty = false;
            let label = quote(&format!("({},{}):{}", n.level, n.vertex, n.size));
            let style = if n.kind == BlockKind::Quotient {
                ", style=dashed"
            } else {
                ""
            };
            out.push_str(&format!("    n{k} [label={label}{style}];\n"));
        }
        if empty {
            out.push_str(&format!("    z{s} [shape=plaintext, label=\"0\"];\n"));
        }
        out.push_str("  }\n");
    }
    for e in &d.edges {
        out.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", e.from, e.to, e.multiplicity));
    }
    out.push_str("}\n");
    out
}
