//! One function per subcommand. Each takes file contents rather than paths
//! so tests can drive them without touching the filesystem.

use std::collections::BTreeSet;

use clap::ValueEnum;
use regulim_core::findim_cstar::{commutative_duality_check, AlgebraError};
use regulim_core::fock_oracle::{
    embedding_multiplicities, gauge_grading_check, relative_stability, rep_axiom_check, span_stability,
};
use regulim_core::graph_correspondence::{bratteli, iterate_check, tower, BlockKind, StageTower};
use regulim_core::graph_paths::{classify, converges, member, paths_upto};
use regulim_core::{Graph, Mode, PathPoint, RegulatingChoice, Regulation, VertexId};
use serde_json::{json, Value};

use crate::{graph_file, map_file, report, seq_spec, CliError, Outcome, Result, EXIT_MISMATCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathMode {
    Unified,
    Perfect,
    Min,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgebraMode {
    Toeplitz,
    Perfect,
    Min,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Dot,
}

impl From<AlgebraMode> for Mode {
    fn from(m: AlgebraMode) -> Self {
        match m {
            AlgebraMode::Toeplitz => Mode::Toeplitz,
            AlgebraMode::Perfect => Mode::Perfect,
            AlgebraMode::Min => Mode::Min,
            AlgebraMode::Custom => Mode::Custom,
        }
    }
}

impl PathMode {
    fn name(self) -> &'static str {
        match self {
            PathMode::Unified => "unified",
            PathMode::Perfect => "perfect",
            PathMode::Min => "min",
            PathMode::Custom => "custom",
        }
    }
}

/// Comma-separated vertex names; empty means the empty set.
fn vertex_set(g: &Graph, text: &str) -> Result<BTreeSet<VertexId>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| g.vertex(s).map_err(CliError::input))
        .collect()
}

fn regulation(g: &Graph, mode: PathMode, vertices: Option<&str>) -> Result<Regulation> {
    let r = match (mode, vertices) {
        (PathMode::Custom, Some(v)) => Regulation::Custom(vertex_set(g, v)?),
        (PathMode::Custom, None) => return Err(CliError::input("--mode custom needs --vertices")),
        (_, Some(_)) => return Err(CliError::input("--vertices is only allowed with --mode custom")),
        (PathMode::Unified, None) => Regulation::Unified,
        (PathMode::Perfect, None) => Regulation::Perfect,
        (PathMode::Min, None) => Regulation::Min,
    };
    r.vertex_set(g).map_err(CliError::input)?;
    Ok(r)
}

fn choice(g: &Graph, mode: AlgebraMode, vertices: Option<&str>) -> Result<RegulatingChoice> {
    let custom = vertices.map(|v| vertex_set(g, v)).transpose()?;
    RegulatingChoice::new(g, mode.into(), custom).map_err(CliError::input)
}

fn finite_graph(text: &str) -> Result<Graph> {
    let g = graph_file::parse(text)?;
    if g.has_bundles() {
        return Err(CliError::input("algebra side requires finite graph"));
    }
    Ok(g)
}

fn build_tower(g: &Graph, c: &RegulatingChoice, stages: usize) -> Result<StageTower> {
    if stages == 0 {
        return Err(CliError::input("--stages must be at least 1"));
    }
    tower(g, c, stages).map_err(CliError::input)
}

pub fn classify_cmd(text: &str) -> Result<Outcome> {
    let g = graph_file::parse(text)?;
    Ok(Outcome::ok(report::render(report::base(&g, None))))
}

pub fn boundary(
    text: &str,
    mode: PathMode,
    vertices: Option<&str>,
    max_len: usize,
    bundle_bound: u64,
) -> Result<Outcome> {
    let g = graph_file::parse(text)?;
    let r = regulation(&g, mode, vertices)?;
    let mut entries = Vec::new();
    for p in paths_upto(&g, max_len, Some(bundle_bound)).map_err(CliError::input)? {
        if member(&g, &PathPoint::Finite(p.clone()), &r).map_err(CliError::input)? {
            entries.push(report::path_entry(&g, &p));
        }
    }
    let mut m = report::base(&g, Some(mode.name()));
    m.insert("paths".into(), Value::Array(entries));
    Ok(Outcome::ok(report::render(m)))
}

pub fn core(text: &str, mode: AlgebraMode, vertices: Option<&str>, stages: usize, emit: Emit) -> Result<Outcome> {
    let g = finite_graph(text)?;
    let c = choice(&g, mode, vertices)?;
    let t = build_tower(&g, &c, stages)?;
    let out = match emit {
        Emit::Dot => report::dot(&bratteli(&g, &t)),
        Emit::Json => {
            let mut m = report::base(&g, Some(&c.mode.to_string()));
            report::add_tower(&mut m, &g, &t);
            report::render(m)
        }
    };
    Ok(Outcome::ok(out))
}

/// Breaks the map into stage `s` by one copy so `verify` has something to
/// catch. Hidden from `--help`.
fn inject_fault(t: &mut StageTower, s: usize) -> Result<()> {
    if s == 0 || s > t.connecting.len() {
        return Err(CliError::input(format!(
            "--inject-fault stage must lie in 1..={}",
            t.connecting.len()
        )));
    }
    let m = &t.connecting[s - 1];
    let mut mult = m.multiplicities().to_vec();
    let cell = mult
        .iter_mut()
        .flat_map(|row| row.iter_mut())
        .find(|x| **x > 0)
        .ok_or_else(|| CliError::input(format!("map into stage {s} is zero")))?;
    *cell -= 1;
    t.connecting[s - 1] =
        regulim_core::StarMorphism::new(m.source().clone(), m.target().clone(), mult).map_err(CliError::input)?;
    Ok(())
}

/// Top-to-top part of the connecting map out of stage `i`.
fn top_block(t: &StageTower, i: usize) -> Vec<Vec<u64>> {
    let tops = |k: usize| -> Vec<usize> {
        t.stages[k]
            .provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| p.kind == BlockKind::Top)
            .map(|(b, _)| b)
            .collect()
    };
    let (cols, rows) = (tops(i), tops(i + 1));
    rows.iter()
        .map(|&r| cols.iter().map(|&c| t.connecting[i].multiplicity(r, c)).collect())
        .collect()
}

pub fn verify(
    text: &str,
    mode: AlgebraMode,
    vertices: Option<&str>,
    stages: usize,
    fault: Option<usize>,
) -> Result<Outcome> {
    let g = finite_graph(text)?;
    let c = choice(&g, mode, vertices)?;
    let mut t = build_tower(&g, &c, stages)?;
    if let Some(s) = fault {
        inject_fault(&mut t, s)?;
    }
    let n = stages;
    let mut failures: Vec<String> = Vec::new();
    let mut skipped: Vec<String> = Vec::new();

    if let Err(e) = rep_axiom_check(&g, n + 1) {
        failures.push(format!("representation axioms: {e}"));
    }
    for i in 0..=n {
        if let Err(e) = gauge_grading_check(&g, i, i + 1) {
            failures.push(format!("stage {i}: gauge grading: {e}"));
        }
    }
    for i in 0..n {
        if let Err(e) = iterate_check(&g, &c.vertices, i) {
            failures.push(format!("stage {}: iterate: {e}", i + 1));
        }
        let sq = |k: usize| -> usize { t.structure.level(k).values().map(|&x| (x * x) as usize).sum() };
        let removed: usize = c
            .vertices
            .iter()
            .map(|&v| (t.structure.count(i, v) as usize).pow(2))
            .sum();
        let (next, here) = (t.stages[i + 1].algebra.dim(), t.stages[i].algebra.dim());
        if next + removed != sq(i + 1) + here {
            failures.push(format!(
                "stage {}: dimension law: {next} ≠ {} + {here} − {removed}",
                i + 1,
                sq(i + 1)
            ));
        }
        let m = &t.connecting[i];
        if !m.is_unital() {
            failures.push(format!(
                "stage {}: connecting map into stage {} is not unital",
                i + 1,
                i + 1
            ));
        }
        match embedding_multiplicities(&g, i) {
            Ok(fock) if fock != top_block(&t, i) => failures.push(format!(
                "stage {}: top-block multiplicities {:?} differ from the Fock space {:?}",
                i + 1,
                top_block(&t, i),
                fock
            )),
            Ok(_) => {}
            Err(e) => failures.push(format!("stage {}: embedding multiplicities: {e}", i + 1)),
        }
    }

    let stage_dims = t.dims();
    let oracle_dims: Value = if c.vertices.is_subset(&classify(&g).reg) {
        let mut dims = Vec::new();
        for (i, &want) in stage_dims.iter().enumerate() {
            let d = if c.vertices.is_empty() {
                span_stability(&g, i)
            } else {
                relative_stability(&g, &c.vertices, i)
            };
            match d {
                Ok(d) => {
                    if d != want {
                        failures.push(format!("stage {i}: oracle dimension {d} ≠ stage dimension {want}"));
                    }
                    dims.push(Value::from(d));
                }
                Err(e) => {
                    failures.push(format!("stage {i}: oracle: {e}"));
                    dims.push(Value::Null);
                }
            }
        }
        Value::Array(dims)
    } else {
        skipped.push("oracle dimensions: the regulating set is not inside reg".into());
        Value::Null
    };

    let ok = failures.is_empty();
    let mut m = report::base(&g, Some(&c.mode.to_string()));
    report::add_tower(&mut m, &g, &t);
    m.insert(
        "verification".into(),
        json!({
            "oracle_dims": oracle_dims,
            "stage_dims": stage_dims,
            "match": ok,
            "failures": failures,
            "skipped": skipped,
        }),
    );
    let stderr = failures.iter().map(|f| format!("mismatch: {f}\n")).collect();
    Ok(Outcome {
        stdout: report::render(m),
        stderr,
        code: if ok { crate::EXIT_OK } else { EXIT_MISMATCH },
    })
}

pub fn converge(text: &str, mode: PathMode, vertices: Option<&str>, seq: &str, target: &str) -> Result<Outcome> {
    let g = graph_file::parse(text)?;
    let r = regulation(&g, mode, vertices)?;
    let s = seq_spec::parse_sequence(&g, seq)?;
    let x = seq_spec::parse_target(&g, target)?;
    let verdict = converges(&g, &s, &x, &r).map_err(CliError::input)?;
    Ok(Outcome::ok(format!("{verdict}\n")))
}

pub fn duality(text: &str) -> Result<Outcome> {
    let f = map_file::parse(text)?;
    match commutative_duality_check(&f) {
        Ok(rep) => {
            let spectrum: Vec<Value> = rep
                .spectrum
                .iter()
                .map(|(block, side, p)| json!({"block": block, "side": format!("{side:?}"), "point": p.to_string()}))
                .collect();
            let out = json!({
                "pass": true,
                "blocks": rep.blocks,
                "x_points": rep.x_points,
                "y_points": rep.y_points,
                "spectrum": spectrum,
            });
            Ok(Outcome::ok(format!(
                "{}\n",
                serde_json::to_string_pretty(&out).expect("plain JSON")
            )))
        }
        Err(AlgebraError::Verification(msg)) => Ok(Outcome {
            stdout: format!(
                "{}\n",
                serde_json::to_string_pretty(&json!({"pass": false, "failure": msg})).expect("plain JSON")
            ),
            stderr: format!("mismatch: {msg}\n"),
            code: EXIT_MISMATCH,
        }),
        Err(e) => Err(CliError::input(e)),
    }
}
