//! Stage algebras of regulated limits for the graph correspondence of a
//! finite graph.
//!
//! `K(X^{⊗i})` is `⊕_v M_{n_i(v)}`, one block per source vertex, where
//! `n_i(v)` counts length-`i` paths with source `v`. The left action maps
//! `Θ_{μ,ν} ↦ Σ_{r(e)=s(μ)} Θ_{μe,νe}`, so block `(i, v)` lands in block
//! `(i+1, w)` once for every edge `e` with `s(e) = w`, `r(e) = v`.
//!
//! For a regulating vertex set `V`, stage `i` is
//! `K(X^{⊗i}) ⊕ ⊕_{k<i} K(X^{⊗k})/K(X^{⊗k}·V)`: the top blocks followed by
//! the quotient blocks `(k, v)` with `v ∉ V`, by ascending level then vertex.
//! Blocks with `n_k(v) = 0` are omitted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::findim_cstar::{
    self, annihilator, kernel_ideal, quotient_fw, AlgebraError, Block, BlockIdeal, FinDimAlgebra, StarMorphism,
};
use crate::graph::{Graph, GraphError, VertexId};
use crate::graph_paths::{classify, Regulation};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum CorrespondenceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("verification failed at stage {stage}: {detail}")]
    Verification { stage: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, CorrespondenceError>;

/// `n_i(v)` for levels `0..=depth`; zero counts are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathBlockStructure {
    levels: Vec<BTreeMap<VertexId, u64>>,
}

impl PathBlockStructure {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn count(&self, i: usize, v: VertexId) -> u64 {
        self.levels[i].get(&v).copied().unwrap_or(0)
    }

    pub fn level(&self, i: usize) -> &BTreeMap<VertexId, u64> {
        &self.levels[i]
    }
}

fn require_finite(graph: &Graph) -> Result<()> {
    if graph.has_bundles() {
        Err(GraphError::HasBundles.into())
    } else {
        Ok(())
    }
}

pub fn block_structure(graph: &Graph, depth: usize) -> Result<PathBlockStructure> {
    require_finite(graph)?;
    let mut levels = vec![graph.vertices().map(|v| (v, 1)).collect::<BTreeMap<_, _>>()];
    for i in 0..depth {
        let mut next = BTreeMap::new();
        for d in graph.edges() {
            let n = levels[i].get(&d.range).copied().unwrap_or(0);
            if n > 0 {
                *next.entry(d.source).or_insert(0) += n;
            }
        }
        levels.push(next);
    }
    Ok(PathBlockStructure { levels })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Top,
    Quotient,
}

/// Where a stage block comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Provenance {
    pub kind: BlockKind,
    pub level: usize,
    pub vertex: VertexId,
}

impl Provenance {
    pub fn top(level: usize, vertex: VertexId) -> Self {
        Self {
            kind: BlockKind::Top,
            level,
            vertex,
        }
    }

    pub fn quotient(level: usize, vertex: VertexId) -> Self {
        Self {
            kind: BlockKind::Quotient,
            level,
            vertex,
        }
    }

    pub fn label(&self, graph: &Graph) -> String {
        let kind = match self.kind {
            BlockKind::Top => "top",
            BlockKind::Quotient => "quo",
        };
        format!("{kind}({},{})", self.level, graph.vertex_name(self.vertex))
    }
}

/// `K(X^{⊗i})` with blocks `top(i, v)`.
pub fn compact_algebra(graph: &Graph, pbs: &PathBlockStructure, i: usize) -> Result<FinDimAlgebra> {
    Ok(FinDimAlgebra::new(
        pbs.level(i)
            .iter()
            .map(|(&v, &n)| Block::new(Provenance::top(i, v).label(graph), n as usize))
            .collect(),
    )?)
}

/// `φ_i: K(X^{⊗i}) → K(X^{⊗i+1})`.
pub fn phi_multiplicity(graph: &Graph, i: usize) -> Result<StarMorphism> {
    let pbs = block_structure(graph, i + 1)?;
    let src = compact_algebra(graph, &pbs, i)?;
    let tgt = compact_algebra(graph, &pbs, i + 1)?;
    let mult = pbs
        .level(i + 1)
        .keys()
        .map(|&w| pbs.level(i).keys().map(|&v| edge_count(graph, w, v)).collect())
        .collect();
    Ok(StarMorphism::new(src, tgt, mult)?)
}

/// `#{e : s(e) = w, r(e) = v}`
pub fn edge_count(graph: &Graph, w: VertexId, v: VertexId) -> u64 {
    graph.edges().iter().filter(|d| d.source == w && d.range == v).count() as u64
}

/// Left action into the finite-rank operators is automatic for finite
/// graphs, so the Pimsner ideal is every existing block.
pub fn pim_blocks(graph: &Graph, i: usize) -> Result<BlockIdeal> {
    let pbs = block_structure(graph, i)?;
    let fin = classify(graph).fin;
    Ok(BlockIdeal::new(
        pbs.level(i)
            .keys()
            .filter(|v| fin.contains(v))
            .map(|&v| Provenance::top(i, v).label(graph)),
    ))
}

/// Katsura blocks via the tensor-ideal description: `(i, v)` with `v` regular.
pub fn kat_blocks(graph: &Graph, i: usize) -> Result<BlockIdeal> {
    let pbs = block_structure(graph, i)?;
    let reg = classify(graph).reg;
    Ok(BlockIdeal::new(
        pbs.level(i)
            .keys()
            .filter(|v| reg.contains(v))
            .map(|&v| Provenance::top(i, v).label(graph)),
    ))
}

/// Katsura blocks from the multiplicity columns of `φ_i`.
pub fn kat_direct(graph: &Graph, i: usize) -> Result<BlockIdeal> {
    let phi = phi_multiplicity(graph, i)?;
    Ok(annihilator(phi.source(), &kernel_ideal(&phi))?)
}

/// Every vertex emits an edge, i.e. the correspondence is full.
pub fn is_sink_free(graph: &Graph) -> bool {
    graph.vertices().all(|v| graph.edges().iter().any(|d| d.source == v))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KatComparison {
    pub by_tensor_ideal: BlockIdeal,
    pub direct: BlockIdeal,
    pub sink_free: bool,
    pub agree: bool,
}

impl KatComparison {
    /// The column computation; the tensor-ideal formula needs a full module.
    pub fn authoritative(&self) -> &BlockIdeal {
        &self.direct
    }
}

pub fn compare_kat(graph: &Graph, i: usize) -> Result<KatComparison> {
    let by_tensor_ideal = kat_blocks(graph, i)?;
    let direct = kat_direct(graph, i)?;
    Ok(KatComparison {
        agree: by_tensor_ideal == direct,
        sink_free: is_sink_free(graph),
        by_tensor_ideal,
        direct,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Toeplitz,
    Perfect,
    Min,
    Custom,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Toeplitz => "toeplitz",
            Mode::Perfect => "perfect",
            Mode::Min => "min",
            Mode::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegulatingChoice {
    pub mode: Mode,
    pub vertices: BTreeSet<VertexId>,
}

impl RegulatingChoice {
    pub fn new(graph: &Graph, mode: Mode, custom: Option<BTreeSet<VertexId>>) -> Result<Self> {
        let reg = match (mode, custom) {
            (Mode::Toeplitz, None) => Regulation::Unified,
            (Mode::Perfect, None) => Regulation::Perfect,
            (Mode::Min, None) => Regulation::Min,
            (Mode::Custom, Some(v)) => Regulation::Custom(v),
            (Mode::Custom, None) => {
                return Err(GraphError::Precondition("custom mode needs a vertex set".into()).into())
            }
            (_, Some(_)) => {
                return Err(GraphError::Precondition("vertex set only allowed in custom mode".into()).into())
            }
        };
        Ok(Self {
            mode,
            vertices: reg.vertex_set(graph)?,
        })
    }

    pub fn custom(graph: &Graph, vertices: BTreeSet<VertexId>) -> Result<Self> {
        Self::new(graph, Mode::Custom, Some(vertices))
    }

    pub fn is_perfect(&self, graph: &Graph) -> bool {
        self.vertices.is_subset(&classify(graph).reg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub index: usize,
    pub algebra: FinDimAlgebra,
    pub provenance: Vec<Provenance>,
}

fn stage_from(graph: &Graph, pbs: &PathBlockStructure, v: &BTreeSet<VertexId>, i: usize) -> Result<Stage> {
    let mut provenance: Vec<Provenance> = pbs.level(i).keys().map(|&w| Provenance::top(i, w)).collect();
    for k in 0..i {
        provenance.extend(
            pbs.level(k)
                .keys()
                .filter(|w| !v.contains(w))
                .map(|&w| Provenance::quotient(k, w)),
        );
    }
    let blocks = provenance
        .iter()
        .map(|p| Block::new(p.label(graph), pbs.count(p.level, p.vertex) as usize))
        .collect();
    Ok(Stage {
        index: i,
        algebra: FinDimAlgebra::new(blocks)?,
        provenance,
    })
}

pub fn stage(graph: &Graph, v: &BTreeSet<VertexId>, i: usize) -> Result<Stage> {
    check_regulating(graph, v)?;
    let pbs = block_structure(graph, i)?;
    stage_from(graph, &pbs, v, i)
}

fn check_regulating(graph: &Graph, v: &BTreeSet<VertexId>) -> Result<()> {
    Regulation::Custom(v.clone()).vertex_set(graph)?;
    Ok(())
}

fn connecting_from(graph: &Graph, v: &BTreeSet<VertexId>, from: &Stage, to: &Stage) -> Result<StarMorphism> {
    let mult = to
        .provenance
        .iter()
        .map(|t| {
            from.provenance
                .iter()
                .map(|s| match (t.kind, s.kind) {
                    (BlockKind::Top, BlockKind::Top) => edge_count(graph, t.vertex, s.vertex),
                    (BlockKind::Quotient, BlockKind::Top) => {
                        u64::from(t.level == s.level && t.vertex == s.vertex && !v.contains(&s.vertex))
                    }
                    (BlockKind::Quotient, BlockKind::Quotient) => u64::from(t == s),
                    (BlockKind::Top, BlockKind::Quotient) => 0,
                })
                .collect()
        })
        .collect();
    Ok(StarMorphism::new(from.algebra.clone(), to.algebra.clone(), mult)?)
}

/// `φ_i^𝒥: A_i → A_{i+1}`, `a ↦ (φ_i(a_top), a + J_i)`.
pub fn connecting(graph: &Graph, v: &BTreeSet<VertexId>, i: usize) -> Result<StarMorphism> {
    check_regulating(graph, v)?;
    let pbs = block_structure(graph, i + 1)?;
    let from = stage_from(graph, &pbs, v, i)?;
    let to = stage_from(graph, &pbs, v, i + 1)?;
    connecting_from(graph, v, &from, &to)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageTower {
    pub choice: RegulatingChoice,
    pub structure: PathBlockStructure,
    pub stages: Vec<Stage>,
    pub connecting: Vec<StarMorphism>,
}

impl StageTower {
    pub fn dims(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.algebra.dim()).collect()
    }
}

pub fn tower(graph: &Graph, choice: &RegulatingChoice, n: usize) -> Result<StageTower> {
    if n == 0 {
        return Err(GraphError::Precondition("tower needs at least one connecting map".into()).into());
    }
    check_regulating(graph, &choice.vertices)?;
    let pbs = block_structure(graph, n)?;
    let stages = (0..=n)
        .map(|i| stage_from(graph, &pbs, &choice.vertices, i))
        .collect::<Result<Vec<_>>>()?;
    let connecting = stages
        .windows(2)
        .map(|w| connecting_from(graph, &choice.vertices, &w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(StageTower {
        choice: choice.clone(),
        structure: pbs,
        stages,
        connecting,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliNode {
    pub stage: usize,
    pub label: String,
    pub kind: BlockKind,
    pub level: usize,
    pub vertex: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliEdge {
    /// Index into `nodes`.
    pub from: usize,
    pub to: usize,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BratteliDiagram {
    /// Stage count, kept explicitly since a zero stage has no nodes.
    pub stages: usize,
    pub nodes: Vec<BratteliNode>,
    pub edges: Vec<BratteliEdge>,
}

pub fn bratteli(graph: &Graph, t: &StageTower) -> BratteliDiagram {
    let mut nodes = Vec::new();
    let mut first = Vec::new();
    for s in &t.stages {
        first.push(nodes.len());
        for (p, b) in s.provenance.iter().zip(s.algebra.blocks()) {
            nodes.push(BratteliNode {
                stage: s.index,
                label: b.label.clone(),
                kind: p.kind,
                level: p.level,
                vertex: graph.vertex_name(p.vertex).to_string(),
                size: b.size,
            });
        }
    }
    let mut edges = Vec::new();
    for (i, m) in t.connecting.iter().enumerate() {
        for (tgt, row) in m.multiplicities().iter().enumerate() {
            for (src, &mult) in row.iter().enumerate() {
                if mult > 0 {
                    edges.push(BratteliEdge {
                        from: first[i] + src,
                        to: first[i + 1] + tgt,
                        multiplicity: mult,
                    });
                }
            }
        }
    }
    BratteliDiagram {
        stages: t.stages.len(),
        nodes,
        edges,
    }
}

impl BratteliDiagram {
    pub fn num_stages(&self) -> usize {
        self.stages
    }

    /// Stage algebras and connecting morphisms recovered from the diagram.
    pub fn reconstruct(&self) -> Result<(Vec<FinDimAlgebra>, Vec<StarMorphism>)> {
        let stages = self.num_stages();
        if self.nodes.iter().any(|n| n.stage >= stages) {
            return Err(GraphError::Precondition("diagram node beyond the last stage".into()).into());
        }
        let mut algebras = Vec::with_capacity(stages);
        let mut local = vec![0usize; self.nodes.len()];
        for s in 0..stages {
            let mut blocks = Vec::new();
            for (idx, n) in self.nodes.iter().enumerate().filter(|(_, n)| n.stage == s) {
                local[idx] = blocks.len();
                blocks.push(Block::new(n.label.clone(), n.size));
            }
            algebras.push(FinDimAlgebra::new(blocks)?);
        }
        let mut mults: Vec<Vec<Vec<u64>>> = (1..stages)
            .map(|s| vec![vec![0; algebras[s - 1].num_blocks()]; algebras[s].num_blocks()])
            .collect();
        for e in &self.edges {
            let s = self.nodes[e.from].stage;
            if self.nodes[e.to].stage != s + 1 {
                return Err(GraphError::Precondition("diagram edge skips a stage".into()).into());
            }
            mults[s][local[e.to]][local[e.from]] = e.multiplicity;
        }
        let maps = mults
            .into_iter()
            .enumerate()
            .map(|(s, m)| StarMorphism::new(algebras[s].clone(), algebras[s + 1].clone(), m))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok((algebras, maps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IterateReport {
    pub stage: usize,
    pub perfect: bool,
    pub carrier_dim: usize,
}

/// Rebuilds stage `i+1` as `K(X^{⊗i+1}) ⊎_φ^J A_i`, where `φ` acts by `φ_i`
/// on the top blocks and by zero on the quotient blocks, and
/// `J = K(X^{⊗i}·V)`. The carrier must match stage `i+1` block for block
/// (after relabelling `top(i, v)` as `quo(i, v)`), and `φ_J` must be the
/// connecting map.
pub fn iterate_check(graph: &Graph, v: &BTreeSet<VertexId>, i: usize) -> Result<IterateReport> {
    check_regulating(graph, v)?;
    let pbs = block_structure(graph, i + 1)?;
    let a = stage_from(graph, &pbs, v, i)?;
    let next = stage_from(graph, &pbs, v, i + 1)?;
    let k_next = compact_algebra(graph, &pbs, i + 1)?;
    let decor_mult = pbs
        .level(i + 1)
        .keys()
        .map(|&w| {
            a.provenance
                .iter()
                .map(|s| match s.kind {
                    BlockKind::Top => edge_count(graph, w, s.vertex),
                    BlockKind::Quotient => 0,
                })
                .collect()
        })
        .collect();
    let decor = StarMorphism::new(a.algebra.clone(), k_next, decor_mult)?;
    let j = BlockIdeal::new(
        a.provenance
            .iter()
            .filter(|p| p.kind == BlockKind::Top && v.contains(&p.vertex))
            .map(|p| p.label(graph)),
    );
    let q = quotient_fw(&decor, &j)?;
    findim_cstar::check_extension(&q)?;

    let fail = |detail: String| CorrespondenceError::Verification { stage: i + 1, detail };
    let carrier_prov: Vec<Provenance> = pbs
        .level(i + 1)
        .keys()
        .map(|&w| Provenance::top(i + 1, w))
        .chain(q.kept.iter().map(|&s| {
            let p = a.provenance[s];
            if p.kind == BlockKind::Top {
                Provenance::quotient(p.level, p.vertex)
            } else {
                p
            }
        }))
        .collect();
    let mut expected: Vec<(Provenance, usize)> = next
        .provenance
        .iter()
        .copied()
        .zip(next.algebra.blocks().iter().map(|b| b.size))
        .collect();
    let mut got: Vec<(Provenance, usize)> = carrier_prov
        .iter()
        .copied()
        .zip(q.carrier.blocks().iter().map(|b| b.size))
        .collect();
    expected.sort();
    got.sort();
    if let Some(k) = (0..expected.len().max(got.len())).find(|&k| expected.get(k) != got.get(k)) {
        let show = |x: Option<&(Provenance, usize)>| {
            x.map_or("nothing".to_string(), |(p, n)| format!("{}:{n}", p.label(graph)))
        };
        return Err(fail(format!(
            "expected block {}, found {}",
            show(expected.get(k)),
            show(got.get(k))
        )));
    }
    let conn = connecting_from(graph, v, &a, &next)?;
    for (t, p) in carrier_prov.iter().enumerate() {
        let row = next.provenance.iter().position(|x| x == p).expect("multisets agree");
        if q.phi_j.multiplicities()[t] != conn.multiplicities()[row] {
            return Err(fail(format!("multiplicities into {} differ", p.label(graph))));
        }
    }
    Ok(IterateReport {
        stage: i + 1,
        perfect: q.perfect,
        carrier_dim: q.carrier.dim(),
    })
}

/// For `V ⊆ V′`, every block of stage `i` under `V′` is a block of stage `i`
/// under `V` with the same size, so the stagewise quotient map is onto.
pub fn surjection_check(graph: &Graph, v: &BTreeSet<VertexId>, v_prime: &BTreeSet<VertexId>, i: usize) -> Result<()> {
    if !v.is_subset(v_prime) {
        return Err(GraphError::Precondition("V must be contained in V′".into()).into());
    }
    let small = stage(graph, v_prime, i)?;
    let big = stage(graph, v, i)?;
    for b in small.algebra.blocks() {
        if !big.algebra.blocks().contains(b) {
            return Err(CorrespondenceError::Verification {
                stage: i,
                detail: format!("block {} has no preimage", b.label),
            });
        }
    }
    Ok(())
}

/// Dimension-group data at one stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K0Stage {
    /// Rank of `K₀(A_i) = ℤ^{#blocks}`.
    pub rank: usize,
    /// The connecting multiplicity matrix out of stage `i`, if there is one.
    pub matrix: Option<Vec<Vec<u64>>>,
}

pub fn k0_stage(t: &StageTower, i: usize) -> K0Stage {
    K0Stage {
        rank: t.stages[i].algebra.num_blocks(),
        matrix: t.connecting.get(i).map(|m| m.multiplicities().to_vec()),
    }
}
