//! Brute-force check of the stage algebras on a truncated Fock space.
//!
//! The Fock space of a finite graph has orthonormal basis `|μ⟩`, one per
//! path. Truncating at depth `N` keeps paths of length `≤ N`. The creation
//! operator `T_e` sends `|μ⟩` to `|eμ⟩` when `s(e) = r(μ)`, and kills level
//! `N`. Everything here is built from these matrices and exact rank
//! computations, without reference to block structures.

use std::collections::{BTreeSet, HashMap};

use num_traits::One;
use thiserror::Error;

use crate::graph::{EdgeRef, Graph, GraphError, Path, VertexId};
use crate::graph_paths::{classify, paths};
use crate::linalg::{SpanBasis, SparseMatrix, SparseVec};
use crate::scalar::GaussRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("truncation too small: {0}")]
    Unstable(String),
}

pub type Result<T> = std::result::Result<T, FockError>;

/// Paths of length `≤ depth`, grouped by level, each level in path order.
#[derive(Clone, Debug)]
pub struct FockBasis {
    graph: Graph,
    depth: usize,
    paths: Vec<Path>,
    levels: Vec<usize>,
    index: HashMap<Path, usize>,
}

impl FockBasis {
    pub fn new(graph: &Graph, depth: usize) -> Result<Self> {
        if graph.has_bundles() {
            return Err(GraphError::HasBundles.into());
        }
        let mut all = Vec::new();
        let mut levels = Vec::new();
        for k in 0..=depth {
            for p in paths(graph, k, None)? {
                levels.push(k);
                all.push(p);
            }
        }
        let index = all.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(Self {
            graph: graph.clone(),
            depth,
            paths: all,
            levels,
            index,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.paths.len()
    }

    pub fn path(&self, k: usize) -> &Path {
        &self.paths[k]
    }

    pub fn level(&self, k: usize) -> usize {
        self.levels[k]
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// `T_e`, a 0/1 matrix.
    pub fn creation(&self, e: EdgeRef) -> Result<SparseMatrix> {
        if !matches!(e, EdgeRef::Edge(_)) {
            return Err(GraphError::UnknownEdge(format!("{e}")).into());
        }
        self.graph.check_edge(e)?;
        let mut t = SparseMatrix::zeros(self.dim());
        for (k, mu) in self.paths.iter().enumerate() {
            if mu.len() == self.depth || self.graph.s(e) != mu.range() {
                continue;
            }
            let mut edges = vec![e];
            edges.extend_from_slice(mu.edges());
            let target = self.index[&Path::new(&self.graph, edges)?];
            t.set(target, k, GaussRational::one());
        }
        Ok(t)
    }

    /// Projection onto `span{|μ⟩ : r(μ) = v}`.
    pub fn vertex_proj(&self, v: VertexId) -> SparseMatrix {
        let mut p = SparseMatrix::zeros(self.dim());
        for (k, mu) in self.paths.iter().enumerate() {
            if mu.range() == v {
                p.set(k, k, GaussRational::one());
            }
        }
        p
    }

    /// `T_μ = T_{e₁}⋯T_{eₙ}`; the empty path at `v` gives `p_v`.
    pub fn path_operator(&self, mu: &Path) -> Result<SparseMatrix> {
        let mut op = self.vertex_proj(mu.source(&self.graph));
        for &e in mu.edges().iter().rev() {
            op = self.creation(e)?.mul(&op);
        }
        Ok(op)
    }

    /// `d_v = p_v − Σ_{r(e)=v} T_e T_e^*`
    pub fn defect(&self, v: VertexId) -> Result<SparseMatrix> {
        let mut d = self.vertex_proj(v);
        for e in self.graph.edges_into(v) {
            let t = self.creation(e)?;
            d = d.sub(&t.mul(&t.adjoint()));
        }
        Ok(d)
    }

    /// Whether `m` maps every level subspace into itself.
    pub fn is_level_preserving(&self, m: &SparseMatrix) -> bool {
        m.entries().all(|(i, j, _)| self.levels[i] == self.levels[j])
    }

    /// `m` with columns outside levels `< cut` zeroed.
    fn below(&self, m: &SparseMatrix, cut: usize) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.dim());
        for (i, j, x) in m.entries() {
            if self.levels[j] < cut {
                out.set(i, j, x.clone());
            }
        }
        out
    }
}

pub fn creation(graph: &Graph, e: EdgeRef, depth: usize) -> Result<SparseMatrix> {
    FockBasis::new(graph, depth)?.creation(e)
}

pub fn vertex_proj(graph: &Graph, v: VertexId, depth: usize) -> Result<SparseMatrix> {
    Ok(FockBasis::new(graph, depth)?.vertex_proj(v))
}

pub fn defect(graph: &Graph, v: VertexId, depth: usize) -> Result<SparseMatrix> {
    FockBasis::new(graph, depth)?.defect(v)
}

/// Checks `T_e^* T_f = δ_{e,f} p_{s(e)}` below the truncation level,
/// `p_v T_e = δ_{v,r(e)} T_e`, and `Σ_v p_v = 1`.
pub fn rep_axiom_check(graph: &Graph, depth: usize) -> Result<()> {
    let basis = FockBasis::new(graph, depth)?;
    let ts: Vec<(EdgeRef, SparseMatrix)> = graph
        .simple_edges()
        .map(|e| basis.creation(e).map(|t| (e, t)))
        .collect::<Result<_>>()?;
    let projs: Vec<SparseMatrix> = graph.vertices().map(|v| basis.vertex_proj(v)).collect();
    for (e, te) in &ts {
        for (f, tf) in &ts {
            let lhs = basis.below(&te.adjoint().mul(tf), depth);
            let rhs = if e == f {
                basis.below(&projs[graph.s(*e)], depth)
            } else {
                SparseMatrix::zeros(basis.dim())
            };
            if lhs != rhs {
                return Err(FockError::Verification(format!(
                    "T_{}^* T_{} on levels below {depth}",
                    graph.edge_name(*e),
                    graph.edge_name(*f)
                )));
            }
        }
        for v in graph.vertices() {
            let lhs = projs[v].mul(te);
            let rhs = if graph.r(*e) == v {
                te.clone()
            } else {
                SparseMatrix::zeros(basis.dim())
            };
            if lhs != rhs {
                return Err(FockError::Verification(format!(
                    "p_{} T_{}",
                    graph.vertex_name(v),
                    graph.edge_name(*e)
                )));
            }
        }
    }
    let total = projs.iter().fold(SparseMatrix::zeros(basis.dim()), |acc, p| acc.add(p));
    if total != SparseMatrix::identity(basis.dim()) {
        return Err(FockError::Verification("vertex projections sum to 1".into()));
    }
    Ok(())
}

/// The spanning operators `T_μ T_ν^*`, `|μ| = |ν| ≤ i`, `s(μ) = s(ν)`.
pub fn core_generators(basis: &FockBasis, i: usize) -> Result<Vec<SparseMatrix>> {
    let graph = basis.graph();
    let mut out = Vec::new();
    for k in 0..=i {
        let level = paths(graph, k, None)?;
        let ops: Vec<SparseMatrix> = level.iter().map(|p| basis.path_operator(p)).collect::<Result<_>>()?;
        let adj: Vec<SparseMatrix> = ops.iter().map(SparseMatrix::adjoint).collect();
        for (a, mu) in level.iter().enumerate() {
            for (b, nu) in level.iter().enumerate() {
                if mu.source(graph) == nu.source(graph) {
                    out.push(ops[a].mul(&adj[b]));
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CoreSpan {
    pub basis: SpanBasis,
    pub dim: usize,
}

pub fn toeplitz_core_span(graph: &Graph, i: usize, depth: usize) -> Result<CoreSpan> {
    if depth < i {
        return Err(GraphError::Precondition("truncation depth below the stage".into()).into());
    }
    let basis = FockBasis::new(graph, depth)?;
    let span = SpanBasis::from_vectors(core_generators(&basis, i)?.iter().map(SparseMatrix::vectorize));
    Ok(CoreSpan {
        dim: span.rank(),
        basis: span,
    })
}

/// Span dimensions at depth `i` and `i + 1`; they must agree.
pub fn span_stability(graph: &Graph, i: usize) -> Result<usize> {
    let a = toeplitz_core_span(graph, i, i)?.dim;
    let b = toeplitz_core_span(graph, i, i + 1)?.dim;
    if a != b {
        return Err(FockError::Unstable(format!(
            "span at stage {i}: {a} at depth {i}, {b} at depth {}",
            i + 1
        )));
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RelativeCore {
    pub span_dim: usize,
    pub ideal_dim: usize,
    pub relative_dim: usize,
    pub rounds: usize,
}

/// Rounds of closure allowed before the ideal computation is abandoned.
const MAX_ROUNDS: usize = 64;

/// Dimension of `B_{[0,i]}` modulo the ideal generated by the defects
/// `{d_v : v ∈ V}`.
///
/// The ideal is grown from the defects by multiplying on either side by the
/// spanning operators and by conjugating `x ↦ T_e x T_f^*`; only products
/// lying in `B_{[0,i]}` are kept. Conjugation is needed because the kernel
/// consists of `T_μ d_v T_ν^*`, which products inside `B_{[0,i]}` alone
/// cannot reach from `d_v`.
pub fn relative_core_dim(graph: &Graph, v: &BTreeSet<VertexId>, i: usize, depth: usize) -> Result<RelativeCore> {
    let reg = classify(graph).reg;
    if !v.is_subset(&reg) {
        return Err(GraphError::Precondition("regulating vertices must be regular".into()).into());
    }
    if depth < i + 1 {
        return Err(GraphError::Precondition("defect ideals need one guard level".into()).into());
    }
    let basis = FockBasis::new(graph, depth)?;
    let gens = core_generators(&basis, i)?;
    let span = SpanBasis::from_vectors(gens.iter().map(SparseMatrix::vectorize));
    let ts: Vec<SparseMatrix> = graph.simple_edges().map(|e| basis.creation(e)).collect::<Result<_>>()?;
    let ts_adj: Vec<SparseMatrix> = ts.iter().map(SparseMatrix::adjoint).collect();

    let mut ideal = SpanBasis::new();
    let consider = |x: SparseMatrix, ideal: &mut SpanBasis, next: &mut Vec<SparseMatrix>| {
        let vec = x.vectorize();
        if span.contains(&vec) && ideal.insert(vec) {
            next.push(x);
        }
    };
    // the defects seed the search even when they fall outside the span
    let mut frontier: Vec<SparseMatrix> = Vec::new();
    for &w in v {
        let d = basis.defect(w)?;
        let vec = d.vectorize();
        if span.contains(&vec) {
            ideal.insert(vec);
        }
        frontier.push(d);
    }
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > MAX_ROUNDS {
            return Err(FockError::Unstable(format!(
                "ideal did not stabilize at stage {i}, depth {depth}"
            )));
        }
        let mut next = Vec::new();
        for x in &frontier {
            for g in &gens {
                consider(g.mul(x), &mut ideal, &mut next);
                consider(x.mul(g), &mut ideal, &mut next);
            }
            for te in &ts {
                let left = te.mul(x);
                for tf_adj in &ts_adj {
                    consider(left.mul(tf_adj), &mut ideal, &mut next);
                }
            }
        }
        frontier = next;
    }
    Ok(RelativeCore {
        span_dim: span.rank(),
        ideal_dim: ideal.rank(),
        relative_dim: span.rank() - ideal.rank(),
        rounds,
    })
}

/// Relative dimensions at depth `i + 1` and `i + 2`; they must agree.
pub fn relative_stability(graph: &Graph, v: &BTreeSet<VertexId>, i: usize) -> Result<usize> {
    let a = relative_core_dim(graph, v, i, i + 1)?.relative_dim;
    let b = relative_core_dim(graph, v, i, i + 2)?.relative_dim;
    if a != b {
        return Err(FockError::Unstable(format!(
            "relative core at stage {i}: {a} at depth {}, {b} at depth {}",
            i + 1,
            i + 2
        )));
    }
    Ok(a)
}

/// Every spanning operator of `B_{[0,i]}` preserves the level grading.
pub fn gauge_grading_check(graph: &Graph, i: usize, depth: usize) -> Result<()> {
    let basis = FockBasis::new(graph, depth)?;
    for (k, g) in core_generators(&basis, i)?.iter().enumerate() {
        if !basis.is_level_preserving(g) {
            return Err(FockError::Verification(format!("spanning operator #{k} mixes levels")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepIdealReport {
    /// Vertices receiving no edge: their projections live on level 0 only.
    pub level_zero_vertices: Vec<VertexId>,
}

/// No nonzero combination of vertex projections lies in
/// `span{T_e T_f^*}`, so the Fock representation has zero representation
/// ideal.
pub fn rep_ideal_check(graph: &Graph, depth: usize) -> Result<RepIdealReport> {
    if depth < 2 {
        return Err(GraphError::Precondition("depth must be at least 2".into()).into());
    }
    let basis = FockBasis::new(graph, depth)?;
    let ts: Vec<SparseMatrix> = graph.simple_edges().map(|e| basis.creation(e)).collect::<Result<_>>()?;
    let rank_one: Vec<SparseVec> = ts
        .iter()
        .flat_map(|te| ts.iter().map(move |tf| te.mul(&tf.adjoint()).vectorize()))
        .collect();
    let projs: Vec<SparseVec> = graph.vertices().map(|v| basis.vertex_proj(v).vectorize()).collect();
    let r_t = SpanBasis::from_vectors(rank_one.iter().cloned()).rank();
    let r_p = SpanBasis::from_vectors(projs.iter().cloned()).rank();
    let r_all = SpanBasis::from_vectors(rank_one.into_iter().chain(projs)).rank();
    if r_all != r_t + r_p {
        return Err(FockError::Verification(
            "a combination of vertex projections lies in span{T_e T_f^*}".into(),
        ));
    }
    let src = classify(graph).src;
    Ok(RepIdealReport {
        level_zero_vertices: src.into_iter().collect(),
    })
}

/// Multiplicities of `φ_i` read off the Fock space: `T_μ T_μ^*` restricted
/// to level `i + 1` is `Σ_e |μe⟩⟨μe|`; counting those vectors by source
/// gives the number of copies of block `s(μ)` inside each level-`i+1` block.
///
/// Rows and columns follow the vertices with `n_{i+1} > 0` and `n_i > 0`.
pub fn embedding_multiplicities(graph: &Graph, i: usize) -> Result<Vec<Vec<u64>>> {
    let basis = FockBasis::new(graph, i + 1)?;
    let level_i = paths(graph, i, None)?;
    let level_next = paths(graph, i + 1, None)?;
    let rows: BTreeSet<VertexId> = level_next.iter().map(|p| p.source(graph)).collect();
    let cols: BTreeSet<VertexId> = level_i.iter().map(|p| p.source(graph)).collect();
    let mut m = vec![vec![0u64; cols.len()]; rows.len()];
    let mut done = BTreeSet::new();
    for mu in &level_i {
        let v = mu.source(graph);
        // one representative per block
        if !done.insert(v) {
            continue;
        }
        let t = basis.path_operator(mu)?;
        let proj = t.mul(&t.adjoint());
        let c = cols.iter().position(|&x| x == v).expect("column");
        for (a, b, x) in proj.entries() {
            if a == b && basis.level(a) == i + 1 && *x == GaussRational::one() {
                let w = basis.path(a).source(graph);
                let r = rows.iter().position(|&y| y == w).expect("row");
                m[r][c] += 1;
            }
        }
    }
    Ok(m)
}
