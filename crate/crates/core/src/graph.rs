//! Directed graphs with finitely many vertices and edges, plus optional
//! ω-bundles of parallel edges.
//!
//! Conventions: a path `e₁e₂…eₙ` has `s(eᵢ) = r(eᵢ₊₁)`; it is extended on the
//! source side. `range(μ) = r(e₁)`, `source(μ) = s(eₙ)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("edges `{0}` and `{1}` are not composable")]
    NotComposable(String, String),
    #[error("enumeration reaches bundle `{0}`; a bundle bound is required")]
    Unbounded(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("`{0}` is not a point of the chosen limit")]
    NotMember(String),
    #[error("algebra side requires finite graph")]
    HasBundles,
}

pub type Result<T> = std::result::Result<T, GraphError>;

pub type VertexId = usize;

/// An edge: a simple edge by index, or member `k` of a bundle.
///
/// The derived order is the global edge order: simple edges in declaration
/// order, then bundles in declaration order, bundle members by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeRef {
    Edge(usize),
    Bundle(usize, u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeDecl {
    pub id: String,
    pub source: VertexId,
    pub range: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<EdgeDecl>,
    bundles: Vec<EdgeDecl>,
    vertex_index: BTreeMap<String, VertexId>,
    edge_index: BTreeMap<String, EdgeRef>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<VertexId> {
        if self.vertex_index.contains_key(name) {
            return Err(GraphError::DuplicateId(name.to_string()));
        }
        let id = self.vertices.len();
        self.vertices.push(name.to_string());
        self.vertex_index.insert(name.to_string(), id);
        Ok(id)
    }

    fn decl(&self, id: &str, source: &str, range: &str) -> Result<EdgeDecl> {
        if self.edge_index.contains_key(id) {
            return Err(GraphError::DuplicateId(id.to_string()));
        }
        Ok(EdgeDecl {
            id: id.to_string(),
            source: self.vertex(source)?,
            range: self.vertex(range)?,
        })
    }

    pub fn add_edge(&mut self, id: &str, source: &str, range: &str) -> Result<EdgeRef> {
        let d = self.decl(id, source, range)?;
        let e = EdgeRef::Edge(self.edges.len());
        self.edges.push(d);
        self.edge_index.insert(id.to_string(), e);
        Ok(e)
    }

    /// Adds countably many parallel edges `id[0], id[1], …` from `source` to `range`.
    pub fn add_bundle(&mut self, id: &str, source: &str, range: &str) -> Result<usize> {
        let d = self.decl(id, source, range)?;
        let b = self.bundles.len();
        self.bundles.push(d);
        self.edge_index.insert(id.to_string(), EdgeRef::Bundle(b, 0));
        Ok(b)
    }

    /// Convenience constructor; panics on invalid input.
    pub fn from_parts(vertices: &[&str], edges: &[(&str, &str, &str)], bundles: &[(&str, &str, &str)]) -> Self {
        let mut g = Graph::new();
        for v in vertices {
            g.add_vertex(v).expect("vertex");
        }
        for (id, s, r) in edges {
            g.add_edge(id, s, r).expect("edge");
        }
        for (id, s, r) in bundles {
            g.add_bundle(id, s, r).expect("bundle");
        }
        g
    }

    pub fn vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.vertices.len()
    }

    pub fn edges(&self) -> &[EdgeDecl] {
        &self.edges
    }

    pub fn bundles(&self) -> &[EdgeDecl] {
        &self.bundles
    }

    pub fn has_bundles(&self) -> bool {
        !self.bundles.is_empty()
    }

    pub fn simple_edges(&self) -> impl Iterator<Item = EdgeRef> + '_ {
        (0..self.edges.len()).map(EdgeRef::Edge)
    }

    /// Looks up a simple edge by id.
    pub fn edge(&self, id: &str) -> Result<EdgeRef> {
        match self.edge_index.get(id) {
            Some(e @ EdgeRef::Edge(_)) => Ok(*e),
            _ => Err(GraphError::UnknownEdge(id.to_string())),
        }
    }

    pub fn bundle(&self, id: &str) -> Result<usize> {
        match self.edge_index.get(id) {
            Some(EdgeRef::Bundle(b, _)) => Ok(*b),
            _ => Err(GraphError::UnknownEdge(id.to_string())),
        }
    }

    fn decl_of(&self, e: EdgeRef) -> &EdgeDecl {
        match e {
            EdgeRef::Edge(i) => &self.edges[i],
            EdgeRef::Bundle(b, _) => &self.bundles[b],
        }
    }

    pub fn s(&self, e: EdgeRef) -> VertexId {
        self.decl_of(e).source
    }

    pub fn r(&self, e: EdgeRef) -> VertexId {
        self.decl_of(e).range
    }

    pub fn edge_name(&self, e: EdgeRef) -> String {
        match e {
            EdgeRef::Edge(i) => self.edges[i].id.clone(),
            EdgeRef::Bundle(b, k) => format!("{}[{k}]", self.bundles[b].id),
        }
    }

    /// Edges (including bundles, as their index-0 representative) with range `v`.
    pub fn edges_into(&self, v: VertexId) -> impl Iterator<Item = EdgeRef> + '_ {
        let simple = self
            .edges
            .iter()
            .enumerate()
            .filter(move |(_, d)| d.range == v)
            .map(|(i, _)| EdgeRef::Edge(i));
        let bundles = self
            .bundles
            .iter()
            .enumerate()
            .filter(move |(_, d)| d.range == v)
            .map(|(b, _)| EdgeRef::Bundle(b, 0));
        simple.chain(bundles)
    }

    /// Validates an edge reference against this graph.
    pub fn check_edge(&self, e: EdgeRef) -> Result<()> {
        let ok = match e {
            EdgeRef::Edge(i) => i < self.edges.len(),
            EdgeRef::Bundle(b, _) => b < self.bundles.len(),
        };
        if ok {
            Ok(())
        } else {
            Err(GraphError::UnknownEdge(format!("{e:?}")))
        }
    }
}

/// A finite path. The empty path at `v` has `base = v`; otherwise `base` is
/// the range of the first edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    base: VertexId,
    edges: Vec<EdgeRef>,
}

impl Path {
    pub fn vertex(v: VertexId) -> Self {
        Self {
            base: v,
            edges: Vec::new(),
        }
    }

    pub fn new(graph: &Graph, edges: Vec<EdgeRef>) -> Result<Self> {
        let first = *edges
            .first()
            .ok_or_else(|| GraphError::Precondition("use Path::vertex for empty paths".into()))?;
        for &e in &edges {
            graph.check_edge(e)?;
        }
        for w in edges.windows(2) {
            if graph.s(w[0]) != graph.r(w[1]) {
                return Err(GraphError::NotComposable(graph.edge_name(w[0]), graph.edge_name(w[1])));
            }
        }
        Ok(Self {
            base: graph.r(first),
            edges,
        })
    }

    /// Parses a whitespace- or comma-separated list of simple edge ids and
    /// `bundle[k]` tokens.
    pub fn parse(graph: &Graph, text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(v) = text.strip_prefix('@') {
            return Ok(Path::vertex(graph.vertex(v.trim())?));
        }
        let edges = parse_edge_list(graph, text)?;
        if edges.is_empty() {
            return Err(GraphError::Precondition("empty path needs a base vertex".into()));
        }
        Path::new(graph, edges)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeRef] {
        &self.edges
    }

    pub fn range(&self) -> VertexId {
        self.base
    }

    pub fn source(&self, graph: &Graph) -> VertexId {
        self.edges.last().map_or(self.base, |&e| graph.s(e))
    }

    /// `μe`, requiring `r(e) = source(μ)`.
    pub fn extend(&self, graph: &Graph, e: EdgeRef) -> Result<Self> {
        if graph.r(e) != self.source(graph) {
            let last = self
                .edges
                .last()
                .map_or_else(|| graph.vertex_name(self.base).to_string(), |&l| graph.edge_name(l));
            return Err(GraphError::NotComposable(last, graph.edge_name(e)));
        }
        let mut edges = self.edges.clone();
        edges.push(e);
        Ok(Self { base: self.base, edges })
    }

    pub fn truncate(&self, k: usize) -> Self {
        Self {
            base: self.base,
            edges: self.edges[..k.min(self.edges.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        self.base == other.base && other.edges.starts_with(&self.edges)
    }

    pub fn display(&self, graph: &Graph) -> String {
        if self.edges.is_empty() {
            graph.vertex_name(self.base).to_string()
        } else {
            self.edges
                .iter()
                .map(|&e| graph.edge_name(e))
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

/// Comma- or whitespace-separated edge ids and `bundle[k]` tokens.
pub fn parse_edge_list(graph: &Graph, text: &str) -> Result<Vec<EdgeRef>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|tok| parse_edge_token(graph, tok))
        .collect()
}

pub fn parse_edge_token(graph: &Graph, tok: &str) -> Result<EdgeRef> {
    if let Some((name, rest)) = tok.split_once('[') {
        let idx = rest
            .strip_suffix(']')
            .and_then(|n| n.parse::<u64>().ok())
            .ok_or_else(|| GraphError::UnknownEdge(tok.to_string()))?;
        return Ok(EdgeRef::Bundle(graph.bundle(name)?, idx));
    }
    graph.edge(tok)
}

impl fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeRef::Edge(i) => write!(f, "e{i}"),
            EdgeRef::Bundle(b, k) => write!(f, "b{b}[{k}]"),
        }
    }
}
