//! Path spaces, boundary path spaces and regulated limits of directed graphs.
//!
//! The `i`-th stage of the inverse system is the set of paths of length `≤ i`;
//! the bonding map drops the last edge. A regulated limit with vertex set `V`
//! keeps all infinite paths and the finite paths whose source lies outside
//! `V`. `V = ∅` is the unified limit, `V = reg` the boundary path space and
//! `V = fin` the minimal one.

use std::collections::BTreeSet;

use crate::graph::{parse_edge_list, EdgeRef, Graph, GraphError, Path, Result, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VertexClassification {
    pub fin: BTreeSet<VertexId>,
    pub src: BTreeSet<VertexId>,
    pub sing: BTreeSet<VertexId>,
    pub reg: BTreeSet<VertexId>,
}

pub fn classify(graph: &Graph) -> VertexClassification {
    let mut received = BTreeSet::new();
    let mut infinite = BTreeSet::new();
    for d in graph.edges() {
        received.insert(d.range);
    }
    for d in graph.bundles() {
        received.insert(d.range);
        infinite.insert(d.range);
    }
    let all: BTreeSet<VertexId> = graph.vertices().collect();
    let fin: BTreeSet<VertexId> = &all - &infinite;
    let src: BTreeSet<VertexId> = &all - &received;
    let sing: BTreeSet<VertexId> = &src | &infinite;
    let reg = &all - &sing;
    VertexClassification { fin, src, sing, reg }
}

/// How much of each finite stage survives in the limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regulation {
    /// `V = ∅`
    Unified,
    /// `V = reg`, the boundary path space
    Perfect,
    /// `V = fin`
    Min,
    Custom(BTreeSet<VertexId>),
}

impl Regulation {
    /// The regulating vertex set, checked against `V ⊆ fin`.
    pub fn vertex_set(&self, graph: &Graph) -> Result<BTreeSet<VertexId>> {
        let c = classify(graph);
        match self {
            Regulation::Unified => Ok(BTreeSet::new()),
            Regulation::Perfect => Ok(c.reg),
            Regulation::Min => Ok(c.fin),
            Regulation::Custom(v) => {
                if let Some(bad) = v.iter().find(|x| !c.fin.contains(x)) {
                    let name = graph
                        .vertex_names()
                        .get(*bad)
                        .cloned()
                        .unwrap_or_else(|| format!("#{bad}"));
                    return Err(GraphError::Precondition(format!(
                        "regulating vertex {name} receives infinitely many edges"
                    )));
                }
                Ok(v.clone())
            }
        }
    }

    /// Whether the regulating set lies inside `reg`.
    pub fn is_perfect(&self, graph: &Graph) -> Result<bool> {
        let v = self.vertex_set(graph)?;
        Ok(v.is_subset(&classify(graph).reg))
    }
}

/// An eventually periodic infinite path `prefix · period^∞`, kept in a
/// canonical form (primitive period, shortest prefix).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InfinitePath {
    prefix: Vec<EdgeRef>,
    period: Vec<EdgeRef>,
}

impl InfinitePath {
    pub fn new(graph: &Graph, prefix: Vec<EdgeRef>, period: Vec<EdgeRef>) -> Result<Self> {
        if period.is_empty() {
            return Err(GraphError::Precondition("infinite path needs a nonempty period".into()));
        }
        let unrolled: Vec<EdgeRef> = prefix
            .iter()
            .chain(period.iter())
            .chain(period.iter())
            .copied()
            .collect();
        Path::new(graph, unrolled)?;
        let mut x = Self { prefix, period };
        x.normalize();
        Ok(x)
    }

    fn normalize(&mut self) {
        let n = self.period.len();
        if let Some(d) = (1..=n).find(|d| n.is_multiple_of(*d) && (0..n).all(|i| self.period[i] == self.period[i % d]))
        {
            self.period.truncate(d);
        }
        while let (Some(&p), Some(&q)) = (self.prefix.last(), self.period.last()) {
            if p != q {
                break;
            }
            self.prefix.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn prefix(&self) -> &[EdgeRef] {
        &self.prefix
    }

    pub fn period(&self) -> &[EdgeRef] {
        &self.period
    }

    pub fn edge_at(&self, k: usize) -> EdgeRef {
        if k < self.prefix.len() {
            self.prefix[k]
        } else {
            self.period[(k - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn truncate(&self, graph: &Graph, k: usize) -> Path {
        if k == 0 {
            return Path::vertex(graph.r(self.edge_at(0)));
        }
        Path::new(graph, (0..k).map(|i| self.edge_at(i)).collect()).expect("validated at construction")
    }
}

/// A point of a path limit: a finite path or an eventually periodic infinite one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathPoint {
    Finite(Path),
    Infinite(InfinitePath),
}

impl PathPoint {
    pub fn is_finite(&self) -> bool {
        matches!(self, PathPoint::Finite(_))
    }

    /// Inverse of [`PathPoint::literal`]: `@v`, an edge list, or
    /// `inf:<prefix>:(<period>)`.
    pub fn parse(graph: &Graph, text: &str) -> Result<Self> {
        let text = text.trim();
        let Some(rest) = text.strip_prefix("inf:") else {
            return Ok(PathPoint::Finite(Path::parse(graph, text)?));
        };
        let bad = || GraphError::Precondition(format!("`{text}` is not of the form inf:<prefix>:(<period>)"));
        let (prefix, period) = rest.split_once(':').ok_or_else(bad)?;
        let period = period
            .trim()
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(bad)?;
        Ok(PathPoint::Infinite(InfinitePath::new(
            graph,
            parse_edge_list(graph, prefix)?,
            parse_edge_list(graph, period)?,
        )?))
    }

    /// Like [`PathPoint::display`], but empty paths print as `@v`.
    pub fn literal(&self, graph: &Graph) -> String {
        match self {
            PathPoint::Finite(p) if p.is_empty() => format!("@{}", graph.vertex_name(p.range())),
            _ => self.display(graph),
        }
    }

    pub fn display(&self, graph: &Graph) -> String {
        match self {
            PathPoint::Finite(p) => p.display(graph),
            PathPoint::Infinite(x) => {
                let names = |es: &[EdgeRef]| es.iter().map(|&e| graph.edge_name(e)).collect::<Vec<_>>().join(",");
                format!("inf:{}:({})", names(&x.prefix), names(&x.period))
            }
        }
    }
}

/// `π̃ₖ(x)`: truncation to length `min(k, |x|)`.
pub fn projection(graph: &Graph, x: &PathPoint, k: usize) -> Path {
    match x {
        PathPoint::Finite(p) => p.truncate(k),
        PathPoint::Infinite(inf) => inf.truncate(graph, k),
    }
}

/// Membership in the regulated limit with vertex set `V = regulation`.
pub fn member(graph: &Graph, x: &PathPoint, regulation: &Regulation) -> Result<bool> {
    let v = regulation.vertex_set(graph)?;
    Ok(member_in(graph, x, &v))
}

pub(crate) fn member_in(graph: &Graph, x: &PathPoint, v: &BTreeSet<VertexId>) -> bool {
    match x {
        PathPoint::Finite(p) => !v.contains(&p.source(graph)),
        PathPoint::Infinite(_) => true,
    }
}

/// All composable length-`n` paths in the global edge order. Bundle members
/// are restricted to indices `< bound`; reaching a bundle without a bound is
/// an error.
pub fn paths(graph: &Graph, n: usize, bound: Option<u64>) -> Result<Vec<Path>> {
    let mut level: Vec<Path> = graph.vertices().map(Path::vertex).collect();
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &level {
            for e in graph.edges_into(p.source(graph)) {
                match e {
                    EdgeRef::Edge(_) => next.push(p.extend(graph, e)?),
                    EdgeRef::Bundle(b, _) => {
                        let bound = bound.ok_or_else(|| GraphError::Unbounded(graph.bundles()[b].id.clone()))?;
                        for k in 0..bound {
                            next.push(p.extend(graph, EdgeRef::Bundle(b, k))?);
                        }
                    }
                }
            }
        }
        level = next;
    }
    level.sort();
    Ok(level)
}

/// Paths of every length `0..=n`.
pub fn paths_upto(graph: &Graph, n: usize, bound: Option<u64>) -> Result<Vec<Path>> {
    let mut out = Vec::new();
    for k in 0..=n {
        out.extend(paths(graph, k, bound)?);
    }
    Ok(out)
}

/// `𝒵(μ, F)`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderSet {
    pub base: Path,
    pub forbidden: Vec<Path>,
}

impl CylinderSet {
    pub fn new(base: Path, forbidden: Vec<Path>) -> Self {
        Self { base, forbidden }
    }
}

pub fn cylinder_member(graph: &Graph, x: &PathPoint, z: &CylinderSet) -> bool {
    let k = z.base.len();
    if let PathPoint::Finite(p) = x {
        if p.len() < k {
            return false;
        }
    }
    if projection(graph, x, k) != z.base {
        return false;
    }
    let longest = z.forbidden.iter().map(Path::len).max().unwrap_or(0);
    let attained = match x {
        PathPoint::Finite(p) => p.len().min(longest),
        PathPoint::Infinite(_) => longest,
    };
    (0..=attained).all(|i| !z.forbidden.contains(&projection(graph, x, i)))
}

/// One position of a [`PathTemplate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Edge(EdgeRef),
    /// `bundle[a·j + b]` at parameter value `j`, `a ≥ 1`.
    Param {
        bundle: usize,
        a: u64,
        b: u64,
    },
}

/// `j ↦ x_j = prefix · period^∞`, finite when `period` is empty. Every
/// parameter slot is filled with the same `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathTemplate {
    pub base: VertexId,
    pub prefix: Vec<Slot>,
    pub period: Vec<Slot>,
}

impl PathTemplate {
    pub fn constant(graph: &Graph, x: &PathPoint) -> Self {
        match x {
            PathPoint::Finite(p) => Self {
                base: p.range(),
                prefix: p.edges().iter().map(|&e| Slot::Edge(e)).collect(),
                period: Vec::new(),
            },
            PathPoint::Infinite(inf) => Self {
                base: graph.r(inf.edge_at(0)),
                prefix: inf.prefix().iter().map(|&e| Slot::Edge(e)).collect(),
                period: inf.period().iter().map(|&e| Slot::Edge(e)).collect(),
            },
        }
    }

    fn slot_ends(graph: &Graph, s: &Slot) -> (VertexId, VertexId) {
        match *s {
            Slot::Edge(e) => (graph.r(e), graph.s(e)),
            Slot::Param { bundle, .. } => (graph.bundles()[bundle].range, graph.bundles()[bundle].source),
        }
    }

    /// Checks that every instantiation is a composable path.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        if self.base >= graph.num_vertices() {
            return Err(GraphError::UnknownVertex(format!("#{}", self.base)));
        }
        for s in self.prefix.iter().chain(&self.period) {
            match *s {
                Slot::Edge(e) => graph.check_edge(e)?,
                Slot::Param { bundle, a, .. } => {
                    if bundle >= graph.bundles().len() {
                        return Err(GraphError::UnknownEdge(format!("bundle #{bundle}")));
                    }
                    if a == 0 {
                        return Err(GraphError::Precondition("parameter step must be at least 1".into()));
                    }
                }
            }
        }
        let mut chain: Vec<Slot> = self.prefix.clone();
        chain.extend(self.period.iter().chain(self.period.iter()).copied());
        if let Some(first) = chain.first() {
            if Self::slot_ends(graph, first).0 != self.base {
                return Err(GraphError::Precondition(
                    "template base differs from first range".into(),
                ));
            }
        }
        for w in chain.windows(2) {
            if Self::slot_ends(graph, &w[0]).1 != Self::slot_ends(graph, &w[1]).0 {
                return Err(GraphError::Precondition("template slots are not composable".into()));
            }
        }
        Ok(())
    }

    pub fn has_param(&self) -> bool {
        self.prefix
            .iter()
            .chain(&self.period)
            .any(|s| matches!(s, Slot::Param { .. }))
    }

    /// Slot at position `k` of `x_j`, if `x_j` has length `> k`.
    pub fn slot(&self, k: usize) -> Option<Slot> {
        if k < self.prefix.len() {
            Some(self.prefix[k])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(k - self.prefix.len()) % self.period.len()])
        }
    }

    pub fn instantiate(&self, graph: &Graph, j: u64) -> Result<PathPoint> {
        let fill = |s: &Slot| match *s {
            Slot::Edge(e) => e,
            Slot::Param { bundle, a, b } => EdgeRef::Bundle(bundle, a * j + b),
        };
        let prefix: Vec<EdgeRef> = self.prefix.iter().map(fill).collect();
        if self.period.is_empty() {
            if prefix.is_empty() {
                return Ok(PathPoint::Finite(Path::vertex(self.base)));
            }
            return Ok(PathPoint::Finite(Path::new(graph, prefix)?));
        }
        let period = self.period.iter().map(fill).collect();
        Ok(PathPoint::Infinite(InfinitePath::new(graph, prefix, period)?))
    }

    /// Source of every finite instantiation; `None` for infinite templates.
    fn finite_source(&self, graph: &Graph) -> Option<VertexId> {
        if !self.period.is_empty() {
            return None;
        }
        Some(self.prefix.last().map_or(self.base, |s| Self::slot_ends(graph, s).1))
    }
}

fn check_point(graph: &Graph, x: &PathPoint) -> Result<()> {
    match x {
        PathPoint::Finite(p) => {
            if p.is_empty() {
                if p.range() >= graph.num_vertices() {
                    return Err(GraphError::UnknownVertex(format!("#{}", p.range())));
                }
                Ok(())
            } else {
                Path::new(graph, p.edges().to_vec()).map(|_| ())
            }
        }
        PathPoint::Infinite(inf) => InfinitePath::new(graph, inf.prefix().to_vec(), inf.period().to_vec()).map(|_| ()),
    }
}

/// Decides `x_j → target` in the regulated limit.
///
/// A finite target `μ` is approached iff the first `|μ|` slots are fixed and
/// spell `μ`, and the next slot (if any) is a parameter slot, so that each
/// proper extension of `μ` is matched for at most one `j`. An infinite target
/// is approached only by the constant sequence at it.
pub fn converges(graph: &Graph, seq: &PathTemplate, target: &PathPoint, regulation: &Regulation) -> Result<bool> {
    let v = regulation.vertex_set(graph)?;
    seq.validate(graph)?;
    check_point(graph, target)?;
    if let Some(src) = seq.finite_source(graph) {
        if v.contains(&src) {
            return Err(GraphError::NotMember("sequence term".into()));
        }
    }
    if !member_in(graph, target, &v) {
        return Err(GraphError::NotMember(target.display(graph)));
    }
    match target {
        PathPoint::Infinite(_) => Ok(!seq.has_param() && seq.instantiate(graph, 0)? == *target),
        PathPoint::Finite(mu) => {
            if mu.is_empty() {
                if seq.base != mu.range() {
                    return Ok(false);
                }
            } else {
                for (k, &e) in mu.edges().iter().enumerate() {
                    if seq.slot(k) != Some(Slot::Edge(e)) {
                        return Ok(false);
                    }
                }
            }
            Ok(!matches!(seq.slot(mu.len()), Some(Slot::Edge(_))))
        }
    }
}

/// The `i`-th stage `Eⁱ ⊔ ⊔_{k<i}(Eᵏ ∖ EᵏV)`, each element tagged with its level.
pub fn stage_set(graph: &Graph, regulation: &Regulation, i: usize, bound: Option<u64>) -> Result<Vec<(usize, Path)>> {
    let v = regulation.vertex_set(graph)?;
    let mut out: Vec<(usize, Path)> = paths(graph, i, bound)?.into_iter().map(|p| (i, p)).collect();
    for k in 0..i {
        for p in paths(graph, k, bound)? {
            if !v.contains(&p.source(graph)) {
                out.push((k, p));
            }
        }
    }
    Ok(out)
}
