//! Fibrewise compactifications of maps between discrete locally compact
//! spaces.
//!
//! A [`DiscreteSpace`] has finitely many named atoms plus finitely many
//! ω-families, each a countably infinite set of isolated points indexed by
//! `ℕ`. Compact means finite. Subsets are [`DefinableSet`]s: per family either
//! a finite index set or a cofinite one. Maps are [`TameMap`]s whose family
//! rules are constant or an index shift, so fibres, images and preimages of
//! definable sets stay definable.
//!
//! In this setting every subset is clopen, so `int(cl(f(X))) = f(X)` and the
//! perfection locus reduces to `pr(f) ∩ f(X)`. A point has infinite fibre
//! exactly when some family rule is constant onto it; since there are finitely
//! many rules, `pr(f)` is always cofinite-representable.
//!
//! Unified spaces `X ⊎_f^U Y` carry the Whyburn topology restricted to
//! `X ⊔ (Y ∖ U)`. For discrete inputs the open-set characterization collapses
//! to: `S` is open iff every `y ∈ S ∩ Y` has `f⁻¹(y) ∖ S` finite. Points of an
//! excised `U ⊆ pr(f)` are isolated in the full unified space, which is why the
//! same test applies verbatim to the subspace.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopError {
    #[error("duplicate name `{0}` in space")]
    DuplicateName(String),
    #[error("point `{0}` is not in the space")]
    UnknownPoint(String),
    #[error("family `{0}` is not in the space")]
    UnknownFamily(String),
    #[error("map is not total: `{0}` has no image")]
    NotTotal(String),
    #[error("set is not {0}-proper for this map")]
    NotProper(&'static str),
    #[error("set is not contained in the point set of the space")]
    NotASubset,
    #[error("sequence is not a valid sequence of points: {0}")]
    BadSequence(String),
    #[error("map is not between finite spaces")]
    NotFinite,
}

pub type Result<T> = std::result::Result<T, TopError>;

/// A point reference: an atom, or a member of an ω-family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Point {
    Atom(String),
    Member(String, u64),
}

impl Point {
    pub fn atom(name: impl Into<String>) -> Self {
        Point::Atom(name.into())
    }

    pub fn member(family: impl Into<String>, index: u64) -> Self {
        Point::Member(family.into(), index)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Atom(a) => write!(f, "{a}"),
            Point::Member(fam, n) => write!(f, "{fam}[{n}]"),
        }
    }
}

/// Cardinality in `ℕ ∪ {ω}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Card {
    Finite(u64),
    Omega,
}

impl Card {
    pub fn is_finite(self) -> bool {
        matches!(self, Card::Finite(_))
    }
}

impl std::ops::Add for Card {
    type Output = Card;
    fn add(self, rhs: Card) -> Card {
        match (self, rhs) {
            (Card::Finite(a), Card::Finite(b)) => Card::Finite(a + b),
            _ => Card::Omega,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiscreteSpace {
    atoms: BTreeSet<String>,
    families: BTreeSet<String>,
}

impl DiscreteSpace {
    pub fn new<A, F>(atoms: A, families: F) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
        F: IntoIterator,
        F::Item: Into<String>,
    {
        let mut space = DiscreteSpace::default();
        for a in atoms {
            let a = a.into();
            if !space.atoms.insert(a.clone()) {
                return Err(TopError::DuplicateName(a));
            }
        }
        for fam in families {
            let fam = fam.into();
            if space.atoms.contains(&fam) || !space.families.insert(fam.clone()) {
                return Err(TopError::DuplicateName(fam));
            }
        }
        Ok(space)
    }

    /// Space with atoms only.
    pub fn finite<A>(atoms: A) -> Result<Self>
    where
        A: IntoIterator,
        A::Item: Into<String>,
    {
        Self::new(atoms, std::iter::empty::<String>())
    }

    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    pub fn families(&self) -> &BTreeSet<String> {
        &self.families
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.families.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Atom(a) => self.atoms.contains(a),
            Point::Member(f, _) => self.families.contains(f),
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(TopError::UnknownPoint(p.to_string()))
        }
    }

    pub fn whole(&self) -> DefinableSet {
        DefinableSet {
            atoms: self.atoms.clone(),
            families: self
                .families
                .iter()
                .map(|f| (f.clone(), FamilySpec::Cofin(BTreeSet::new())))
                .collect(),
        }
    }

    /// Whether every name mentioned by `s` belongs to this space.
    pub fn admits(&self, s: &DefinableSet) -> bool {
        s.atoms.iter().all(|a| self.atoms.contains(a)) && s.families.keys().all(|f| self.families.contains(f))
    }
}

/// Index subset of one ω-family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Fin(BTreeSet<u64>),
    Cofin(BTreeSet<u64>),
}

impl FamilySpec {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            FamilySpec::Fin(s) => s.contains(&n),
            FamilySpec::Cofin(s) => !s.contains(&n),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FamilySpec::Fin(_))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, FamilySpec::Fin(s) if s.is_empty())
    }

    pub fn complement(&self) -> FamilySpec {
        match self {
            FamilySpec::Fin(s) => FamilySpec::Cofin(s.clone()),
            FamilySpec::Cofin(s) => FamilySpec::Fin(s.clone()),
        }
    }

    pub fn union(&self, other: &FamilySpec) -> FamilySpec {
        use FamilySpec::*;
        match (self, other) {
            (Fin(a), Fin(b)) => Fin(a | b),
            (Fin(a), Cofin(b)) | (Cofin(b), Fin(a)) => Cofin(b - a),
            (Cofin(a), Cofin(b)) => Cofin(a & b),
        }
    }

    pub fn intersection(&self, other: &FamilySpec) -> FamilySpec {
        self.complement().union(&other.complement()).complement()
    }

    /// Image under `n ↦ n + offset`.
    fn shifted_up(&self, offset: u64) -> FamilySpec {
        match self {
            FamilySpec::Fin(s) => FamilySpec::Fin(s.iter().map(|n| n + offset).collect()),
            FamilySpec::Cofin(s) => FamilySpec::Cofin(s.iter().map(|n| n + offset).chain(0..offset).collect()),
        }
    }

    /// Preimage under `n ↦ n + offset`.
    fn shifted_down(&self, offset: u64) -> FamilySpec {
        let down = |s: &BTreeSet<u64>| s.iter().filter(|&&n| n >= offset).map(|n| n - offset).collect();
        match self {
            FamilySpec::Fin(s) => FamilySpec::Fin(down(s)),
            FamilySpec::Cofin(s) => FamilySpec::Cofin(down(s)),
        }
    }

    fn size(&self) -> Card {
        match self {
            FamilySpec::Fin(s) => Card::Finite(s.len() as u64),
            FamilySpec::Cofin(_) => Card::Omega,
        }
    }
}

/// A finitely described subset of a [`DiscreteSpace`].
///
/// Families not mentioned are empty; the representation is kept normalized so
/// that derived equality is set equality.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DefinableSet {
    atoms: BTreeSet<String>,
    families: BTreeMap<String, FamilySpec>,
}

impl DefinableSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn singleton(p: &Point) -> Self {
        let mut s = Self::empty();
        s.insert(p);
        s
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Point>>(ps: I) -> Self {
        let mut s = Self::empty();
        for p in ps {
            s.insert(p);
        }
        s
    }

    /// `{family[n] : n ∉ excluded}`
    pub fn cofinite(family: impl Into<String>, excluded: impl IntoIterator<Item = u64>) -> Self {
        let mut s = Self::empty();
        s.families
            .insert(family.into(), FamilySpec::Cofin(excluded.into_iter().collect()));
        s
    }

    pub fn with_family(mut self, family: impl Into<String>, spec: FamilySpec) -> Self {
        let fam = family.into();
        let merged = match self.families.remove(&fam) {
            Some(old) => old.union(&spec),
            None => spec,
        };
        self.families.insert(fam, merged);
        self.normalize();
        self
    }

    pub fn insert(&mut self, p: &Point) {
        match p {
            Point::Atom(a) => {
                self.atoms.insert(a.clone());
            }
            Point::Member(f, n) => {
                let spec = self
                    .families
                    .remove(f)
                    .unwrap_or(FamilySpec::Fin(BTreeSet::new()))
                    .union(&FamilySpec::Fin([*n].into()));
                self.families.insert(f.clone(), spec);
            }
        }
    }

    fn normalize(&mut self) {
        self.families.retain(|_, s| !s.is_empty());
    }

    pub fn atoms(&self) -> &BTreeSet<String> {
        &self.atoms
    }

    pub fn family(&self, name: &str) -> FamilySpec {
        self.families
            .get(name)
            .cloned()
            .unwrap_or(FamilySpec::Fin(BTreeSet::new()))
    }

    pub fn families(&self) -> impl Iterator<Item = (&String, &FamilySpec)> {
        self.families.iter()
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Atom(a) => self.atoms.contains(a),
            Point::Member(f, n) => self.families.get(f).is_some_and(|s| s.contains(*n)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.families.is_empty()
    }

    /// Compact ⇔ finite in a discrete space.
    pub fn is_finite(&self) -> bool {
        self.families.values().all(FamilySpec::is_finite)
    }

    pub fn is_compact(&self) -> bool {
        self.is_finite()
    }

    pub fn size(&self) -> Card {
        self.families
            .values()
            .fold(Card::Finite(self.atoms.len() as u64), |acc, s| acc + s.size())
    }

    pub fn union(&self, other: &DefinableSet) -> DefinableSet {
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        for (f, s) in &other.families {
            let merged = out.family(f).union(s);
            out.families.insert(f.clone(), merged);
        }
        out.normalize();
        out
    }

    pub fn intersection(&self, other: &DefinableSet) -> DefinableSet {
        let mut out = DefinableSet {
            atoms: &self.atoms & &other.atoms,
            families: BTreeMap::new(),
        };
        for (f, s) in &self.families {
            out.families.insert(f.clone(), s.intersection(&other.family(f)));
        }
        out.normalize();
        out
    }

    pub fn difference(&self, other: &DefinableSet) -> DefinableSet {
        let mut out = DefinableSet {
            atoms: &self.atoms - &other.atoms,
            families: BTreeMap::new(),
        };
        for (f, s) in &self.families {
            out.families
                .insert(f.clone(), s.intersection(&other.family(f).complement()));
        }
        out.normalize();
        out
    }

    pub fn complement(&self, space: &DiscreteSpace) -> DefinableSet {
        space.whole().difference(self)
    }

    pub fn is_subset(&self, other: &DefinableSet) -> bool {
        self.difference(other).is_empty()
    }

    /// The points, when there are finitely many.
    pub fn finite_points(&self) -> Option<Vec<Point>> {
        let mut out: Vec<Point> = self.atoms.iter().cloned().map(Point::Atom).collect();
        for (f, s) in &self.families {
            match s {
                FamilySpec::Fin(idx) => out.extend(idx.iter().map(|n| Point::Member(f.clone(), *n))),
                FamilySpec::Cofin(_) => return None,
            }
        }
        Some(out)
    }
}

impl fmt::Display for DefinableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.atoms.iter().cloned().collect();
        for (fam, s) in &self.families {
            parts.push(match s {
                FamilySpec::Fin(idx) => format!("{fam}{idx:?}"),
                FamilySpec::Cofin(ex) if ex.is_empty() => format!("{fam}[*]"),
                FamilySpec::Cofin(ex) => format!("{fam}[* \\ {ex:?}]"),
            });
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Rule for a whole ω-family of the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyRule {
    ConstTo(Point),
    /// `family[n] ↦ target[n + offset]`
    Reindex {
        target: String,
        offset: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TameMap {
    source: DiscreteSpace,
    target: DiscreteSpace,
    atom_rule: BTreeMap<String, Point>,
    family_rule: BTreeMap<String, FamilyRule>,
}

impl TameMap {
    pub fn new(
        source: DiscreteSpace,
        target: DiscreteSpace,
        atom_rule: BTreeMap<String, Point>,
        family_rule: BTreeMap<String, FamilyRule>,
    ) -> Result<Self> {
        for a in source.atoms() {
            let img = atom_rule.get(a).ok_or_else(|| TopError::NotTotal(a.clone()))?;
            target.check(img)?;
        }
        for fam in source.families() {
            match family_rule.get(fam).ok_or_else(|| TopError::NotTotal(fam.clone()))? {
                FamilyRule::ConstTo(p) => target.check(p)?,
                FamilyRule::Reindex { target: g, .. } => {
                    if !target.families().contains(g) {
                        return Err(TopError::UnknownFamily(g.clone()));
                    }
                }
            }
        }
        if let Some(extra) = atom_rule.keys().find(|a| !source.atoms().contains(*a)) {
            return Err(TopError::UnknownPoint(extra.clone()));
        }
        if let Some(extra) = family_rule.keys().find(|f| !source.families().contains(*f)) {
            return Err(TopError::UnknownFamily(extra.clone()));
        }
        Ok(Self {
            source,
            target,
            atom_rule,
            family_rule,
        })
    }

    pub fn identity(space: &DiscreteSpace) -> Self {
        Self {
            source: space.clone(),
            target: space.clone(),
            atom_rule: space
                .atoms()
                .iter()
                .map(|a| (a.clone(), Point::Atom(a.clone())))
                .collect(),
            family_rule: space
                .families()
                .iter()
                .map(|f| {
                    (
                        f.clone(),
                        FamilyRule::Reindex {
                            target: f.clone(),
                            offset: 0,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn source(&self) -> &DiscreteSpace {
        &self.source
    }

    pub fn target(&self) -> &DiscreteSpace {
        &self.target
    }

    pub fn atom_image(&self, atom: &str) -> Option<&Point> {
        self.atom_rule.get(atom)
    }

    pub fn family_rule(&self, family: &str) -> Option<&FamilyRule> {
        self.family_rule.get(family)
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        self.source.check(p)?;
        Ok(match p {
            Point::Atom(a) => self.atom_rule[a].clone(),
            Point::Member(f, n) => match &self.family_rule[f] {
                FamilyRule::ConstTo(q) => q.clone(),
                FamilyRule::Reindex { target, offset } => Point::Member(target.clone(), n + offset),
            },
        })
    }

    /// Points whose fibre is infinite: targets of constant family rules.
    pub fn infinite_fiber_points(&self) -> BTreeSet<Point> {
        self.family_rule
            .values()
            .filter_map(|r| match r {
                FamilyRule::ConstTo(p) => Some(p.clone()),
                FamilyRule::Reindex { .. } => None,
            })
            .collect()
    }

    pub fn preimage(&self, s: &DefinableSet) -> DefinableSet {
        let mut out = DefinableSet::empty();
        for (a, img) in &self.atom_rule {
            if s.contains(img) {
                out.atoms.insert(a.clone());
            }
        }
        for (fam, rule) in &self.family_rule {
            let spec = match rule {
                FamilyRule::ConstTo(p) if s.contains(p) => FamilySpec::Cofin(BTreeSet::new()),
                FamilyRule::ConstTo(_) => continue,
                FamilyRule::Reindex { target, offset } => s.family(target).shifted_down(*offset),
            };
            out.families.insert(fam.clone(), spec);
        }
        out.normalize();
        out
    }

    pub fn fiber(&self, y: &Point) -> Result<DefinableSet> {
        self.target.check(y)?;
        Ok(self.preimage(&DefinableSet::singleton(y)))
    }

    pub fn fiber_size(&self, y: &Point) -> Result<Card> {
        self.target.check(y)?;
        let atoms = self.atom_rule.values().filter(|p| *p == y).count() as u64;
        let mut size = Card::Finite(atoms);
        for rule in self.family_rule.values() {
            size = size
                + match rule {
                    FamilyRule::ConstTo(p) if p == y => Card::Omega,
                    FamilyRule::ConstTo(_) => Card::Finite(0),
                    FamilyRule::Reindex { target, offset } => match y {
                        Point::Member(g, m) if g == target && m >= offset => Card::Finite(1),
                        _ => Card::Finite(0),
                    },
                };
        }
        Ok(size)
    }

    pub fn image(&self) -> DefinableSet {
        let mut out = DefinableSet::from_points(self.atom_rule.values());
        for rule in self.family_rule.values() {
            match rule {
                FamilyRule::ConstTo(p) => out.insert(p),
                FamilyRule::Reindex { target, offset } => {
                    let add = FamilySpec::Cofin(BTreeSet::new()).shifted_up(*offset);
                    out = out.with_family(target.clone(), add);
                }
            }
        }
        out
    }

    /// `pr(f)`: the finite-fibre locus. In a discrete target `{y}` is a
    /// precompact open neighbourhood of `y`, so `y ∈ pr(f)` iff its fibre is
    /// finite.
    pub fn pr_set(&self) -> DefinableSet {
        let bad: Vec<Point> = self.infinite_fiber_points().into_iter().collect();
        self.target.whole().difference(&DefinableSet::from_points(&bad))
    }

    /// `per(f) = pr(f) ∩ f(X)`; interior-of-closure is the identity here.
    pub fn per_set(&self) -> DefinableSet {
        self.pr_set().intersection(&self.image())
    }

    pub fn is_f_proper(&self, u: &DefinableSet) -> bool {
        self.target.admits(u) && u.is_subset(&self.pr_set())
    }

    pub fn is_f_perfect(&self, u: &DefinableSet) -> bool {
        self.target.admits(u) && u.is_subset(&self.per_set())
    }

    /// All fibres finite.
    pub fn is_proper(&self) -> bool {
        self.infinite_fiber_points().is_empty()
    }
}

/// Which side of a two-layer unified space a point lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    X,
    Y,
}

/// A subset of `X ⊔ Y` given by its two parts.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UnifiedSet {
    pub x: DefinableSet,
    pub y: DefinableSet,
}

impl UnifiedSet {
    pub fn new(x: DefinableSet, y: DefinableSet) -> Self {
        Self { x, y }
    }

    pub fn contains(&self, side: Side, p: &Point) -> bool {
        match side {
            Side::X => self.x.contains(p),
            Side::Y => self.y.contains(p),
        }
    }
}

/// Tail of a [`SequenceSpec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tail<L> {
    Const(L, Point),
    /// `n ↦ family[a·n + b]` on layer `layer`, with `a ≥ 1`.
    Walk {
        layer: L,
        family: String,
        a: u64,
        b: u64,
    },
}

/// A sequence given by a finite prefix and an eventually constant or
/// eventually injective tail. Convergence only depends on the tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec<L> {
    pub prefix: Vec<(L, Point)>,
    pub tail: Tail<L>,
}

impl<L: Copy> SequenceSpec<L> {
    pub fn constant(layer: L, p: Point) -> Self {
        Self {
            prefix: Vec::new(),
            tail: Tail::Const(layer, p),
        }
    }

    pub fn walk(layer: L, family: impl Into<String>, a: u64, b: u64) -> Self {
        Self {
            prefix: Vec::new(),
            tail: Tail::Walk {
                layer,
                family: family.into(),
                a,
                b,
            },
        }
    }

    pub fn with_prefix(mut self, prefix: Vec<(L, Point)>) -> Self {
        self.prefix = prefix;
        self
    }

    /// The `n`-th term after the prefix.
    pub fn tail_term(&self, n: u64) -> (L, Point) {
        match &self.tail {
            Tail::Const(l, p) => (*l, p.clone()),
            Tail::Walk { layer, family, a, b } => (*layer, Point::Member(family.clone(), a * n + b)),
        }
    }

    pub fn is_eventually_injective(&self) -> bool {
        matches!(self.tail, Tail::Walk { .. })
    }
}

/// Whether every term `family[a·n + b]` avoids `s`.
fn walk_avoids(s: &DefinableSet, family: &str, a: u64, b: u64) -> bool {
    match s.family(family) {
        FamilySpec::Fin(idx) => idx.iter().all(|&i| i < b || !(i - b).is_multiple_of(a)),
        FamilySpec::Cofin(_) => false,
    }
}

/// Eventual behaviour of the image of a sequence tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum EventualImage {
    Const(Point),
    Injective { family: String, a: u64, b: u64 },
}

impl TameMap {
    /// Image of the walk `family[a·n + b]` (or of a constant) under the map.
    pub(crate) fn eventual_image(&self, tail: &EventualImage) -> Result<EventualImage> {
        Ok(match tail {
            EventualImage::Const(p) => EventualImage::Const(self.apply(p)?),
            EventualImage::Injective { family, a, b } => {
                match self
                    .family_rule
                    .get(family)
                    .ok_or_else(|| TopError::UnknownFamily(family.clone()))?
                {
                    FamilyRule::ConstTo(q) => EventualImage::Const(q.clone()),
                    FamilyRule::Reindex { target, offset } => EventualImage::Injective {
                        family: target.clone(),
                        a: *a,
                        b: b + offset,
                    },
                }
            }
        })
    }
}

impl<L: Copy> Tail<L> {
    pub(crate) fn eventual(&self) -> (L, EventualImage) {
        match self {
            Tail::Const(l, p) => (*l, EventualImage::Const(p.clone())),
            Tail::Walk { layer, family, a, b } => (
                *layer,
                EventualImage::Injective {
                    family: family.clone(),
                    a: *a,
                    b: *b,
                },
            ),
        }
    }
}

/// `X ⊎_f^U Y` for an `f`-proper excision `U`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifiedSpace {
    f: TameMap,
    excision: DefinableSet,
}

/// Builds `X ⊎_f^U Y`; `U = ∅` is the full unified space.
pub fn unified(f: &TameMap, u: &DefinableSet) -> Result<UnifiedSpace> {
    if !f.is_f_proper(u) {
        return Err(TopError::NotProper("f"));
    }
    Ok(UnifiedSpace {
        f: f.clone(),
        excision: u.clone(),
    })
}

/// The minimal fibrewise compactification `X ⊎_f^{pr(f)} Y`.
///
/// Closed subsets of the unified space are those whose `X`-part meets every
/// infinite fibre over a point outside the set only finitely often, so the
/// closure of `X` adds exactly the infinite-fibre points `Y ∖ pr(f)`. This
/// space is therefore the strict one.
pub fn minimal_fw(f: &TameMap) -> UnifiedSpace {
    UnifiedSpace {
        f: f.clone(),
        excision: f.pr_set(),
    }
}

/// `X ⊎_f^{per(f)} Y`, the minimal perfection.
pub fn minimal_perfection(f: &TameMap) -> UnifiedSpace {
    UnifiedSpace {
        f: f.clone(),
        excision: f.per_set(),
    }
}

impl UnifiedSpace {
    pub fn map(&self) -> &TameMap {
        &self.f
    }

    pub fn excision(&self) -> &DefinableSet {
        &self.excision
    }

    pub fn points(&self) -> UnifiedSet {
        UnifiedSet {
            x: self.f.source().whole(),
            y: self.f.target().whole().difference(&self.excision),
        }
    }

    /// The `Y`-side points retained by the construction.
    pub fn y_side(&self) -> DefinableSet {
        self.points().y
    }

    pub fn contains(&self, side: Side, p: &Point) -> bool {
        match side {
            Side::X => self.f.source().contains(p),
            Side::Y => self.f.target().contains(p) && !self.excision.contains(p),
        }
    }

    fn check_subset(&self, s: &UnifiedSet) -> Result<()> {
        let pts = self.points();
        if self.f.source().admits(&s.x)
            && self.f.target().admits(&s.y)
            && s.x.is_subset(&pts.x)
            && s.y.is_subset(&pts.y)
        {
            Ok(())
        } else {
            Err(TopError::NotASubset)
        }
    }

    /// Open iff every retained `y ∈ S` has `f⁻¹(y) ∖ S` finite. Only
    /// infinite-fibre points can fail.
    pub fn is_open(&self, s: &UnifiedSet) -> Result<bool> {
        self.check_subset(s)?;
        for y in self.f.infinite_fiber_points() {
            if s.y.contains(&y) && !self.f.fiber(&y)?.difference(&s.x).is_finite() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn is_closed(&self, s: &UnifiedSet) -> Result<bool> {
        self.check_subset(s)?;
        let pts = self.points();
        self.is_open(&UnifiedSet {
            x: pts.x.difference(&s.x),
            y: pts.y.difference(&s.y),
        })
    }

    /// Compact iff the `Y`-part is finite and only finitely many `X`-points
    /// lie outside the fibres over it.
    pub fn is_compact(&self, c: &UnifiedSet) -> Result<bool> {
        self.check_subset(c)?;
        Ok(c.y.is_finite() && c.x.difference(&self.f.preimage(&c.y)).is_finite())
    }

    pub fn is_isolated(&self, side: Side, p: &Point) -> Result<bool> {
        let mut s = UnifiedSet::default();
        match side {
            Side::X => s.x.insert(p),
            Side::Y => s.y.insert(p),
        }
        self.is_open(&s)
    }

    /// Closure of `ι_X(X)`: `X ∪ (Y ∖ pr(f))`, intersected with the point set.
    pub fn closure_of_x(&self) -> UnifiedSet {
        UnifiedSet {
            x: self.f.source().whole(),
            y: self
                .f
                .target()
                .whole()
                .difference(&self.f.pr_set())
                .difference(&self.excision),
        }
    }

    pub(crate) fn validate_sequence(&self, seq: &SequenceSpec<Side>) -> Result<()> {
        for (side, p) in &seq.prefix {
            if !self.contains(*side, p) {
                return Err(TopError::BadSequence(format!("{p} is not a point")));
            }
        }
        match &seq.tail {
            Tail::Const(side, p) => {
                if !self.contains(*side, p) {
                    return Err(TopError::BadSequence(format!("{p} is not a point")));
                }
            }
            Tail::Walk { layer, family, a, b } => {
                if *a == 0 {
                    return Err(TopError::BadSequence("walk step must be at least 1".into()));
                }
                let space = match layer {
                    Side::X => self.f.source(),
                    Side::Y => self.f.target(),
                };
                if !space.families().contains(family) {
                    return Err(TopError::UnknownFamily(family.clone()));
                }
                if *layer == Side::Y && !walk_avoids(&self.excision, family, *a, *b) {
                    return Err(TopError::BadSequence(format!(
                        "walk on {family} enters the excised set"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Some compact set contains infinitely many tail terms.
    pub(crate) fn tail_trapped_in_compact(&self, tail: &Tail<Side>) -> bool {
        match tail {
            Tail::Const(..) => true,
            // {y} ∪ f⁻¹(y) is compact, so a walk collapsing onto y is trapped
            Tail::Walk {
                layer: Side::X, family, ..
            } => {
                matches!(self.f.family_rule(family), Some(FamilyRule::ConstTo(_)))
            }
            Tail::Walk { layer: Side::Y, .. } => false,
        }
    }

    /// Net characterization restricted to [`SequenceSpec`]s. To an `X`-point:
    /// eventually constant. To a `Y`-point `y`: `⊎f(xₙ)` eventually equals `y`
    /// and the tail leaves every finite subset of `X`.
    pub fn converges(&self, seq: &SequenceSpec<Side>, side: Side, target: &Point) -> Result<bool> {
        self.validate_sequence(seq)?;
        if !self.contains(side, target) {
            return Err(TopError::UnknownPoint(target.to_string()));
        }
        match side {
            Side::X => Ok(seq.tail == Tail::Const(Side::X, target.clone())),
            Side::Y => {
                let (layer, ev) = seq.tail.eventual();
                let (escapes, image) = match layer {
                    Side::X => (!matches!(seq.tail, Tail::Const(..)), self.f.eventual_image(&ev)?),
                    Side::Y => (true, ev),
                };
                Ok(escapes && image == EventualImage::Const(target.clone()))
            }
        }
    }
}

/// Which nesting realizes `X ⊎_f^U Y ⊎_g^V W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Association {
    /// `(X ⊎_f^U Y) ⊎_{g∘⊎f}^V W`
    Left,
    /// `X ⊎_{ι∘f}^U (Y ⊎_g^V W)`
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    X,
    Y,
    W,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ComposedSet {
    pub x: DefinableSet,
    pub y: DefinableSet,
    pub w: DefinableSet,
}

/// Two-stage space `X ⊔ (Y ∖ U) ⊔ (W ∖ V)` built in a chosen association.
#[derive(Clone, Debug)]
pub struct ComposedSpace {
    assoc: Association,
    f: TameMap,
    u: DefinableSet,
    g: TameMap,
    v: DefinableSet,
    lower: UnifiedSpace,
    upper: UnifiedSpace,
}

pub fn compose(z1: &UnifiedSpace, g: &TameMap, v: &DefinableSet, assoc: Association) -> Result<ComposedSpace> {
    if z1.map().target() != g.source() {
        return Err(TopError::NotASubset);
    }
    let upper = unified(g, v)?;
    Ok(ComposedSpace {
        assoc,
        f: z1.map().clone(),
        u: z1.excision().clone(),
        g: g.clone(),
        v: v.clone(),
        lower: z1.clone(),
        upper,
    })
}

impl ComposedSpace {
    pub fn association(&self) -> Association {
        self.assoc
    }

    pub fn points(&self) -> ComposedSet {
        match self.assoc {
            Association::Left => {
                let inner = self.lower.points();
                ComposedSet {
                    x: inner.x,
                    y: inner.y,
                    w: self.g.target().whole().difference(&self.v),
                }
            }
            Association::Right => {
                let inner = self.upper.points();
                ComposedSet {
                    x: self.f.source().whole(),
                    y: inner.x.difference(&self.u),
                    w: inner.y,
                }
            }
        }
    }

    pub fn contains(&self, layer: Layer, p: &Point) -> bool {
        let pts = self.points();
        match layer {
            Layer::X => self.f.source().contains(p) && pts.x.contains(p),
            Layer::Y => self.g.source().contains(p) && pts.y.contains(p),
            Layer::W => self.g.target().contains(p) && pts.w.contains(p),
        }
    }

    fn check_subset(&self, s: &ComposedSet) -> Result<()> {
        let pts = self.points();
        let ok = self.f.source().admits(&s.x)
            && self.g.source().admits(&s.y)
            && self.g.target().admits(&s.w)
            && s.x.is_subset(&pts.x)
            && s.y.is_subset(&pts.y)
            && s.w.is_subset(&pts.w);
        if ok {
            Ok(())
        } else {
            Err(TopError::NotASubset)
        }
    }

    pub fn is_open(&self, s: &ComposedSet) -> Result<bool> {
        self.check_subset(s)?;
        match self.assoc {
            Association::Left => self.is_open_left(s),
            Association::Right => self.is_open_right(s),
        }
    }

    /// `S` open in `Z₁ ⊎_h W`: `S ∩ Z₁` open in `Z₁`, and for each `w ∈ S`,
    /// `h⁻¹(w) ∖ S` compact in `Z₁`. Excised `w ∈ V` impose nothing since
    /// `h⁻¹(w)` is compact and `S ∩ Z₁` open.
    fn is_open_left(&self, s: &ComposedSet) -> Result<bool> {
        let inner = UnifiedSet::new(s.x.clone(), s.y.clone());
        if !self.lower.is_open(&inner)? {
            return Ok(false);
        }
        // only points with infinite h-preimage can fail
        let mut suspects = self.g.infinite_fiber_points();
        for y in self.f.infinite_fiber_points() {
            suspects.insert(self.g.apply(&y)?);
        }
        for w in suspects.iter().filter(|w| s.w.contains(w)) {
            let gw = self.g.fiber(w)?;
            let pre = UnifiedSet::new(
                self.f.preimage(&gw).difference(&s.x),
                gw.difference(&self.u).difference(&s.y),
            );
            if !self.lower.is_compact(&pre)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `S` open in `X ⊎_k^U Z₂` with `k = ι∘f`: enlarge by the excised `U`
    /// (isolated, finite fibres), require openness in `Z₂`, and require
    /// `k⁻¹(K) ∖ S` finite for every compact `K ⊆ S ∩ Z₂`. Maximal compacts
    /// are singletons and `{w} ∪ (g⁻¹(w) ∩ S)`.
    fn is_open_right(&self, s: &ComposedSet) -> Result<bool> {
        let enlarged = UnifiedSet::new(s.y.union(&self.u), s.w.clone());
        if !self.upper.is_open(&enlarged)? {
            return Ok(false);
        }
        for y in self.f.infinite_fiber_points() {
            if enlarged.x.contains(&y) && !self.f.fiber(&y)?.difference(&s.x).is_finite() {
                return Ok(false);
            }
        }
        for w in self.g.infinite_fiber_points().iter().filter(|w| s.w.contains(w)) {
            let k = UnifiedSet::new(self.g.fiber(w)?.intersection(&enlarged.x), DefinableSet::singleton(w));
            debug_assert!(self.upper.is_compact(&k)?);
            if !self.f.preimage(&k.x).difference(&s.x).is_finite() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn validate(&self, seq: &SequenceSpec<Layer>) -> Result<()> {
        let terms = seq.prefix.iter().cloned().chain(match &seq.tail {
            Tail::Const(l, p) => Some((*l, p.clone())),
            Tail::Walk { .. } => None,
        });
        for (l, p) in terms {
            if !self.contains(l, &p) {
                return Err(TopError::BadSequence(format!("{p} is not a point")));
            }
        }
        if let Tail::Walk { layer, family, a, b } = &seq.tail {
            if *a == 0 {
                return Err(TopError::BadSequence("walk step must be at least 1".into()));
            }
            let (space, excised) = match layer {
                Layer::X => (self.f.source(), DefinableSet::empty()),
                Layer::Y => (self.g.source(), self.u.clone()),
                Layer::W => (self.g.target(), self.v.clone()),
            };
            if !space.families().contains(family) {
                return Err(TopError::UnknownFamily(family.clone()));
            }
            if !walk_avoids(&excised, family, *a, *b) {
                return Err(TopError::BadSequence(format!("walk on {family} enters an excised set")));
            }
        }
        Ok(())
    }

    pub fn converges(&self, seq: &SequenceSpec<Layer>, layer: Layer, target: &Point) -> Result<bool> {
        self.validate(seq)?;
        if !self.contains(layer, target) {
            return Err(TopError::UnknownPoint(target.to_string()));
        }
        match self.assoc {
            Association::Left => self.converges_left(seq, layer, target),
            Association::Right => self.converges_right(seq, layer, target),
        }
    }

    fn converges_left(&self, seq: &SequenceSpec<Layer>, layer: Layer, target: &Point) -> Result<bool> {
        let (tail_layer, ev) = seq.tail.eventual();
        let inner_side = |l: Layer| match l {
            Layer::X => Some(Side::X),
            Layer::Y => Some(Side::Y),
            Layer::W => None,
        };
        match inner_side(layer) {
            // Z₁ is open: the tail must live in Z₁ and converge there
            Some(side) => {
                let Some(tail_side) = inner_side(tail_layer) else {
                    return Ok(false);
                };
                let inner_seq = SequenceSpec {
                    prefix: Vec::new(),
                    tail: relayer(&seq.tail, tail_side),
                };
                self.lower.converges(&inner_seq, side, target)
            }
            None => match inner_side(tail_layer) {
                None => Ok(ev == EventualImage::Const(target.clone())),
                Some(tail_side) => {
                    let inner_tail = relayer(&seq.tail, tail_side);
                    if self.lower.tail_trapped_in_compact(&inner_tail) {
                        return Ok(false);
                    }
                    let through_f = match tail_side {
                        Side::X => self.f.eventual_image(&ev)?,
                        Side::Y => ev,
                    };
                    Ok(self.g.eventual_image(&through_f)? == EventualImage::Const(target.clone()))
                }
            },
        }
    }

    fn converges_right(&self, seq: &SequenceSpec<Layer>, layer: Layer, target: &Point) -> Result<bool> {
        if layer == Layer::X {
            return Ok(seq.tail == Tail::Const(Layer::X, target.clone()));
        }
        // push the tail through ⊎(ι∘f), then decide convergence in Z₂
        let pushed = match &seq.tail {
            Tail::Const(Layer::X, _) => return Ok(false),
            Tail::Const(Layer::Y, p) => Tail::Const(Side::X, p.clone()),
            Tail::Const(Layer::W, p) => Tail::Const(Side::Y, p.clone()),
            Tail::Walk {
                layer: Layer::X,
                family,
                a,
                b,
            } => {
                match self
                    .f
                    .family_rule(family)
                    .ok_or_else(|| TopError::UnknownFamily(family.clone()))?
                {
                    FamilyRule::ConstTo(q) => Tail::Const(Side::X, q.clone()),
                    FamilyRule::Reindex { target, offset } => Tail::Walk {
                        layer: Side::X,
                        family: target.clone(),
                        a: *a,
                        b: b + offset,
                    },
                }
            }
            Tail::Walk {
                layer: Layer::Y,
                family,
                a,
                b,
            } => Tail::Walk {
                layer: Side::X,
                family: family.clone(),
                a: *a,
                b: *b,
            },
            Tail::Walk {
                layer: Layer::W,
                family,
                a,
                b,
            } => Tail::Walk {
                layer: Side::Y,
                family: family.clone(),
                a: *a,
                b: *b,
            },
        };
        let side = if layer == Layer::Y { Side::X } else { Side::Y };
        self.upper.converges(
            &SequenceSpec {
                prefix: Vec::new(),
                tail: pushed,
            },
            side,
            target,
        )
    }
}

fn relayer(tail: &Tail<Layer>, side: Side) -> Tail<Side> {
    match tail {
        Tail::Const(_, p) => Tail::Const(side, p.clone()),
        Tail::Walk { family, a, b, .. } => Tail::Walk {
            layer: side,
            family: family.clone(),
            a: *a,
            b: *b,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(a: &str) -> Point {
        Point::atom(a)
    }

    /// `F → {y}`, constant.
    fn collapse() -> TameMap {
        let x = DiscreteSpace::new(Vec::<String>::new(), ["F"]).unwrap();
        let y = DiscreteSpace::finite(["y"]).unwrap();
        TameMap::new(
            x,
            y,
            BTreeMap::new(),
            [("F".to_string(), FamilyRule::ConstTo(atom("y")))].into(),
        )
        .unwrap()
    }

    fn shift(offset: u64) -> TameMap {
        let x = DiscreteSpace::new(Vec::<String>::new(), ["F"]).unwrap();
        let y = DiscreteSpace::new(Vec::<String>::new(), ["G"]).unwrap();
        TameMap::new(
            x,
            y,
            BTreeMap::new(),
            [(
                "F".to_string(),
                FamilyRule::Reindex {
                    target: "G".into(),
                    offset,
                },
            )]
            .into(),
        )
        .unwrap()
    }

    #[test]
    fn fiber_sizes() {
        assert_eq!(collapse().fiber_size(&atom("y")).unwrap(), Card::Omega);
        let id = TameMap::identity(&DiscreteSpace::finite(["a", "b", "c"]).unwrap());
        assert_eq!(id.fiber_size(&atom("a")).unwrap(), Card::Finite(1));
        let s = shift(2);
        assert_eq!(s.fiber_size(&Point::member("G", 5)).unwrap(), Card::Finite(1));
        assert_eq!(s.fiber_size(&Point::member("G", 1)).unwrap(), Card::Finite(0));
        assert!(matches!(s.fiber_size(&atom("nope")), Err(TopError::UnknownPoint(_))));
    }

    #[test]
    fn pr_of_collapse_excludes_target() {
        let f = collapse();
        assert!(f.pr_set().is_empty());
        let id = TameMap::identity(&DiscreteSpace::finite(["a", "b"]).unwrap());
        assert_eq!(id.pr_set(), id.target().whole());
    }

    #[test]
    fn pr_with_two_collapses() {
        let x = DiscreteSpace::new(Vec::<String>::new(), ["F1", "F2", "F3"]).unwrap();
        let y = DiscreteSpace::new(["y1", "y2", "z"], ["G"]).unwrap();
        let f = TameMap::new(
            x,
            y.clone(),
            BTreeMap::new(),
            [
                ("F1".to_string(), FamilyRule::ConstTo(atom("y1"))),
                ("F2".to_string(), FamilyRule::ConstTo(atom("y2"))),
                (
                    "F3".to_string(),
                    FamilyRule::Reindex {
                        target: "G".into(),
                        offset: 3,
                    },
                ),
            ]
            .into(),
        )
        .unwrap();
        let expected = y
            .whole()
            .difference(&DefinableSet::from_points(&[atom("y1"), atom("y2")]));
        assert_eq!(f.pr_set(), expected);
    }

    #[test]
    fn per_of_shift_is_cofinite() {
        let f = shift(1);
        assert_eq!(f.per_set(), DefinableSet::cofinite("G", [0]));
    }

    #[test]
    fn per_of_collapse_with_unhit_atom() {
        let x = DiscreteSpace::new(Vec::<String>::new(), ["F"]).unwrap();
        let y = DiscreteSpace::finite(["y", "z"]).unwrap();
        let f = TameMap::new(
            x,
            y,
            BTreeMap::new(),
            [("F".to_string(), FamilyRule::ConstTo(atom("y")))].into(),
        )
        .unwrap();
        assert_eq!(f.pr_set(), DefinableSet::singleton(&atom("z")));
        assert!(f.per_set().is_empty());
        let mp = minimal_perfection(&f);
        assert!(mp.y_side().contains(&atom("z")));
        assert!(mp.y_side().contains(&atom("y")));
        assert_eq!(minimal_fw(&f).y_side(), DefinableSet::singleton(&atom("y")));
    }

    #[test]
    fn properness_tests() {
        let f = collapse();
        assert!(f.is_f_proper(&DefinableSet::empty()));
        assert!(f.is_f_perfect(&DefinableSet::empty()));
        assert!(f.is_f_proper(&f.pr_set()));
        assert!(!f.is_f_proper(&DefinableSet::singleton(&atom("y"))));
        assert!(unified(&f, &DefinableSet::singleton(&atom("y"))).is_err());
    }

    #[test]
    fn one_point_compactification() {
        let z = unified(&collapse(), &DefinableSet::empty()).unwrap();
        let y_only = UnifiedSet::new(DefinableSet::empty(), DefinableSet::singleton(&atom("y")));
        assert!(!z.is_open(&y_only).unwrap());
        let nbhd = UnifiedSet::new(
            DefinableSet::cofinite("F", [0, 1, 7]),
            DefinableSet::singleton(&atom("y")),
        );
        assert!(z.is_open(&nbhd).unwrap());
        assert!(z
            .is_open(&UnifiedSet::new(DefinableSet::cofinite("F", []), DefinableSet::empty()))
            .unwrap());
        let whole = z.points();
        assert!(z.is_compact(&whole).unwrap());
        let walk = SequenceSpec::walk(Side::X, "F", 1, 0);
        assert!(z.converges(&walk, Side::Y, &atom("y")).unwrap());
        assert!(!z.converges(&walk, Side::X, &Point::member("F", 3)).unwrap());
    }

    #[test]
    fn convergence_to_other_point_fails() {
        let x = DiscreteSpace::new(Vec::<String>::new(), ["F"]).unwrap();
        let y = DiscreteSpace::finite(["y", "y2"]).unwrap();
        let f = TameMap::new(
            x,
            y,
            BTreeMap::new(),
            [("F".to_string(), FamilyRule::ConstTo(atom("y")))].into(),
        )
        .unwrap();
        let z = unified(&f, &DefinableSet::empty()).unwrap();
        let walk = SequenceSpec::walk(Side::X, "F", 2, 1);
        assert!(!z.converges(&walk, Side::Y, &atom("y2")).unwrap());
        let konst = SequenceSpec::constant(Side::X, Point::member("F", 4));
        assert!(z.converges(&konst, Side::X, &Point::member("F", 4)).unwrap());
        assert!(!z.converges(&konst, Side::Y, &atom("y")).unwrap());
    }

    #[test]
    fn proper_map_gives_discrete_unified_space() {
        let id = TameMap::identity(&DiscreteSpace::new(["a"], ["F"]).unwrap());
        let z = unified(&id, &DefinableSet::empty()).unwrap();
        assert!(z.is_isolated(Side::Y, &Point::member("F", 9)).unwrap());
        assert!(z.is_isolated(Side::Y, &atom("a")).unwrap());
        assert!(minimal_fw(&id).y_side().is_empty());
    }

    #[test]
    fn sequences_must_avoid_excision() {
        let f = shift(0);
        let z = unified(&f, &DefinableSet::singleton(&Point::member("G", 4))).unwrap();
        let bad = SequenceSpec::walk(Side::Y, "G", 2, 0);
        assert!(z.converges(&bad, Side::Y, &Point::member("G", 1)).is_err());
        let ok = SequenceSpec::walk(Side::Y, "G", 2, 1);
        assert!(!z.converges(&ok, Side::Y, &Point::member("G", 1)).unwrap());
    }

    #[test]
    fn composition_orders_share_point_sets() {
        let f = collapse();
        let w = DiscreteSpace::finite(["w"]).unwrap();
        let g = TameMap::new(
            f.target().clone(),
            w,
            [("y".to_string(), atom("w"))].into(),
            BTreeMap::new(),
        )
        .unwrap();
        let z1 = unified(&f, &DefinableSet::empty()).unwrap();
        let left = compose(&z1, &g, &DefinableSet::empty(), Association::Left).unwrap();
        let right = compose(&z1, &g, &DefinableSet::empty(), Association::Right).unwrap();
        assert_eq!(left.points(), right.points());
        let walk = SequenceSpec::walk(Layer::X, "F", 1, 0);
        for asc in [&left, &right] {
            assert!(asc.converges(&walk, Layer::Y, &atom("y")).unwrap());
            assert!(!asc.converges(&walk, Layer::W, &atom("w")).unwrap());
        }
        let ys = SequenceSpec::constant(Layer::Y, atom("y"));
        assert!(
            left.converges(&ys, Layer::W, &atom("w")).unwrap() == right.converges(&ys, Layer::W, &atom("w")).unwrap()
        );
    }
}
