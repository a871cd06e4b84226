//! Finite-dimensional C*-algebras `⊕ M_n` over exact Gaussian rationals.
//!
//! In finite dimensions every algebra is unital, so `M(B) = B`, every
//! morphism is proper and the corona vanishes. Two consequences are visible
//! in the API:
//!
//! * [`pimsner_ideal`] is always the whole source algebra. It is still
//!   returned, with [`PimsnerIdeal::collapsed`] set, so callers can see the
//!   degeneracy instead of having it silently disappear.
//! * The unified algebra `B ⊎_φ A = {(m, a) : m − φ(a) ∈ B}` is just
//!   `B ⊕ A`, and its quotient by `0 ⊕ J` is `B ⊕ A/J` with componentwise
//!   product.
//!
//! Closed two-sided ideals of a block algebra are exactly the sums of
//! blocks, so [`BlockIdeal`] is a set of block labels.
//!
//! Elements are vectorized block by block, each block row-major.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::discrete_top::{self, Point, TameMap, TopError};
use crate::linalg::{Matrix, SpanBasis, SparseVec};
use crate::scalar::GaussRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("duplicate block label `{0}`")]
    DuplicateLabel(String),
    #[error("block `{0}` has size zero")]
    ZeroBlock(String),
    #[error("unknown block `{0}`")]
    UnknownBlock(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("target block `{0}` cannot hold the requested multiplicities")]
    Capacity(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Topology(#[from] TopError),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Block {
    pub label: String,
    pub size: usize,
}

impl Block {
    pub fn new(label: impl Into<String>, size: usize) -> Self {
        Self {
            label: label.into(),
            size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FinDimAlgebra {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
}

impl FinDimAlgebra {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for b in &blocks {
            if b.size == 0 {
                return Err(AlgebraError::ZeroBlock(b.label.clone()));
            }
            if !seen.insert(b.label.clone()) {
                return Err(AlgebraError::DuplicateLabel(b.label.clone()));
            }
            offsets.push(dim);
            dim += b.size * b.size;
        }
        Ok(Self { blocks, offsets, dim })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn size(&self, k: usize) -> usize {
        self.blocks[k].size
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.blocks
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| AlgebraError::UnknownBlock(label.to_string()))
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.blocks.iter().map(|b| b.label.clone()).collect()
    }

    /// Coordinate of the matrix unit `e^k_{ij}`.
    pub fn coord(&self, k: usize, i: usize, j: usize) -> usize {
        self.offsets[k] + i * self.blocks[k].size + j
    }

    /// Inverse of [`coord`](Self::coord).
    pub fn decode(&self, c: usize) -> (usize, usize, usize) {
        let k = match self.offsets.binary_search(&c) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        let n = self.blocks[k].size;
        let r = c - self.offsets[k];
        (k, r / n, r % n)
    }

    /// All matrix units `(k, i, j)` in coordinate order.
    pub fn units(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.dim).map(|c| self.decode(c))
    }

    pub fn unit_vec(&self, k: usize, i: usize, j: usize) -> SparseVec {
        SparseVec::from_entries([(self.coord(k, i, j), GaussRational::one())])
    }

    pub fn one_vec(&self) -> SparseVec {
        SparseVec::from_entries(
            (0..self.blocks.len())
                .flat_map(|k| (0..self.blocks[k].size).map(move |i| (k, i)))
                .map(|(k, i)| (self.coord(k, i, i), GaussRational::one())),
        )
    }

    /// Product of vectorized elements.
    pub fn mul_vec(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (a, xa) in x.iter() {
            let (k, i, j) = self.decode(a);
            let n = self.blocks[k].size;
            // row j of block k in y
            let start = self.coord(k, j, 0);
            for l in 0..n {
                let yb = y.get(start + l);
                if !yb.is_zero() {
                    out.add_at(self.coord(k, i, l), &(xa * &yb));
                }
            }
        }
        out
    }

    pub fn adjoint_vec(&self, x: &SparseVec) -> SparseVec {
        SparseVec::from_entries(x.iter().map(|(c, v)| {
            let (k, i, j) = self.decode(c);
            (self.coord(k, j, i), v.conj())
        }))
    }

    pub fn element(&self, x: &SparseVec) -> AlgElement {
        let mut blocks: Vec<Matrix> = self.blocks.iter().map(|b| Matrix::zeros(b.size, b.size)).collect();
        for (c, v) in x.iter() {
            let (k, i, j) = self.decode(c);
            blocks[k].set(i, j, v.clone());
        }
        AlgElement { blocks }
    }

    pub fn whole(&self) -> BlockIdeal {
        BlockIdeal::new(self.labels())
    }
}

/// An element as a list of square matrices, one per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgElement {
    blocks: Vec<Matrix>,
}

impl AlgElement {
    pub fn new(alg: &FinDimAlgebra, blocks: Vec<Matrix>) -> Result<Self> {
        if blocks.len() != alg.num_blocks()
            || blocks
                .iter()
                .zip(alg.blocks())
                .any(|(m, b)| m.rows() != b.size || m.cols() != b.size)
        {
            return Err(AlgebraError::Shape("element blocks do not match the algebra".into()));
        }
        Ok(Self { blocks })
    }

    pub fn zero(alg: &FinDimAlgebra) -> Self {
        Self {
            blocks: alg.blocks().iter().map(|b| Matrix::zeros(b.size, b.size)).collect(),
        }
    }

    pub fn one(alg: &FinDimAlgebra) -> Self {
        Self {
            blocks: alg.blocks().iter().map(|b| Matrix::identity(b.size)).collect(),
        }
    }

    pub fn block(&self, k: usize) -> &Matrix {
        &self.blocks[k]
    }

    pub fn add(&self, rhs: &AlgElement) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn mul(&self, rhs: &AlgElement) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn scale(&self, c: &GaussRational) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn adjoint(&self) -> AlgElement {
        AlgElement {
            blocks: self.blocks.iter().map(Matrix::adjoint).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    pub fn vectorize(&self) -> SparseVec {
        let mut out = SparseVec::new();
        let mut base = 0;
        for m in &self.blocks {
            m.vectorize_into(base, &mut out);
            base += m.rows() * m.cols();
        }
        out
    }
}

/// A set of block labels.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BlockIdeal {
    labels: BTreeSet<String>,
}

impl BlockIdeal {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(labels: I) -> Self {
        Self {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_subset(&self, other: &BlockIdeal) -> bool {
        self.labels.is_subset(&other.labels)
    }

    pub fn intersection(&self, other: &BlockIdeal) -> BlockIdeal {
        BlockIdeal {
            labels: &self.labels & &other.labels,
        }
    }

    fn check_in(&self, alg: &FinDimAlgebra) -> Result<()> {
        let all = alg.labels();
        match self.labels.iter().find(|l| !all.contains(*l)) {
            Some(l) => Err(AlgebraError::UnknownBlock(l.clone())),
            None => Ok(()),
        }
    }

    pub fn dim(&self, alg: &FinDimAlgebra) -> usize {
        alg.blocks()
            .iter()
            .filter(|b| self.labels.contains(&b.label))
            .map(|b| b.size * b.size)
            .sum()
    }
}

/// Image-basis description of a linear map: column `c` is the image of the
/// `c`-th matrix unit of the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitMorphism {
    source: FinDimAlgebra,
    target: FinDimAlgebra,
    columns: Vec<SparseVec>,
}

impl ExplicitMorphism {
    pub fn new(source: FinDimAlgebra, target: FinDimAlgebra, columns: Vec<SparseVec>) -> Result<Self> {
        if columns.len() != source.dim() {
            return Err(AlgebraError::Shape(format!(
                "{} columns for a source of dimension {}",
                columns.len(),
                source.dim()
            )));
        }
        if let Some(c) = columns.iter().find(|c| c.iter().any(|(k, _)| k >= target.dim())) {
            return Err(AlgebraError::Shape(format!("column entry outside target: {c:?}")));
        }
        Ok(Self {
            source,
            target,
            columns,
        })
    }

    pub fn identity(alg: &FinDimAlgebra) -> Self {
        Self {
            source: alg.clone(),
            target: alg.clone(),
            columns: (0..alg.dim())
                .map(|c| SparseVec::from_entries([(c, GaussRational::one())]))
                .collect(),
        }
    }

    pub fn source(&self) -> &FinDimAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FinDimAlgebra {
        &self.target
    }

    pub fn column(&self, c: usize) -> &SparseVec {
        &self.columns[c]
    }

    pub fn apply_vec(&self, x: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (c, v) in x.iter() {
            out.axpy(v, &self.columns[c]);
        }
        out
    }

    pub fn apply(&self, x: &AlgElement) -> AlgElement {
        self.target.element(&self.apply_vec(&x.vectorize()))
    }

    /// `self ∘ first`
    pub fn after(&self, first: &ExplicitMorphism) -> Result<ExplicitMorphism> {
        if first.target != self.source {
            return Err(AlgebraError::Shape("composition of mismatched morphisms".into()));
        }
        Ok(ExplicitMorphism {
            source: first.source.clone(),
            target: self.target.clone(),
            columns: first.columns.iter().map(|c| self.apply_vec(c)).collect(),
        })
    }

    /// Multiplicativity and `*`-preservation on all pairs of matrix units.
    pub fn check_star_homomorphism(&self) -> Result<()> {
        let src = &self.source;
        for a in 0..src.dim() {
            let (k, i, j) = src.decode(a);
            let star = self.apply_vec(&src.adjoint_vec(&src.unit_vec(k, i, j)));
            if star != self.target.adjoint_vec(&self.columns[a]) {
                return Err(AlgebraError::Verification(format!(
                    "*-preservation fails on unit ({}, {i}, {j})",
                    src.blocks()[k].label
                )));
            }
            for b in 0..src.dim() {
                let (k2, j2, l) = src.decode(b);
                let lhs = self.target.mul_vec(&self.columns[a], &self.columns[b]);
                let rhs = if k == k2 && j == j2 {
                    self.columns[src.coord(k, i, l)].clone()
                } else {
                    SparseVec::new()
                };
                if lhs != rhs {
                    return Err(AlgebraError::Verification(format!(
                        "multiplicativity fails on units ({}, {i}, {j}) and ({}, {j2}, {l})",
                        src.blocks()[k].label,
                        src.blocks()[k2].label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A `*`-homomorphism given by a multiplicity matrix `M[t][s]` and the
/// canonical block-diagonal embedding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarMorphism {
    source: FinDimAlgebra,
    target: FinDimAlgebra,
    mult: Vec<Vec<u64>>,
}

impl StarMorphism {
    pub fn new(source: FinDimAlgebra, target: FinDimAlgebra, mult: Vec<Vec<u64>>) -> Result<Self> {
        if mult.len() != target.num_blocks() || mult.iter().any(|row| row.len() != source.num_blocks()) {
            return Err(AlgebraError::Shape(format!(
                "multiplicity matrix must be {}×{}",
                target.num_blocks(),
                source.num_blocks()
            )));
        }
        for (t, row) in mult.iter().enumerate() {
            let used: u64 = row.iter().zip(source.blocks()).map(|(m, b)| m * b.size as u64).sum();
            if used > target.size(t) as u64 {
                return Err(AlgebraError::Capacity(target.blocks()[t].label.clone()));
            }
        }
        Ok(Self { source, target, mult })
    }

    pub fn identity(alg: &FinDimAlgebra) -> Self {
        let n = alg.num_blocks();
        Self {
            source: alg.clone(),
            target: alg.clone(),
            mult: (0..n).map(|t| (0..n).map(|s| u64::from(s == t)).collect()).collect(),
        }
    }

    pub fn source(&self) -> &FinDimAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FinDimAlgebra {
        &self.target
    }

    pub fn multiplicities(&self) -> &[Vec<u64>] {
        &self.mult
    }

    pub fn multiplicity(&self, t: usize, s: usize) -> u64 {
        self.mult[t][s]
    }

    pub fn is_unital(&self) -> bool {
        self.mult.iter().enumerate().all(|(t, row)| {
            row.iter()
                .zip(self.source.blocks())
                .map(|(m, b)| m * b.size as u64)
                .sum::<u64>()
                == self.target.size(t) as u64
        })
    }

    pub fn is_injective(&self) -> bool {
        (0..self.source.num_blocks()).all(|s| self.mult.iter().any(|row| row[s] > 0))
    }

    /// Diagonal offsets at which copies of source block `s` sit inside target block `t`.
    fn placements(&self, t: usize, s: usize) -> Vec<usize> {
        let mut off = 0;
        let mut out = Vec::new();
        for (s2, &m) in self.mult[t].iter().enumerate() {
            let n = self.source.size(s2);
            for _ in 0..m {
                if s2 == s {
                    out.push(off);
                }
                off += n;
            }
        }
        out
    }

    pub fn to_explicit(&self) -> ExplicitMorphism {
        let place: Vec<Vec<Vec<usize>>> = (0..self.target.num_blocks())
            .map(|t| (0..self.source.num_blocks()).map(|s| self.placements(t, s)).collect())
            .collect();
        let columns = self
            .source
            .units()
            .map(|(s, i, j)| {
                let mut col = SparseVec::new();
                for (t, per_s) in place.iter().enumerate() {
                    for &off in &per_s[s] {
                        col.add_at(self.target.coord(t, off + i, off + j), &GaussRational::one());
                    }
                }
                col
            })
            .collect();
        ExplicitMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            columns,
        }
    }

    pub fn apply(&self, x: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero(&self.target);
        for t in 0..self.target.num_blocks() {
            for s in 0..self.source.num_blocks() {
                for off in self.placements(t, s) {
                    out.blocks[t].paste(off, off, &x.blocks[s]);
                }
            }
        }
        out
    }

    /// `self ∘ first`; multiplicities multiply as matrices.
    pub fn after(&self, first: &StarMorphism) -> Result<StarMorphism> {
        if first.target != self.source {
            return Err(AlgebraError::Shape("composition of mismatched morphisms".into()));
        }
        let mult = (0..self.target.num_blocks())
            .map(|t| {
                (0..first.source.num_blocks())
                    .map(|s| {
                        (0..self.source.num_blocks())
                            .map(|m| self.mult[t][m] * first.mult[m][s])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        StarMorphism::new(first.source.clone(), self.target.clone(), mult)
    }
}

/// Source blocks with an all-zero multiplicity column.
pub fn kernel_ideal(m: &StarMorphism) -> BlockIdeal {
    BlockIdeal::new(
        m.source
            .blocks()
            .iter()
            .enumerate()
            .filter(|(s, _)| m.mult.iter().all(|row| row[*s] == 0))
            .map(|(_, b)| b.label.clone()),
    )
}

/// Blocks orthogonal to `ideal`: the complement.
pub fn annihilator(alg: &FinDimAlgebra, ideal: &BlockIdeal) -> Result<BlockIdeal> {
    ideal.check_in(alg)?;
    Ok(BlockIdeal::new(alg.labels().difference(ideal.labels()).cloned()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PimsnerIdeal {
    pub ideal: BlockIdeal,
    /// Always true here: with `M(B) = B` every element is mapped into `B`.
    pub collapsed: bool,
}

pub fn pimsner_ideal(m: &StarMorphism) -> PimsnerIdeal {
    PimsnerIdeal {
        ideal: m.source.whole(),
        collapsed: true,
    }
}

/// `pim(φ) ∩ ker(φ)^⊥`
pub fn katsura_ideal(m: &StarMorphism) -> BlockIdeal {
    let ann = annihilator(&m.source, &kernel_ideal(m)).expect("kernel lies in the source");
    ann.intersection(&pimsner_ideal(m).ideal)
}

/// `B ⊎_φ^J A`, realized as `B ⊕ A/J` with its structure maps.
#[derive(Clone, Debug)]
pub struct QuotientFWAlgebra {
    pub a: FinDimAlgebra,
    pub b: FinDimAlgebra,
    pub phi: StarMorphism,
    pub j: BlockIdeal,
    /// `A/J`: the blocks of `A` outside `J`, in order.
    pub a_mod_j: FinDimAlgebra,
    pub carrier: FinDimAlgebra,
    /// `J ⊆ kat(φ)`
    pub perfect: bool,
    pub iota_b: StarMorphism,
    pub phi_j: StarMorphism,
    /// Carrier onto `B`, the multiplier map.
    pub alpha: StarMorphism,
    /// Carrier onto `A/J`.
    pub q: StarMorphism,
    /// Index in `A` of each `A/J` block.
    pub kept: Vec<usize>,
}

pub fn quotient_fw(phi: &StarMorphism, j: &BlockIdeal) -> Result<QuotientFWAlgebra> {
    let a = phi.source().clone();
    let b = phi.target().clone();
    j.check_in(&a)?;
    if !phi.is_unital() {
        return Err(AlgebraError::Precondition("φ must be unital".into()));
    }
    if !j.is_subset(&pimsner_ideal(phi).ideal) {
        return Err(AlgebraError::Precondition("J is not contained in pim(φ)".into()));
    }
    let kept: Vec<usize> = (0..a.num_blocks())
        .filter(|&s| !j.contains(&a.blocks()[s].label))
        .collect();
    let a_mod_j = FinDimAlgebra::new(kept.iter().map(|&s| a.blocks()[s].clone()).collect())?;
    if let Some(clash) = b.labels().intersection(&a_mod_j.labels()).next() {
        return Err(AlgebraError::DuplicateLabel(clash.clone()));
    }
    let carrier = FinDimAlgebra::new(b.blocks().iter().chain(a_mod_j.blocks()).cloned().collect())?;
    let (nb, nq, na) = (b.num_blocks(), a_mod_j.num_blocks(), a.num_blocks());

    let iota_mult = (0..nb + nq)
        .map(|t| (0..nb).map(|s| u64::from(t == s)).collect())
        .collect();
    let mut phi_j_mult: Vec<Vec<u64>> = phi.multiplicities().to_vec();
    for &s in &kept {
        phi_j_mult.push((0..na).map(|x| u64::from(x == s)).collect());
    }
    let alpha_mult = (0..nb)
        .map(|t| (0..nb + nq).map(|s| u64::from(s == t)).collect())
        .collect();
    let q_mult = (0..nq)
        .map(|t| (0..nb + nq).map(|s| u64::from(s == nb + t)).collect())
        .collect();

    Ok(QuotientFWAlgebra {
        perfect: j.is_subset(&katsura_ideal(phi)),
        iota_b: StarMorphism::new(b.clone(), carrier.clone(), iota_mult)?,
        phi_j: StarMorphism::new(a.clone(), carrier.clone(), phi_j_mult)?,
        alpha: StarMorphism::new(carrier.clone(), b.clone(), alpha_mult)?,
        q: StarMorphism::new(carrier.clone(), a_mod_j.clone(), q_mult)?,
        a,
        b,
        phi: phi.clone(),
        j: j.clone(),
        a_mod_j,
        carrier,
        kept,
    })
}

/// Carrier blocks meeting `ι_B(B)` (nonzero rows of `ι_B`).
fn image_blocks(m: &StarMorphism) -> BlockIdeal {
    BlockIdeal::new(
        m.target
            .blocks()
            .iter()
            .enumerate()
            .filter(|(t, _)| m.mult[*t].iter().any(|&x| x > 0))
            .map(|(_, b)| b.label.clone()),
    )
}

fn size_multiset(alg: &FinDimAlgebra, labels: &BTreeSet<String>) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for b in alg.blocks().iter().filter(|b| labels.contains(&b.label)) {
        *out.entry(b.size).or_insert(0) += 1;
    }
    out
}

/// `B^⊥` inside the carrier, after checking `pim(φ)/φ_J⁻¹(B) ≅ B^⊥` on
/// block-size multisets.
pub fn b_perp(qa: &QuotientFWAlgebra) -> Result<BlockIdeal> {
    let perp = annihilator(&qa.carrier, &image_blocks(&qa.iota_b))?;
    let b_rows: BTreeSet<usize> = (0..qa.b.num_blocks()).collect();
    // φ_J⁻¹(B): source blocks whose image stays inside the B rows
    let pre_b: BTreeSet<String> = (0..qa.a.num_blocks())
        .filter(|&s| (0..qa.carrier.num_blocks()).all(|t| b_rows.contains(&t) || qa.phi_j.mult[t][s] == 0))
        .map(|s| qa.a.blocks()[s].label.clone())
        .collect();
    let pim = pimsner_ideal(&qa.phi).ideal;
    let quotient: BTreeSet<String> = pim.labels().difference(&pre_b).cloned().collect();
    if size_multiset(&qa.a, &quotient) != size_multiset(&qa.carrier, perp.labels()) {
        return Err(AlgebraError::Verification("pim(φ)/φ_J⁻¹(B) and B^⊥ differ".into()));
    }
    Ok(perp)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionReport {
    pub carrier_dim: usize,
    pub b_dim: usize,
    pub a_dim: usize,
    pub j_dim: usize,
}

/// Verifies the split extension `0 → B → B ⊎_φ^J A → A/J → 0`.
pub fn check_extension(qa: &QuotientFWAlgebra) -> Result<ExtensionReport> {
    let rep = ExtensionReport {
        carrier_dim: qa.carrier.dim(),
        b_dim: qa.b.dim(),
        a_dim: qa.a.dim(),
        j_dim: qa.j.dim(&qa.a),
    };
    if rep.carrier_dim + rep.j_dim != rep.b_dim + rep.a_dim {
        return Err(AlgebraError::Verification(
            "dim(carrier) = dim B + dim A − dim J".into(),
        ));
    }
    if kernel_ideal(&qa.q) != image_blocks(&qa.iota_b) {
        return Err(AlgebraError::Verification("ker(q) = ι_B(B)".into()));
    }
    if !qa.iota_b.is_injective() {
        return Err(AlgebraError::Verification("ι_B injective".into()));
    }
    // q ∘ φ_J against the canonical quotient A → A/J, on matrix units
    let qphi = qa.q.to_explicit().after(&qa.phi_j.to_explicit())?;
    for (s, i, j) in qa.a.units() {
        let expected = match qa.kept.iter().position(|&k| k == s) {
            Some(t) => qa.a_mod_j.unit_vec(t, i, j),
            None => SparseVec::new(),
        };
        if qphi.column(qa.a.coord(s, i, j)) != &expected {
            return Err(AlgebraError::Verification("q ∘ φ_J = canonical quotient".into()));
        }
    }
    let aphi = qa.alpha.after(&qa.phi_j)?;
    if aphi.to_explicit() != qa.phi.to_explicit() {
        return Err(AlgebraError::Verification("α ∘ φ_J = φ".into()));
    }
    Ok(rep)
}

/// The inclusion of `B` into `C` along the blocks `c_blocks`.
fn inclusion(b: &FinDimAlgebra, c: &FinDimAlgebra, c_blocks: &[usize]) -> Result<ExplicitMorphism> {
    if c_blocks.len() != b.num_blocks() {
        return Err(AlgebraError::Shape("one C-block per B-block required".into()));
    }
    let distinct: BTreeSet<usize> = c_blocks.iter().copied().collect();
    if distinct.len() != c_blocks.len() {
        return Err(AlgebraError::Shape("repeated C-block for B".into()));
    }
    for (k, &t) in c_blocks.iter().enumerate() {
        if t >= c.num_blocks() || c.size(t) != b.size(k) {
            return Err(AlgebraError::Shape(format!(
                "C-block for `{}` has the wrong size",
                b.blocks()[k].label
            )));
        }
    }
    let columns = b.units().map(|(k, i, j)| c.unit_vec(c_blocks[k], i, j)).collect();
    ExplicitMorphism::new(b.clone(), c.clone(), columns)
}

/// `α_C`: `C → B`, restricting to the distinguished blocks.
fn restriction(b: &FinDimAlgebra, c: &FinDimAlgebra, c_blocks: &[usize]) -> Result<ExplicitMorphism> {
    let columns = c
        .units()
        .map(|(t, i, j)| match c_blocks.iter().position(|&x| x == t) {
            Some(k) => b.unit_vec(k, i, j),
            None => SparseVec::new(),
        })
        .collect();
    ExplicitMorphism::new(c.clone(), b.clone(), columns)
}

/// `σ_C(b + φ(a), a + J) = b + π(a)` for an algebra `C` containing `B` as
/// the ideal on `c_blocks`, and `π: A → C` with `α_C ∘ π = φ`, `π|_J = φ|_J`.
pub fn sigma_universal(
    qa: &QuotientFWAlgebra,
    c: &FinDimAlgebra,
    c_blocks: &[usize],
    pi: &ExplicitMorphism,
) -> Result<ExplicitMorphism> {
    let pre = |e: AlgebraError| AlgebraError::Precondition(e.to_string());
    if pi.source() != &qa.a || pi.target() != c {
        return Err(AlgebraError::Precondition("π must map A to C".into()));
    }
    let iota_c = inclusion(&qa.b, c, c_blocks).map_err(pre)?;
    let alpha_c = restriction(&qa.b, c, c_blocks)?;
    pi.check_star_homomorphism().map_err(pre)?;
    let phi = qa.phi.to_explicit();
    if alpha_c.after(pi)? != phi {
        return Err(AlgebraError::Precondition("α_C ∘ π ≠ φ".into()));
    }
    for (s, i, j) in qa.a.units() {
        if qa.j.contains(&qa.a.blocks()[s].label) {
            let col = qa.a.coord(s, i, j);
            if pi.column(col) != &iota_c.apply_vec(phi.column(col)) {
                return Err(AlgebraError::Precondition("π|_J ≠ φ|_J".into()));
            }
        }
    }

    let nb = qa.b.num_blocks();
    let columns: Vec<SparseVec> = qa
        .carrier
        .units()
        .map(|(t, i, j)| {
            if t < nb {
                iota_c.apply_vec(&qa.b.unit_vec(t, i, j))
            } else {
                // (−φ(a), [a]) for the zero-on-J lift a
                let a = qa.a.unit_vec(qa.kept[t - nb], i, j);
                let mut out = pi.apply_vec(&a);
                let mut minus = iota_c.apply_vec(&phi.apply_vec(&a));
                minus.scale(&-GaussRational::one());
                out.axpy(&GaussRational::one(), &minus);
                out
            }
        })
        .collect();
    let sigma = ExplicitMorphism::new(qa.carrier.clone(), c.clone(), columns)?;

    let post = |what: &str| AlgebraError::Verification(what.to_string());
    sigma.check_star_homomorphism()?;
    if sigma.after(&qa.phi_j.to_explicit())? != *pi {
        return Err(post("σ_C ∘ φ_J = π"));
    }
    if sigma.after(&qa.iota_b.to_explicit())? != iota_c {
        return Err(post("σ_C ∘ ι_B = inclusion of B"));
    }
    // σ_C is pinned down by φ_J(A) + ι_B(B), which spans the carrier
    let phi_j = qa.phi_j.to_explicit();
    let iota_b = qa.iota_b.to_explicit();
    let spanning = (0..qa.a.dim())
        .map(|c| phi_j.column(c).clone())
        .chain((0..qa.b.dim()).map(|c| iota_b.column(c).clone()));
    if SpanBasis::from_vectors(spanning).rank() != qa.carrier.dim() {
        return Err(post("φ_J(A) + ι_B(B) spans the carrier"));
    }
    Ok(sigma)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    pub blocks: usize,
    pub x_points: usize,
    pub y_points: usize,
    /// Carrier block label ↔ unified-space point, in carrier order.
    pub spectrum: Vec<(String, discrete_top::Side, Point)>,
}

/// `C(X) ⊎_{f*} C(Y)` for a map of finite spaces, compared with
/// `X ⊎_f Y`.
pub fn commutative_duality_check(f: &TameMap) -> Result<DualityReport> {
    if !f.source().is_finite() || !f.target().is_finite() {
        return Err(AlgebraError::Precondition("map is not between finite spaces".into()));
    }
    let xs: Vec<String> = f.source().atoms().iter().cloned().collect();
    let ys: Vec<String> = f.target().atoms().iter().cloned().collect();
    let cx = FinDimAlgebra::new(xs.iter().map(|x| Block::new(format!("x:{x}"), 1)).collect())?;
    let cy = FinDimAlgebra::new(ys.iter().map(|y| Block::new(format!("y:{y}"), 1)).collect())?;
    // f*(g) = g ∘ f: the character at x factors through f(x)
    let mut mult = Vec::with_capacity(xs.len());
    for x in &xs {
        let img = f.apply(&Point::atom(x))?;
        mult.push(ys.iter().map(|y| u64::from(img == Point::atom(y))).collect());
    }
    let fstar = StarMorphism::new(cy.clone(), cx, mult)?;
    if !fstar.is_unital() {
        return Err(AlgebraError::Verification("f* is unital".into()));
    }
    let qa = quotient_fw(&fstar, &BlockIdeal::empty())?;
    check_extension(&qa)?;

    let fail = |what: &str| Err(AlgebraError::Verification(what.to_string()));
    if qa.carrier.num_blocks() != xs.len() + ys.len() {
        return fail("block count = |X| + |Y|");
    }
    if qa.carrier.blocks().iter().any(|b| b.size != 1) {
        return fail("all blocks one-dimensional");
    }

    let z = discrete_top::unified(f, &discrete_top::DefinableSet::empty())?;
    let pts = z.points();
    let mut spectrum = Vec::new();
    let mut x_seen = BTreeSet::new();
    let mut y_seen = BTreeSet::new();
    for b in qa.carrier.blocks() {
        let (side, name) = match b.label.split_once(':') {
            Some(("x", n)) => (discrete_top::Side::X, n),
            Some(("y", n)) => (discrete_top::Side::Y, n),
            _ => return fail("carrier labels carry provenance"),
        };
        let p = Point::atom(name);
        if !pts.contains(side, &p) {
            return fail("spectrum point lies in the unified space");
        }
        let fresh = match side {
            discrete_top::Side::X => x_seen.insert(p.clone()),
            discrete_top::Side::Y => y_seen.insert(p.clone()),
        };
        if !fresh {
            return fail("spectrum is injective");
        }
        spectrum.push((b.label.clone(), side, p));
    }
    let total = |s: &discrete_top::DefinableSet| s.finite_points().map(|v| v.len());
    if Some(x_seen.len()) != total(&pts.x) || Some(y_seen.len()) != total(&pts.y) {
        return fail("spectrum is surjective");
    }
    // f*(δ_y) evaluated at the character of x is [f(x) = y]
    let phi_j = qa.phi_j.to_explicit();
    for (s, y) in ys.iter().enumerate() {
        let img = phi_j.column(s);
        for (t, x) in xs.iter().enumerate() {
            let hit = !img.get(qa.carrier.coord(t, 0, 0)).is_zero();
            if hit != (f.apply(&Point::atom(x))? == Point::atom(y)) {
                return fail("characters compose with f");
            }
        }
    }
    Ok(DualityReport {
        blocks: qa.carrier.num_blocks(),
        x_points: xs.len(),
        y_points: ys.len(),
        spectrum,
    })
}
