//! Exact linear algebra over [`GaussRational`]: sparse vectors, an incremental
//! echelon basis used for span and membership queries, and the small matrix
//! types the algebra and Fock modules are built on.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::scalar::GaussRational;

/// Sparse vector keyed by coordinate. Zero entries are never stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct SparseVec {
    entries: BTreeMap<usize, GaussRational>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I: IntoIterator<Item = (usize, GaussRational)>>(it: I) -> Self {
        let mut v = Self::new();
        for (k, x) in it {
            v.add_at(k, &x);
        }
        v
    }

    pub fn get(&self, k: usize) -> GaussRational {
        self.entries.get(&k).cloned().unwrap_or_default()
    }

    pub fn add_at(&mut self, k: usize, x: &GaussRational) {
        if x.is_zero() {
            return;
        }
        let slot = self.entries.entry(k).or_default();
        *slot += x;
        if slot.is_zero() {
            self.entries.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &GaussRational)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn leading(&self) -> Option<(usize, &GaussRational)> {
        self.entries.iter().next().map(|(k, v)| (*k, v))
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: &GaussRational, other: &SparseVec) {
        for (k, x) in other.iter() {
            self.add_at(k, &(c * x));
        }
    }

    pub fn scale(&mut self, c: &GaussRational) {
        if c.is_zero() {
            self.entries.clear();
            return;
        }
        for v in self.entries.values_mut() {
            *v = &*v * c;
        }
    }
}

impl fmt::Debug for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Row-echelon basis of a growing set of vectors.
///
/// Every stored row has a distinct pivot (its smallest nonzero coordinate),
/// normalized to one. Reduction clears pivot coordinates in ascending order,
/// which terminates because a row only has entries at or after its pivot.
#[derive(Clone, Default, Debug)]
pub struct SpanBasis {
    rows: BTreeMap<usize, SparseVec>,
}

impl SpanBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vectors<I: IntoIterator<Item = SparseVec>>(vs: I) -> Self {
        let mut b = Self::new();
        for v in vs {
            b.insert(v);
        }
        b
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Remainder of `v` after eliminating every pivot coordinate.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut cursor = 0usize;
        loop {
            let next = v
                .entries
                .range(cursor..)
                .find(|(k, _)| self.rows.contains_key(k))
                .map(|(k, x)| (*k, x.clone()));
            let Some((k, coeff)) = next else { break };
            v.axpy(&-coeff, &self.rows[&k]);
            cursor = k + 1;
        }
        v
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut r = self.reduce(v);
        let Some((p, lead)) = r.leading() else {
            return false;
        };
        let inv = lead.inv().expect("leading entry is nonzero");
        r.scale(&inv);
        self.rows.insert(p, r);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.values()
    }
}

/// Rank of a finite family of vectors.
pub fn rank<'a, I: IntoIterator<Item = &'a SparseVec>>(vs: I) -> usize {
    SpanBasis::from_vectors(vs.into_iter().cloned()).rank()
}

/// Dense square-or-rectangular matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<GaussRational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![GaussRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, GaussRational::one());
        }
        m
    }

    /// Matrix unit `E_{ij}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, GaussRational::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &GaussRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: GaussRational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &GaussRational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Copy of the `h × w` window whose top-left corner is `(r0, c0)`.
    pub fn window(&self, r0: usize, c0: usize, h: usize, w: usize) -> Matrix {
        let mut out = Matrix::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                out.set(i, j, self.get(r0 + i, c0 + j).clone());
            }
        }
        out
    }

    pub fn paste(&mut self, r0: usize, c0: usize, m: &Matrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self.set(r0 + i, c0 + j, m.get(i, j).clone());
            }
        }
    }

    /// Row-major flattening into a sparse vector, offset by `base`.
    pub fn vectorize_into(&self, base: usize, out: &mut SparseVec) {
        for (k, x) in self.data.iter().enumerate() {
            out.add_at(base + k, x);
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Square sparse matrix stored by rows; used for operators on truncated Fock
/// spaces where almost every entry is zero.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<BTreeMap<usize, GaussRational>>,
}

impl SparseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            rows: vec![BTreeMap::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, GaussRational::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, i: usize, j: usize, x: GaussRational) {
        if x.is_zero() {
            self.rows[i].remove(&j);
        } else {
            self.rows[i].insert(j, x);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> GaussRational {
        self.rows[i].get(&j).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &GaussRational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(j, x)| (i, *j, x)))
    }

    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n, rhs.n, "operator dimension mismatch");
        let mut out = SparseMatrix::zeros(self.n);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc: BTreeMap<usize, GaussRational> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &rhs.rows[*k] {
                    *acc.entry(*j).or_default() += &(a * b);
                }
            }
            acc.retain(|_, x| !x.is_zero());
            out.rows[i] = acc;
        }
        out
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let mut out = self.clone();
        for (i, j, x) in rhs.entries() {
            let v = &out.get(i, j) + x;
            out.set(i, j, v);
        }
        out
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let mut out = self.clone();
        for (i, j, x) in rhs.entries() {
            let v = &out.get(i, j) - x;
            out.set(i, j, v);
        }
        out
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.n);
        for (i, j, x) in self.entries() {
            out.set(j, i, x.conj());
        }
        out
    }

    /// Row-major vectorization: entry `(i, j)` lands at coordinate `i·n + j`.
    pub fn vectorize(&self) -> SparseVec {
        SparseVec::from_entries(self.entries().map(|(i, j, x)| (i * self.n + j, x.clone())))
    }

    pub fn from_vectorized(n: usize, v: &SparseVec) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(n);
        for (k, x) in v.iter() {
            out.set(k / n, k % n, x.clone());
        }
        out
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseMatrix({}) ", self.n)?;
        f.debug_list().entries(self.entries()).finish()
    }
}
