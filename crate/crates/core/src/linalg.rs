//! Dense exact linear algebra over a [`Field`].
//!
//! Linear maps act on row vectors: `v -> v * M`. The image of `M` is its
//! row space and `left_kernel` is the kernel of the map. Linear systems
//! with unknown column vector `x` are written `A x = b` and solved by
//! [`Mat::solve`] / [`Mat::nullspace`].

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::ff::{Field, Fp};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("operands are over different fields")]
    FieldMismatch,
    #[error("enumeration needs {required} subspaces, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
}

fn dim_err(msg: impl Into<String>) -> LinalgError {
    LinalgError::Dimension(msg.into())
}

#[derive(Clone)]
pub struct Mat<F: Field> {
    field: F,
    rows: usize,
    cols: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> PartialEq for Mat<F> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl<F: Field> Eq for Mat<F> {}

impl<F: Field> Hash for Mat<F> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rows.hash(state);
        self.cols.hash(state);
        self.data.hash(state);
    }
}

impl<F: Field> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}x{}]", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl<F: Field> Mat<F> {
    pub fn zeros(field: F, rows: usize, cols: usize) -> Self {
        let z = field.zero();
        Mat {
            data: vec![z; rows * cols],
            field,
            rows,
            cols,
        }
    }

    pub fn identity(field: F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = m.field.one();
        }
        m
    }

    pub fn from_rows(field: F, rows: &[Vec<F::Elem>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(dim_err("ragged rows"));
        }
        Ok(Mat {
            field,
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    /// Build from rows, with an explicit column count (needed for 0 rows).
    pub fn from_rows_with_cols(
        field: F,
        cols: usize,
        rows: &[Vec<F::Elem>],
    ) -> Result<Self, LinalgError> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(dim_err("row length differs from column count"));
        }
        Ok(Mat {
            field,
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().cloned().collect(),
        })
    }

    pub fn from_data(field: F, rows: usize, cols: usize, data: Vec<F::Elem>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(dim_err(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Mat { field, rows, cols, data })
    }

    pub fn from_fn(field: F, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { field, rows, cols, data }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[F::Elem] {
        &self.data
    }
    pub fn into_data(self) -> Vec<F::Elem> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<F::Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.field.is_zero(x))
    }

    fn check_field(&self, other: &Self) -> Result<(), LinalgError> {
        if self.field.same_field(&other.field) {
            Ok(())
        } else {
            Err(LinalgError::FieldMismatch)
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(dim_err(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(dim_err("matrix sum shapes"));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| self.field.add(a, b))
            .collect();
        Ok(Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.add(&other.scale(&self.field.from_int(-1)))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let data = self.data.iter().map(|a| self.field.mul(a, c)).collect();
        Mat { field: self.field.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.field.clone(), self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[F::Elem]) -> Result<Vec<F::Elem>, LinalgError> {
        if v.len() != self.rows {
            return Err(dim_err(format!("vector of length {} times {}x{}", v.len(), self.rows, self.cols)));
        }
        let f = &self.field;
        let mut out = vec![f.zero(); self.cols];
        for (i, a) in v.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = f.add(o, &f.mul(a, self.get(i, j)));
            }
        }
        Ok(out)
    }

    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_field(other)?;
        if self.cols != other.cols {
            return Err(dim_err("vstack column counts"));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Mat { field: self.field.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_field(other)?;
        if self.rows != other.rows {
            return Err(dim_err("hstack row counts"));
        }
        Ok(Mat::from_fn(self.field.clone(), self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn block_diag(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_field(other)?;
        let (r, c) = (self.rows, self.cols);
        Ok(Mat::from_fn(self.field.clone(), r + other.rows, c + other.cols, |i, j| {
            if i < r && j < c {
                self.get(i, j).clone()
            } else if i >= r && j >= c {
                other.get(i - r, j - c).clone()
            } else {
                self.field.zero()
            }
        }))
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let (r0, c0) = (rows.start, cols.start);
        Mat::from_fn(self.field.clone(), rows.len(), cols.len(), |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// In-place reduction to reduced row echelon form; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !f.is_zero(self.get(i, c))) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).expect("nonzero pivot");
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), &inv);
                self.set(r, j, v);
            }
            let pivot_row: Vec<F::Elem> = self.row(r)[c..].to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for (off, pv) in pivot_row.iter().enumerate() {
                    if f.is_zero(pv) {
                        continue;
                    }
                    let j = c + off;
                    let v = f.sub(self.get(i, j), &f.mul(&factor, pv));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let piv = m.rref_in_place();
        (m, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x = 0}` (column vectors, returned as rows).
    pub fn nullspace(&self) -> Vec<Vec<F::Elem>> {
        let (r, pivots) = self.rref();
        let f = &self.field;
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, free));
            }
            out.push(v);
        }
        out
    }

    /// Basis of `{y : y * self = 0}`, the kernel of the map.
    pub fn left_kernel(&self) -> Vec<Vec<F::Elem>> {
        self.transpose().nullspace()
    }

    /// Solve `self * x = b`: one particular solution plus a kernel basis,
    /// or `None` if the system is inconsistent.
    #[allow(clippy::type_complexity)]
    pub fn solve(&self, b: &[F::Elem]) -> Result<Option<(Vec<F::Elem>, Vec<Vec<F::Elem>>)>, LinalgError> {
        if b.len() != self.rows {
            return Err(dim_err(format!("right-hand side of length {} for {} equations", b.len(), self.rows)));
        }
        let f = &self.field;
        let aug = Mat::from_fn(f.clone(), self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut x = vec![f.zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(row, self.cols).clone();
        }
        Ok(Some((x, self.nullspace())))
    }

    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = self.hstack(&Mat::identity(self.field.clone(), n)).ok()?;
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.submatrix(0..n, n..2 * n))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }
}

/// Accumulates the rows of a tall homogeneous system, keeping only a
/// reduced basis of the row space so memory stays bounded by the number of
/// unknowns.
#[derive(Clone, Debug)]
pub struct RowReducer<F: Field> {
    field: F,
    cols: usize,
    basis: Mat<F>,
    pending: Vec<F::Elem>,
}

impl<F: Field> RowReducer<F> {
    pub fn new(field: F, cols: usize) -> Self {
        RowReducer { basis: Mat::zeros(field.clone(), 0, cols), field, cols, pending: Vec::new() }
    }

    pub fn push(&mut self, row: &[F::Elem]) {
        assert_eq!(row.len(), self.cols, "row length");
        if row.iter().all(|x| self.field.is_zero(x)) {
            return;
        }
        self.pending.extend_from_slice(row);
        if self.pending.len() >= 2 * self.cols * self.cols.max(1) {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let rows = self.pending.len() / self.cols;
        let pending = Mat::from_data(self.field.clone(), rows, self.cols, std::mem::take(&mut self.pending))
            .expect("whole rows");
        let (r, piv) = self.basis.vstack(&pending).expect("same width").rref();
        self.basis = r.submatrix(0..piv.len(), 0..self.cols);
    }

    pub fn rank(&mut self) -> usize {
        self.flush();
        self.basis.rows()
    }

    /// Reduced echelon basis of the row space.
    pub fn row_space(mut self) -> Mat<F> {
        self.flush();
        self.basis
    }

    /// Kernel of the system, as in [`Mat::nullspace`].
    pub fn nullspace(self) -> Vec<Vec<F::Elem>> {
        self.row_space().nullspace()
    }
}

/// Expresses vectors in terms of a fixed list of independent rows.
#[derive(Clone, Debug)]
pub struct BasisCoords<F: Field> {
    echelon: Mat<F>,
    pivots: Vec<usize>,
    /// `echelon = transform * basis`
    transform: Mat<F>,
}

impl<F: Field> BasisCoords<F> {
    /// Fails when the rows are dependent.
    pub fn new(basis: &Mat<F>) -> Result<Self, LinalgError> {
        let k = basis.rows();
        let f = basis.field().clone();
        let aug = basis.hstack(&Mat::identity(f, k))?;
        let (r, pivots) = aug.rref();
        let pivots: Vec<usize> = pivots.into_iter().filter(|&c| c < basis.cols()).collect();
        if pivots.len() != k {
            return Err(dim_err("basis rows are linearly dependent"));
        }
        Ok(BasisCoords {
            echelon: r.submatrix(0..k, 0..basis.cols()),
            transform: r.submatrix(0..k, basis.cols()..basis.cols() + k),
            pivots,
        })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    /// Coordinates of `v` in the basis, or `None` when `v` is outside the span.
    pub fn coords(&self, v: &[F::Elem]) -> Option<Vec<F::Elem>> {
        let f = self.echelon.field();
        let y: Vec<F::Elem> = self.pivots.iter().map(|&c| v[c].clone()).collect();
        let back = self.echelon.vec_mul(&y).ok()?;
        if back.as_slice() != v {
            return None;
        }
        let _ = f;
        self.transform.vec_mul(&y).ok()
    }
}

/// A subspace of `F^n`, stored by its reduced row echelon basis, which is
/// canonical: equal subspaces have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace<F: Field> {
    ambient: usize,
    basis: Mat<F>,
    pivots: Vec<usize>,
}

impl<F: Field> fmt::Debug for Subspace<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {}: {:?})", self.dim(), self.ambient, self.basis.row_vecs())
    }
}

impl<F: Field> Subspace<F> {
    pub fn zero(field: F, ambient: usize) -> Self {
        Subspace { ambient, basis: Mat::zeros(field, 0, ambient), pivots: vec![] }
    }

    pub fn full(field: F, ambient: usize) -> Self {
        Subspace { ambient, basis: Mat::identity(field, ambient), pivots: (0..ambient).collect() }
    }

    pub fn span(field: F, ambient: usize, vectors: &[Vec<F::Elem>]) -> Result<Self, LinalgError> {
        let m = Mat::from_rows_with_cols(field, ambient, vectors)?;
        Ok(Self::row_space(&m))
    }

    pub fn row_space(m: &Mat<F>) -> Self {
        let (r, pivots) = m.rref();
        let k = pivots.len();
        Subspace { ambient: m.cols(), basis: r.submatrix(0..k, 0..m.cols()), pivots }
    }

    pub fn field(&self) -> &F {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> &Mat<F> {
        &self.basis
    }

    pub fn basis_vecs(&self) -> Vec<Vec<F::Elem>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check(&self, other: &Self) -> Result<(), LinalgError> {
        if self.ambient != other.ambient {
            return Err(dim_err(format!("ambient {} vs {}", self.ambient, other.ambient)));
        }
        if !self.field().same_field(other.field()) {
            return Err(LinalgError::FieldMismatch);
        }
        Ok(())
    }

    /// Reduce `v` modulo the subspace (against the echelon basis).
    pub fn reduce(&self, v: &[F::Elem]) -> Vec<F::Elem> {
        let f = self.field();
        let mut out = v.to_vec();
        for (row, &pc) in self.pivots.iter().enumerate() {
            let c = out[pc].clone();
            if f.is_zero(&c) {
                continue;
            }
            for (j, b) in self.basis.row(row).iter().enumerate() {
                out[j] = f.sub(&out[j], &f.mul(&c, b));
            }
        }
        out
    }

    pub fn contains(&self, v: &[F::Elem]) -> Result<bool, LinalgError> {
        if v.len() != self.ambient {
            return Err(dim_err("vector length differs from ambient dimension"));
        }
        let f = self.field();
        Ok(self.reduce(v).iter().all(|x| f.is_zero(x)))
    }

    pub fn is_subspace_of(&self, other: &Self) -> Result<bool, LinalgError> {
        self.check(other)?;
        for v in self.basis_vecs() {
            if !other.contains(&v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check(other)?;
        Ok(Self::row_space(&self.basis.vstack(&other.basis)?))
    }

    /// Intersection via the kernel of the stacked system `a S = b T`.
    pub fn intersect(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check(other)?;
        let stacked = self.basis.vstack(&other.basis)?;
        let k = self.dim();
        let vecs: Vec<Vec<F::Elem>> = stacked
            .left_kernel()
            .into_iter()
            .map(|coeffs| self.basis.vec_mul(&coeffs[..k]).expect("shape"))
            .collect();
        Subspace::span(self.field().clone(), self.ambient, &vecs)
    }

    /// Unit vectors at the non-pivot columns: a complement whose images
    /// form a basis of the quotient.
    pub fn complement_basis(&self) -> Vec<Vec<F::Elem>> {
        let f = self.field();
        self.free_columns()
            .into_iter()
            .map(|c| {
                let mut v = vec![f.zero(); self.ambient];
                v[c] = f.one();
                v
            })
            .collect()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ambient).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// The canonical projection `F^n -> F^n / S` in complement coordinates:
    /// an `n x (n - dim S)` matrix sending each complement unit vector to a
    /// unit vector and `S` to zero.
    pub fn quotient_map(&self) -> Mat<F> {
        let f = self.field().clone();
        let free = self.free_columns();
        let mut q = Mat::zeros(f.clone(), self.ambient, free.len());
        for (t, &c) in free.iter().enumerate() {
            q.set(c, t, f.one());
        }
        for (row, &pc) in self.pivots.iter().enumerate() {
            for (t, &c) in free.iter().enumerate() {
                q.set(pc, t, f.neg(self.basis.get(row, c)));
            }
        }
        q
    }

    /// Image under `v -> v * m`.
    pub fn image_under(&self, m: &Mat<F>) -> Result<Self, LinalgError> {
        if m.rows() != self.ambient {
            return Err(dim_err("map domain differs from ambient dimension"));
        }
        Ok(Self::row_space(&self.basis.mul(m)?))
    }

    /// Preimage under `v -> v * m` of this subspace.
    pub fn preimage_under(&self, m: &Mat<F>) -> Result<Self, LinalgError> {
        if m.cols() != self.ambient {
            return Err(dim_err("map codomain differs from ambient dimension"));
        }
        // v in preimage iff v m q = 0 for the quotient map q
        let composite = m.mul(&self.quotient_map())?;
        let vecs = composite.left_kernel();
        Subspace::span(m.field().clone(), m.rows(), &vecs)
    }
}

impl Ord for Subspace<Fp> {
    /// Dimension first, then the flattened echelon basis.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.ambient, self.dim(), self.basis.data()).cmp(&(other.ambient, other.dim(), other.basis.data()))
    }
}

impl PartialOrd for Subspace<Fp> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of `s`-dimensional subspaces of `GF(q)^d`.
pub fn gaussian_binomial(d: usize, s: usize, q: u64) -> BigUint {
    assert!(s <= d, "gaussian binomial needs s <= d");
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 1..=s {
        num *= q.pow(d as u32) - q.pow(i as u32 - 1);
        den *= q.pow(s as u32) - q.pow(i as u32 - 1);
    }
    let value = num / den;
    assert!(value >= q.pow((s * (d - s)) as u32), "gaussian binomial lower bound");
    value
}

/// All `dim`-dimensional subspaces of `(Z/p)^ambient`.
///
/// Ordering: pivot column sets in increasing lexicographic order, and
/// within one pivot set the free echelon entries counted in base `p`,
/// row-major with the first free entry most significant. Any index range
/// of the stream can be produced directly with [`SubspaceEnumerator::range`].
#[derive(Clone, Debug)]
pub struct SubspaceEnumerator {
    field: Fp,
    ambient: usize,
    dim: usize,
    /// (pivot columns, free positions (row, col), first global index)
    blocks: Vec<(Vec<usize>, Vec<(usize, usize)>, u64)>,
    total: u64,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            if n - c < k - cur.len() {
                break;
            }
            cur.push(c);
            rec(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl SubspaceEnumerator {
    pub fn new(field: Fp, ambient: usize, dim: usize, budget: u64) -> Result<Self, LinalgError> {
        if dim > ambient {
            return Err(dim_err(format!("no {dim}-dimensional subspaces in dimension {ambient}")));
        }
        let required = gaussian_binomial(ambient, dim, field.p() as u64);
        match required.to_u64() {
            Some(n) if n <= budget => {}
            _ => {
                return Err(LinalgError::BudgetExceeded { required: required.to_string(), budget });
            }
        }
        let mut blocks = Vec::new();
        let mut start = 0u64;
        for piv in combinations(ambient, dim) {
            let mut free = Vec::new();
            for (r, &pc) in piv.iter().enumerate() {
                for c in pc + 1..ambient {
                    if !piv.contains(&c) {
                        free.push((r, c));
                    }
                }
            }
            let count = (field.p() as u64).pow(free.len() as u32);
            blocks.push((piv, free, start));
            start += count;
        }
        Ok(SubspaceEnumerator { field, ambient, dim, blocks, total: start })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// The subspace at position `index` of the stream.
    pub fn nth(&self, index: u64) -> Option<Subspace<Fp>> {
        if index >= self.total {
            return None;
        }
        let b = self.blocks.partition_point(|blk| blk.2 <= index) - 1;
        let (piv, free, start) = &self.blocks[b];
        let mut offset = index - start;
        let p = self.field.p() as u64;
        let mut m = Mat::zeros(self.field, self.dim, self.ambient);
        for (r, &pc) in piv.iter().enumerate() {
            m.set(r, pc, 1);
        }
        for &(r, c) in free.iter().rev() {
            m.set(r, c, (offset % p) as u32);
            offset /= p;
        }
        Some(Subspace { ambient: self.ambient, basis: m, pivots: piv.clone() })
    }

    pub fn range(&self, start: u64, end: u64) -> impl Iterator<Item = Subspace<Fp>> + '_ {
        (start..end.min(self.total)).filter_map(move |i| self.nth(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = Subspace<Fp>> + '_ {
        self.range(0, self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat<Fp> {
        Mat::from_fn(f3(), r, c, |_, _| rng.gen_range(0..3))
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(Mat::identity(f3(), 4).nullspace().is_empty());
    }

    #[test]
    fn zero_system() {
        let z = Mat::zeros(f3(), 2, 3);
        let (x, ker) = z.solve(&[0, 0]).unwrap().unwrap();
        assert_eq!(x, vec![0, 0, 0]);
        assert_eq!(ker.len(), 3);
        assert!(z.solve(&[1, 0]).unwrap().is_none());
        assert!(z.solve(&[1]).is_err());
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_mat(&mut rng, 5, 5);
            match m.inverse() {
                Some(inv) => assert_eq!(m.mul(&inv).unwrap(), Mat::identity(f3(), 5)),
                None => assert!(m.rank() < 5),
            }
        }
    }

    #[test]
    fn basis_coords() {
        let b = Mat::from_rows(f3(), &[vec![1, 1, 0], vec![0, 2, 1]]).unwrap();
        let bc = BasisCoords::new(&b).unwrap();
        let v = b.vec_mul(&[2, 1]).unwrap();
        assert_eq!(bc.coords(&v).unwrap(), vec![2, 1]);
        assert!(bc.coords(&[0, 0, 1]).is_none());
    }

    #[test]
    fn subspace_lattice_basics() {
        let s = Subspace::span(f3(), 4, &[vec![1, 2, 0, 1], vec![0, 1, 1, 1]]).unwrap();
        assert_eq!(s.intersect(&s).unwrap(), s);
        assert_eq!(s.sum(&Subspace::zero(f3(), 4)).unwrap(), s);
        assert!(s.contains(&[1, 0, 1, 2]).unwrap());
        assert!(!s.contains(&[1, 0, 1, 0]).unwrap());
        let other = Subspace::zero(f3(), 3);
        assert!(s.sum(&other).is_err());
    }

    #[test]
    fn quotient_map_kills_subspace() {
        let s = Subspace::span(f3(), 4, &[vec![1, 2, 0, 1], vec![0, 1, 1, 1]]).unwrap();
        let q = s.quotient_map();
        assert_eq!(q.cols(), 2);
        for v in s.basis_vecs() {
            assert!(q.vec_mul(&v).unwrap().iter().all(|&x| x == 0));
        }
        for (t, v) in s.complement_basis().iter().enumerate() {
            let img = q.vec_mul(v).unwrap();
            assert_eq!(img.iter().filter(|&&x| x != 0).count(), 1);
            assert_eq!(img[t], 1);
        }
    }

    #[test]
    fn enumeration_counts_match_gaussian_binomials() {
        for d in 0..=5 {
            for t in 0..=d {
                let e = SubspaceEnumerator::new(f3(), d, t, 1 << 20).unwrap();
                let all: HashSet<Subspace<Fp>> = e.iter().collect();
                let expected = gaussian_binomial(d, t, 3).to_u64().unwrap();
                assert_eq!(e.total(), expected, "d={d} t={t}");
                assert_eq!(all.len() as u64, expected, "distinct d={d} t={t}");
                assert!(all.iter().all(|s| s.dim() == t));
            }
        }
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(SubspaceEnumerator::new(f3(), 2, 1, 100).unwrap().total(), 4);
        let zero = SubspaceEnumerator::new(f3(), 4, 0, 100).unwrap();
        assert_eq!(zero.iter().collect::<Vec<_>>(), vec![Subspace::zero(f3(), 4)]);
        assert_eq!(SubspaceEnumerator::new(f3(), 5, 3, 10_000).unwrap().total(), 1210);
        match SubspaceEnumerator::new(f3(), 5, 3, 1000) {
            Err(LinalgError::BudgetExceeded { required, .. }) => assert_eq!(required, "1210"),
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_ranges_partition_the_stream() {
        let e = SubspaceEnumerator::new(f3(), 4, 2, 1000).unwrap();
        let whole: Vec<_> = e.iter().collect();
        let mut parts: Vec<_> = e.range(0, 50).collect();
        parts.extend(e.range(50, 1000));
        assert_eq!(whole, parts);
    }

    #[test]
    fn gaussian_binomial_values() {
        assert_eq!(gaussian_binomial(4, 4, 3), BigUint::one());
        assert_eq!(gaussian_binomial(2, 1, 3), BigUint::from(4u32));
        assert_eq!(gaussian_binomial(5, 2, 3), BigUint::from(1210u32));
        for d in 0..12 {
            for s in 0..=d {
                assert_eq!(gaussian_binomial(d, s, 5), gaussian_binomial(d, d - s, 5));
            }
        }
        // exceeds 64 bits well before d = 40 at p = 3
        assert!(gaussian_binomial(40, 20, 3).to_u64().is_none());
    }

    proptest! {
        #[test]
        fn rank_nullity(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_mat(&mut rng, 6, 6);
            prop_assert_eq!(m.rank() + m.nullspace().len(), 6);
            for v in m.nullspace() {
                let col = Mat::from_rows(f3(), &v.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
                prop_assert!(m.mul(&col).unwrap().is_zero());
            }
        }

        #[test]
        fn dimension_formula(seed in 0u64..1000, a in 0usize..5, b in 0usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Subspace::row_space(&random_mat(&mut rng, a, 6));
            let t = Subspace::row_space(&random_mat(&mut rng, b, 6));
            let sum = s.sum(&t).unwrap();
            let int = s.intersect(&t).unwrap();
            prop_assert_eq!(sum.dim() + int.dim(), s.dim() + t.dim());
            prop_assert!(int.is_subspace_of(&s).unwrap() && int.is_subspace_of(&t).unwrap());
        }

        #[test]
        fn echelon_form_is_canonical(seed in 0u64..1000, t in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = Subspace::row_space(&random_mat(&mut rng, t, 5));
            // a random invertible recombination of the basis spans the same set
            let k = s.dim();
            let g = loop {
                let g = random_mat(&mut rng, k, k);
                if g.is_invertible() { break g; }
            };
            let other = Subspace::row_space(&g.mul(s.basis()).unwrap());
            prop_assert_eq!(&other, &s);
            // membership agrees on every coordinate combination
            let total = 3u64.pow(k as u32);
            for mut n in 0..total {
                let coeffs: Vec<u32> = (0..k).map(|_| { let c = (n % 3) as u32; n /= 3; c }).collect();
                let v = other.basis().vec_mul(&coeffs).unwrap();
                prop_assert!(s.contains(&v).unwrap());
            }
        }
    }
}
