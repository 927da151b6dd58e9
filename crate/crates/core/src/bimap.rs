//! Bimaps `b: U x V -> W` over `Z/p` stored as structure tensors.
//!
//! `tensor[(i * dim_v + j) * dim_w + k]` is the `k`-th coordinate of
//! `b(u_i, v_j)`. Forms over an extension field `K` enter through
//! [`flatten_k_form`], which restricts scalars using the polynomial basis
//! of the field context: coordinate `i` of `K^n` becomes the `d` prime
//! coordinates `i*d .. i*d + d`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ff::{Field, FieldCtx, Fp};
use crate::linalg::{LinalgError, Mat, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BimapError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not alternating: b(e_{i}, e_{j}) violates b(u,u) = 0")]
    NotAlternating { i: usize, j: usize },
    #[error("form is degenerate; {witness:?} lies in the radical")]
    Degenerate { witness: Vec<String> },
    #[error("projection is not surjective")]
    NotSurjective,
    #[error("projection onto the zero space")]
    ZeroCodomain,
    #[error("coefficient {0} is not reduced modulo p")]
    Unreduced(u32),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BimapKind {
    General,
    Alternating,
    Hermitian,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bimap {
    field: Fp,
    dim_u: usize,
    dim_v: usize,
    dim_w: usize,
    tensor: Vec<u32>,
    kind: BimapKind,
}

impl Bimap {
    pub fn new(
        field: Fp,
        dim_u: usize,
        dim_v: usize,
        dim_w: usize,
        tensor: Vec<u32>,
        kind: BimapKind,
    ) -> Result<Self, BimapError> {
        if tensor.len() != dim_u * dim_v * dim_w {
            return Err(BimapError::Dimension(format!(
                "tensor has {} entries, expected {}",
                tensor.len(),
                dim_u * dim_v * dim_w
            )));
        }
        if let Some(&c) = tensor.iter().find(|&&c| c >= field.p()) {
            return Err(BimapError::Unreduced(c));
        }
        let b = Bimap { field, dim_u, dim_v, dim_w, tensor, kind };
        if kind != BimapKind::General {
            if dim_u != dim_v {
                return Err(BimapError::Dimension("alternating bimaps need U = V".into()));
            }
            if let Some((i, j)) = b.alternating_violation() {
                return Err(BimapError::NotAlternating { i, j });
            }
        }
        Ok(b)
    }

    /// Build from a nested `[i][j][k]` array.
    pub fn from_nested(
        field: Fp,
        dim_w: usize,
        nested: &[Vec<Vec<u32>>],
        kind: BimapKind,
    ) -> Result<Self, BimapError> {
        let dim_u = nested.len();
        let dim_v = nested.first().map_or(0, |r| r.len());
        let mut tensor = Vec::with_capacity(dim_u * dim_v * dim_w);
        for row in nested {
            if row.len() != dim_v {
                return Err(BimapError::Dimension("ragged tensor".into()));
            }
            for w in row {
                if w.len() != dim_w {
                    return Err(BimapError::Dimension("tensor entry length differs from dimW".into()));
                }
                tensor.extend_from_slice(w);
            }
        }
        Bimap::new(field, dim_u, dim_v, dim_w, tensor, kind)
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<u32>>> {
        (0..self.dim_u)
            .map(|i| (0..self.dim_v).map(|j| self.get(i, j).to_vec()).collect())
            .collect()
    }

    pub fn zero(field: Fp, dim_v: usize, dim_w: usize) -> Self {
        Bimap {
            field,
            dim_u: dim_v,
            dim_v,
            dim_w,
            tensor: vec![0; dim_v * dim_v * dim_w],
            kind: BimapKind::Alternating,
        }
    }

    /// Build an alternating bimap from its values on pairs `i < j`.
    pub fn alternating_from_fn(
        field: Fp,
        dim_v: usize,
        dim_w: usize,
        mut f: impl FnMut(usize, usize) -> Vec<u32>,
    ) -> Self {
        let mut tensor = vec![0; dim_v * dim_v * dim_w];
        for i in 0..dim_v {
            for j in i + 1..dim_v {
                let w = f(i, j);
                assert_eq!(w.len(), dim_w, "value length");
                for k in 0..dim_w {
                    let c = w[k] % field.p();
                    tensor[(i * dim_v + j) * dim_w + k] = c;
                    tensor[(j * dim_v + i) * dim_w + k] = field.neg(&c);
                }
            }
        }
        Bimap { field, dim_u: dim_v, dim_v, dim_w, tensor, kind: BimapKind::Alternating }
    }

    fn alternating_violation(&self) -> Option<(usize, usize)> {
        let f = self.field;
        for i in 0..self.dim_v {
            if self.get(i, i).iter().any(|&c| c != 0) {
                return Some((i, i));
            }
            for j in i + 1..self.dim_v {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if a.iter().zip(b).any(|(x, y)| f.add(x, y) != 0) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn field(&self) -> Fp {
        self.field
    }
    pub fn p(&self) -> u32 {
        self.field.p()
    }
    pub fn dim_u(&self) -> usize {
        self.dim_u
    }
    pub fn dim_v(&self) -> usize {
        self.dim_v
    }
    pub fn dim_w(&self) -> usize {
        self.dim_w
    }
    pub fn kind(&self) -> BimapKind {
        self.kind
    }
    pub fn tensor(&self) -> &[u32] {
        &self.tensor
    }

    pub fn is_alternating(&self) -> bool {
        self.dim_u == self.dim_v && self.alternating_violation().is_none()
    }

    /// `b(u_i, v_j)` as a W-coordinate slice.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &[u32] {
        let start = (i * self.dim_v + j) * self.dim_w;
        &self.tensor[start..start + self.dim_w]
    }

    pub fn evaluate(&self, u: &[u32], v: &[u32]) -> Result<Vec<u32>, BimapError> {
        if u.len() != self.dim_u || v.len() != self.dim_v {
            return Err(BimapError::Dimension(format!(
                "arguments of length {}, {} for a {}x{} bimap",
                u.len(),
                v.len(),
                self.dim_u,
                self.dim_v
            )));
        }
        Ok(self.eval_unchecked(u, v))
    }

    pub(crate) fn eval_unchecked(&self, u: &[u32], v: &[u32]) -> Vec<u32> {
        let p = self.p() as u64;
        let mut acc = vec![0u64; self.dim_w];
        for (i, &a) in u.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in v.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let ab = (a as u64 * b as u64) % p;
                for (k, &c) in self.get(i, j).iter().enumerate() {
                    acc[k] += ab * c as u64;
                }
            }
            for x in acc.iter_mut() {
                *x %= p;
            }
        }
        acc.into_iter().map(|x| (x % p) as u32).collect()
    }

    /// The matrix of `v -> (b(u_i, v))_i`, shape `dim_v x (dim_u * dim_w)`.
    fn right_flattening(&self) -> Mat<Fp> {
        Mat::from_fn(self.field, self.dim_v, self.dim_u * self.dim_w, |j, col| {
            let (i, k) = (col / self.dim_w, col % self.dim_w);
            self.get(i, j)[k]
        })
    }

    fn left_flattening(&self) -> Mat<Fp> {
        Mat::from_fn(self.field, self.dim_u, self.dim_v * self.dim_w, |i, col| {
            let (j, k) = (col / self.dim_w, col % self.dim_w);
            self.get(i, j)[k]
        })
    }

    /// `{v : b(U, v) = 0}`.
    pub fn radical(&self) -> Subspace<Fp> {
        let vecs = self.right_flattening().left_kernel();
        Subspace::span(self.field, self.dim_v, &vecs).expect("kernel vectors have ambient length")
    }

    /// `{u : b(u, V) = 0}`.
    pub fn left_radical(&self) -> Subspace<Fp> {
        let vecs = self.left_flattening().left_kernel();
        Subspace::span(self.field, self.dim_u, &vecs).expect("kernel vectors have ambient length")
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.radical().dim() == 0 && self.left_radical().dim() == 0
    }

    /// The span of all values `b(u, v)`.
    pub fn image(&self) -> Subspace<Fp> {
        let m = Mat::from_data(self.field, self.dim_u * self.dim_v, self.dim_w, self.tensor.clone())
            .expect("tensor shape");
        Subspace::row_space(&m)
    }

    pub fn is_zero(&self) -> bool {
        self.tensor.iter().all(|&c| c == 0)
    }

    /// `b composed with pi`, where `pi` is a surjective `dim_w x dim_w'` matrix.
    pub fn quotient(&self, pi: &Mat<Fp>) -> Result<Bimap, BimapError> {
        if pi.rows() != self.dim_w {
            return Err(BimapError::Dimension("projection domain differs from W".into()));
        }
        if pi.cols() == 0 {
            return Err(BimapError::ZeroCodomain);
        }
        if pi.rank() != pi.cols() {
            return Err(BimapError::NotSurjective);
        }
        Ok(self.compose_unchecked(pi))
    }

    /// `b composed with any linear map on W`, without surjectivity checks.
    pub fn compose_unchecked(&self, pi: &Mat<Fp>) -> Bimap {
        let w2 = pi.cols();
        let mut tensor = Vec::with_capacity(self.dim_u * self.dim_v * w2);
        for i in 0..self.dim_u {
            for j in 0..self.dim_v {
                tensor.extend(pi.vec_mul(self.get(i, j)).expect("shape"));
            }
        }
        Bimap { tensor, dim_w: w2, ..self.clone() }
    }

    /// `(u, v) -> b(u x, v y)`.
    pub fn pullback(&self, x: &Mat<Fp>, y: &Mat<Fp>) -> Result<Bimap, BimapError> {
        if x.cols() != self.dim_u || y.cols() != self.dim_v {
            return Err(BimapError::Dimension("pullback maps do not land in U, V".into()));
        }
        let xs = x.row_vecs();
        let ys = y.row_vecs();
        let mut tensor = Vec::with_capacity(x.rows() * y.rows() * self.dim_w);
        for u in &xs {
            for v in &ys {
                tensor.extend(self.eval_unchecked(u, v));
            }
        }
        let kind = if self.kind != BimapKind::General && x == y {
            self.kind
        } else {
            BimapKind::General
        };
        Ok(Bimap { field: self.field, dim_u: x.rows(), dim_v: y.rows(), dim_w: self.dim_w, tensor, kind })
    }

    /// The bimap `b'` with `b'(u f, v f) = b(u, v) fhat`, i.e. the transport
    /// of `b` along an invertible pair.
    pub fn transport(&self, f: &Mat<Fp>, fhat: &Mat<Fp>) -> Result<Bimap, BimapError> {
        let finv = f
            .inverse()
            .ok_or_else(|| BimapError::Dimension("transport needs invertible f".into()))?;
        Ok(self.pullback(&finv, &finv)?.compose_unchecked(fhat))
    }

    /// Orthogonal sum on `V1 + V2` with a shared codomain.
    pub fn perp_sum(&self, other: &Bimap) -> Result<Bimap, BimapError> {
        if self.dim_w != other.dim_w || self.dim_u != self.dim_v || other.dim_u != other.dim_v {
            return Err(BimapError::Dimension("perp sum needs square bimaps into one W".into()));
        }
        let n1 = self.dim_v;
        let n = n1 + other.dim_v;
        let w = self.dim_w;
        let mut tensor = vec![0; n * n * w];
        for i in 0..n {
            for j in 0..n {
                let val = if i < n1 && j < n1 {
                    self.get(i, j)
                } else if i >= n1 && j >= n1 {
                    other.get(i - n1, j - n1)
                } else {
                    continue;
                };
                tensor[(i * n + j) * w..(i * n + j + 1) * w].copy_from_slice(val);
            }
        }
        let kind = if self.kind == other.kind { self.kind } else { BimapKind::General };
        Ok(Bimap { field: self.field, dim_u: n, dim_v: n, dim_w: w, tensor, kind })
    }

    /// Orthogonal sum with codomain `W1 + W2`.
    pub fn direct_sum(&self, other: &Bimap) -> Result<Bimap, BimapError> {
        let w1 = self.dim_w;
        let w2 = other.dim_w;
        let mut left = Mat::zeros(self.field, w1, w1 + w2);
        for k in 0..w1 {
            left.set(k, k, 1);
        }
        let mut right = Mat::zeros(self.field, w2, w1 + w2);
        for k in 0..w2 {
            right.set(k, w1 + k, 1);
        }
        self.compose_unchecked(&left).perp_sum(&other.compose_unchecked(&right))
    }
}

/// The standard symplectic Gram matrix `[[0, I], [-I, 0]]` over any field.
pub fn standard_symplectic_gram<F: Field>(field: F, m: usize) -> Mat<F> {
    let one = field.one();
    let minus = field.neg(&one);
    Mat::from_fn(field.clone(), 2 * m, 2 * m, |i, j| {
        if i < m && j == i + m {
            one.clone()
        } else if i >= m && j + m == i {
            minus.clone()
        } else {
            field.zero()
        }
    })
}

/// Restriction of scalars of a `K`-valued bilinear form with Gram matrix
/// `gram` (`n x n` over `K`) to a `Z/p`-bimap `Z/p^{nd} x Z/p^{nd} -> Z/p^d`.
pub fn flatten_k_form(ctx: &FieldCtx, gram: &Mat<FieldCtx>, kind: BimapKind) -> Result<Bimap, BimapError> {
    let n = gram.rows();
    if !gram.is_square() {
        return Err(BimapError::Dimension("Gram matrix must be square".into()));
    }
    let d = ctx.d();
    let x = ctx.generator();
    let mut powers = vec![ctx.one()];
    for a in 1..2 * d {
        powers.push(ctx.mul(&powers[a - 1], &x.coeffs().to_vec()));
    }
    let nd = n * d;
    let mut tensor = vec![0u32; nd * nd * d];
    for i in 0..n {
        for j in 0..n {
            let g = gram.get(i, j);
            if ctx.is_zero(g) {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    let val = ctx.mul(&powers[a + b], g);
                    let start = ((i * d + a) * nd + (j * d + b)) * d;
                    tensor[start..start + d].copy_from_slice(&val);
                }
            }
        }
    }
    Bimap::new(ctx.prime_field(), nd, nd, d, tensor, kind)
}

/// `standard_symplectic(m, K)` flattened to `Z/p`.
pub fn standard_symplectic(m: usize, ctx: &FieldCtx) -> Bimap {
    flatten_k_form(ctx, &standard_symplectic_gram(ctx.clone(), m), BimapKind::Alternating)
        .expect("the standard form is alternating")
}

/// Matrix of `K^n -> (Z/p)^{nd}` restriction of scalars for a `K`-linear map
/// given by a `K`-matrix: the `Z/p`-matrix of `v -> v * a`.
pub fn flatten_k_matrix(ctx: &FieldCtx, a: &Mat<FieldCtx>) -> Mat<Fp> {
    let d = ctx.d();
    let mut out = Mat::zeros(ctx.prime_field(), a.rows() * d, a.cols() * d);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let block = ctx.mul_matrix(a.get(i, j));
            for r in 0..d {
                for c in 0..d {
                    out.set(i * d + r, j * d + c, *block.get(r, c));
                }
            }
        }
    }
    out
}

fn form_eval<F: Field>(gram: &Mat<F>, x: &[F::Elem], y: &[F::Elem]) -> F::Elem {
    let f = gram.field();
    let gy = gram.transpose().vec_mul(y).expect("shape");
    x.iter().zip(&gy).fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
}

/// Symplectic Gram-Schmidt for a nondegenerate alternating form with Gram
/// matrix `gram`. Returns `T` whose rows are `e_1..e_m, f_1..f_m`, so that
/// `T * gram * T^t` is the standard symplectic Gram matrix.
pub fn hyperbolic_basis<F: Field>(gram: &Mat<F>) -> Result<Mat<F>, BimapError> {
    let f = gram.field().clone();
    let n = gram.rows();
    if !gram.is_square() {
        return Err(BimapError::Dimension("Gram matrix must be square".into()));
    }
    for i in 0..n {
        if !f.is_zero(gram.get(i, i)) {
            return Err(BimapError::NotAlternating { i, j: i });
        }
        for j in i + 1..n {
            if f.add(gram.get(i, j), gram.get(j, i)) != f.zero() {
                return Err(BimapError::NotAlternating { i, j });
            }
        }
    }
    let mut pool: Vec<Vec<F::Elem>> = Mat::identity(f.clone(), n).row_vecs();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    while let Some(pos) = pool.iter().position(|v| v.iter().any(|x| !f.is_zero(x))) {
        let u = pool.remove(pos);
        let Some(wpos) = pool.iter().position(|w| !f.is_zero(&form_eval(gram, &u, w))) else {
            return Err(BimapError::Degenerate { witness: u.iter().map(|x| format!("{x:?}")).collect() });
        };
        let w = pool.remove(wpos);
        let scale = f.inv(&form_eval(gram, &u, &w)).expect("nonzero pairing");
        let fv: Vec<F::Elem> = w.iter().map(|x| f.mul(x, &scale)).collect();
        for x in pool.iter_mut() {
            let a = form_eval(gram, x, &fv);
            let b = form_eval(gram, x, &u);
            for k in 0..n {
                let t = f.add(&f.sub(&x[k], &f.mul(&a, &u[k])), &f.mul(&b, &fv[k]));
                x[k] = t;
            }
        }
        es.push(u);
        fs.push(fv);
    }
    es.extend(fs);
    Ok(Mat::from_rows_with_cols(f, n, &es)?)
}

/// Checks `b1(e_i, e_j) fhat = b2(e_i f, e_j f)` on all basis pairs.
pub fn is_pseudo_isometry(b1: &Bimap, b2: &Bimap, f: &Mat<Fp>, fhat: &Mat<Fp>) -> bool {
    pseudo_isometry_violation(b1, b2, f, fhat).is_none()
}

/// The first basis pair on which the pseudo-isometry relation fails, or a
/// shape mismatch reported as `(usize::MAX, usize::MAX)`.
pub fn pseudo_isometry_violation(
    b1: &Bimap,
    b2: &Bimap,
    f: &Mat<Fp>,
    fhat: &Mat<Fp>,
) -> Option<(usize, usize)> {
    if b1.dim_u() != b1.dim_v()
        || b2.dim_u() != b2.dim_v()
        || f.rows() != b1.dim_v()
        || f.cols() != b2.dim_v()
        || fhat.rows() != b1.dim_w()
        || fhat.cols() != b2.dim_w()
    {
        return Some((usize::MAX, usize::MAX));
    }
    let rows = f.row_vecs();
    for i in 0..b1.dim_v() {
        for j in 0..b1.dim_v() {
            let lhs = fhat.vec_mul(b1.get(i, j)).expect("shape");
            let rhs = b2.eval_unchecked(&rows[i], &rows[j]);
            if lhs != rhs {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    fn random_invertible(rng: &mut ChaCha8Rng, field: Fp, n: usize) -> Mat<Fp> {
        loop {
            let m = Mat::from_fn(field, n, n, |_, _| rng.gen_range(0..field.p()));
            if m.is_invertible() {
                return m;
            }
        }
    }

    #[test]
    fn canonical_form_values() {
        let k = FieldCtx::new(3, 1).unwrap();
        let j = standard_symplectic(1, &k);
        assert_eq!(j.evaluate(&[1, 0], &[0, 1]).unwrap(), vec![1]);
        assert_eq!(j.evaluate(&[0, 1], &[1, 0]).unwrap(), vec![2]);
        assert_eq!(j.get(0, 0), &[0]);
        assert_eq!(j.get(1, 1), &[0]);
        assert_eq!(j.kind(), BimapKind::Alternating);
        assert_eq!(j.radical().dim(), 0);
        assert_eq!(j.evaluate(&[0, 0], &[2, 1]).unwrap(), vec![0]);
        assert!(j.evaluate(&[0], &[2, 1]).is_err());
    }

    #[test]
    fn alternating_tensor_is_antisymmetric() {
        let k = FieldCtx::new(3, 3).unwrap();
        let j = standard_symplectic(2, &k);
        assert!(j.is_alternating());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u: Vec<u32> = (0..12).map(|_| rng.gen_range(0..3)).collect();
            assert!(j.evaluate(&u, &u).unwrap().iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn non_alternating_rejected() {
        let e = Bimap::new(f3(), 2, 2, 1, vec![0, 1, 1, 0], BimapKind::Alternating);
        assert_eq!(e, Err(BimapError::NotAlternating { i: 0, j: 1 }));
    }

    #[test]
    fn radicals() {
        assert_eq!(Bimap::zero(f3(), 3, 2).radical().dim(), 3);
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        for col in 0..2 {
            let mut pi = Mat::zeros(f3(), 2, 1);
            pi.set(col, 0, 1);
            let q = j.quotient(&pi).unwrap();
            assert_eq!(q.dim_v(), 4);
            assert_eq!(q.radical().dim(), 0, "coefficient projection {col}");
        }
    }

    #[test]
    fn quotient_checks() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        assert_eq!(j.quotient(&Mat::identity(f3(), 2)).unwrap(), j);
        assert_eq!(j.quotient(&Mat::zeros(f3(), 2, 0)), Err(BimapError::ZeroCodomain));
        assert_eq!(j.quotient(&Mat::zeros(f3(), 2, 1)), Err(BimapError::NotSurjective));
    }

    #[test]
    fn quotient_composes() {
        let k = FieldCtx::new(3, 3).unwrap();
        let j = standard_symplectic(1, &k);
        let p1 = Mat::from_rows(f3(), &[vec![1, 0], vec![2, 1], vec![0, 1]]).unwrap();
        let p2 = Mat::from_rows(f3(), &[vec![1], vec![1]]).unwrap();
        let both = j.quotient(&p1.mul(&p2).unwrap()).unwrap();
        assert_eq!(both, j.quotient(&p1).unwrap().quotient(&p2).unwrap());
    }

    #[test]
    fn hyperbolic_basis_of_standard_form_is_identity() {
        for m in 1..4 {
            let g = standard_symplectic_gram(f3(), m);
            assert_eq!(hyperbolic_basis(&g).unwrap(), Mat::identity(f3(), 2 * m));
        }
    }

    #[test]
    fn hyperbolic_basis_rejects_degenerate() {
        let g = Mat::from_rows(f3(), &[vec![0, 1, 0], vec![2, 0, 0], vec![0, 0, 0]]).unwrap();
        match hyperbolic_basis(&g) {
            Err(BimapError::Degenerate { witness }) => assert_eq!(witness, vec!["0", "0", "1"]),
            other => panic!("expected degenerate, got {other:?}"),
        }
        let sym = Mat::from_rows(f3(), &[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(matches!(hyperbolic_basis(&sym), Err(BimapError::NotAlternating { .. })));
    }

    #[test]
    fn hyperbolic_basis_over_extension_field() {
        let k = FieldCtx::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let j = standard_symplectic_gram(k.clone(), 2);
        let g = loop {
            let g = Mat::from_fn(k.clone(), 4, 4, |_, _| vec![rng.gen_range(0..3), rng.gen_range(0..3)]);
            if g.is_invertible() {
                break g;
            }
        };
        let conj = g.mul(&j).unwrap().mul(&g.transpose()).unwrap();
        let t = hyperbolic_basis(&conj).unwrap();
        assert_eq!(t.mul(&conj).unwrap().mul(&t.transpose()).unwrap(), j);
    }

    #[test]
    fn pseudo_isometry_checks() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        let id4 = Mat::identity(f3(), 4);
        let id2 = Mat::identity(f3(), 2);
        assert!(is_pseudo_isometry(&j, &j, &id4, &id2));
        assert!(!is_pseudo_isometry(&j, &j, &id4, &id2.scale(&2)));
        let other = Bimap::zero(f3(), 4, 1);
        assert!(!is_pseudo_isometry(&j, &other, &id4, &id2));
    }

    #[test]
    fn k_matrix_flattening_respects_products() {
        let k = FieldCtx::new(3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Mat::from_fn(k.clone(), 2, 3, |_, _| vec![rng.gen_range(0..3), rng.gen_range(0..3)]);
        let b = Mat::from_fn(k.clone(), 3, 2, |_, _| vec![rng.gen_range(0..3), rng.gen_range(0..3)]);
        let lhs = flatten_k_matrix(&k, &a.mul(&b).unwrap());
        let rhs = flatten_k_matrix(&k, &a).mul(&flatten_k_matrix(&k, &b)).unwrap();
        assert_eq!(lhs, rhs);
    }

    proptest! {
        #[test]
        fn conjugated_form_recovers_standard(seed in 0u64..500, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let j = standard_symplectic_gram(f3(), m);
            let g = random_invertible(&mut rng, f3(), 2 * m);
            let conj = g.mul(&j).unwrap().mul(&g.transpose()).unwrap();
            let t = hyperbolic_basis(&conj).unwrap();
            prop_assert_eq!(t.mul(&conj).unwrap().mul(&t.transpose()).unwrap(), j.clone());
            // applying the hyperbolic basis again lands on the same form
            let again = t.mul(&conj).unwrap().mul(&t.transpose()).unwrap();
            let t2 = hyperbolic_basis(&again).unwrap();
            prop_assert_eq!(t2.mul(&again).unwrap().mul(&t2.transpose()).unwrap(), j);
        }

        #[test]
        fn radical_transports_with_pseudo_isometries(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = FieldCtx::new(3, 1).unwrap();
            let degenerate = standard_symplectic(1, &k).perp_sum(&Bimap::zero(f3(), 2, 1)).unwrap();
            let f = random_invertible(&mut rng, f3(), 4);
            let fhat = random_invertible(&mut rng, f3(), 1);
            let moved = degenerate.transport(&f, &fhat).unwrap();
            prop_assert!(is_pseudo_isometry(&degenerate, &moved, &f, &fhat));
            let image = degenerate.radical().image_under(&f).unwrap();
            prop_assert_eq!(image, moved.radical());
        }
    }
}
