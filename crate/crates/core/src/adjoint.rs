//! The adjoint ring `Adj(b)` with its involution, the center field, the
//! tensor product `V (x)_A V`, and the `K`-structure that recognition and
//! orthogonal decomposition are built on.

use thiserror::Error;

use crate::bimap::{flatten_k_matrix, hyperbolic_basis, Bimap, BimapError, BimapKind};
use crate::centroid::{CentroidError, FieldIso, FieldTest, MatrixAlgebra};
use crate::ff::{Field, FieldCtx, Fp};
use crate::linalg::{BasisCoords, Mat, RowReducer, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdjointError {
    #[error("bimap is degenerate")]
    Degenerate,
    #[error("bimap must have U = V")]
    NotSquare,
    #[error("adjoint basis fails closure: {0}")]
    NotClosed(&'static str),
    #[error("center is not a field")]
    CenterNotField,
    #[error("algebra is not simple: {0}")]
    NotSimple(String),
    #[error("involution is {0:?}, expected symplectic")]
    WrongInvolution(InvolutionType),
    #[error("tensor square has dimension {got} over Z/p, expected {expected}")]
    TensorDimension { expected: usize, got: usize },
    #[error("tensor form is not a nondegenerate alternating form: {0}")]
    TensorForm(String),
    #[error(transparent)]
    Centroid(#[from] CentroidError),
    #[error(transparent)]
    Bimap(#[from] BimapError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvolutionType {
    Orthogonal,
    Unitary,
    /// Center `k x k` swapped by the involution. Only possible when the
    /// center is not a field, which the simple algebras handled here
    /// exclude; kept for completeness of the classification.
    Exchange,
    Symplectic,
    /// The symmetric dimension matches no type (the algebra is not a full
    /// matrix algebra over its center).
    Unclassified,
}

/// A unital `*`-subalgebra of `End(V) x End(V)^op`: pairs `(f, g)` with
/// product `(f1, g1)(f2, g2) = (f1 f2, g2 g1)` and involution
/// `(f, g) -> (g, f)`.
#[derive(Clone, Debug)]
pub struct StarAlgebra {
    field: Fp,
    n: usize,
    fs: Vec<Mat<Fp>>,
    gs: Vec<Mat<Fp>>,
    coords: BasisCoords<Fp>,
}

impl StarAlgebra {
    /// Wrap a basis of pairs. Closure is not checked here.
    pub fn from_pairs(field: Fp, n: usize, pairs: Vec<(Mat<Fp>, Mat<Fp>)>) -> Result<Self, AdjointError> {
        let rows: Vec<Vec<u32>> = pairs
            .iter()
            .map(|(f, g)| f.data().iter().chain(g.data()).copied().collect())
            .collect();
        let flat = Mat::from_rows_with_cols(field, 2 * n * n, &rows).expect("n x n pairs");
        let coords = BasisCoords::new(&flat).map_err(|_| AdjointError::NotClosed("dependent basis"))?;
        let (fs, gs) = pairs.into_iter().unzip();
        Ok(StarAlgebra { field, n, fs, gs, coords })
    }

    pub fn dim(&self) -> usize {
        self.fs.len()
    }

    /// Dimension of the module `V`.
    pub fn module_dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn pair(&self, t: usize) -> (&Mat<Fp>, &Mat<Fp>) {
        (&self.fs[t], &self.gs[t])
    }

    pub fn coords(&self, f: &Mat<Fp>, g: &Mat<Fp>) -> Option<Vec<u32>> {
        let v: Vec<u32> = f.data().iter().chain(g.data()).copied().collect();
        self.coords.coords(&v)
    }

    pub fn contains(&self, f: &Mat<Fp>, g: &Mat<Fp>) -> bool {
        self.coords(f, g).is_some()
    }

    pub fn combination(&self, x: &[u32]) -> (Mat<Fp>, Mat<Fp>) {
        let mut f = Mat::zeros(self.field, self.n, self.n);
        let mut g = Mat::zeros(self.field, self.n, self.n);
        for (t, c) in x.iter().enumerate() {
            if *c != 0 {
                f = f.add(&self.fs[t].scale(c)).expect("shape");
                g = g.add(&self.gs[t].scale(c)).expect("shape");
            }
        }
        (f, g)
    }

    pub fn contains_identity(&self) -> bool {
        let id = Mat::identity(self.field, self.n);
        self.contains(&id, &id)
    }

    pub fn is_closed_under_products(&self) -> bool {
        (0..self.dim()).all(|s| {
            (0..self.dim()).all(|t| {
                let f = self.fs[s].mul(&self.fs[t]).expect("shape");
                let g = self.gs[t].mul(&self.gs[s]).expect("shape");
                self.contains(&f, &g)
            })
        })
    }

    pub fn is_closed_under_involution(&self) -> bool {
        (0..self.dim()).all(|t| self.contains(&self.gs[t], &self.fs[t]))
    }

    /// The involution as a matrix on coordinate row vectors.
    pub fn involution_matrix(&self) -> Option<Mat<Fp>> {
        let rows: Option<Vec<Vec<u32>>> = (0..self.dim()).map(|t| self.coords(&self.gs[t], &self.fs[t])).collect();
        Some(Mat::from_rows_with_cols(self.field, self.dim(), &rows?).expect("shape"))
    }

    /// `dim_{Z/p} {a : a* = a}`.
    pub fn symmetric_dim(&self) -> usize {
        let inv = self.involution_matrix().expect("closed under the involution");
        let diff = inv.sub(&Mat::identity(self.field, self.dim())).expect("square");
        diff.left_kernel().len()
    }

    /// `span{v a : a in A}`, using the `f` components.
    pub fn orbit_span(&self, v: &[u32]) -> Subspace<Fp> {
        let imgs: Vec<Vec<u32>> = self.fs.iter().map(|f| f.vec_mul(v).expect("shape")).collect();
        Subspace::span(self.field, self.n, &imgs).expect("shape")
    }

    /// Checks that each standard basis vector generates `V`. Returns the
    /// first proper invariant subspace found.
    pub fn irreducibility_witness(&self) -> Option<Subspace<Fp>> {
        for i in 0..self.n {
            let mut v = vec![0; self.n];
            v[i] = 1;
            let span = self.orbit_span(&v);
            if span.dim() < self.n {
                return Some(span);
            }
        }
        None
    }

    /// Basis of the center, as coordinate vectors. The projection to `f`
    /// is faithful for adjoint algebras of nondegenerate forms, so
    /// commutation is tested on the `f` components.
    pub fn center_coords(&self) -> Vec<Vec<u32>> {
        let k = self.dim();
        let mut red = RowReducer::new(self.field, k);
        let n2 = self.n * self.n;
        for s in 0..k {
            // column t of this block: [F_t, F_s] flattened
            let comms: Vec<Mat<Fp>> = (0..k)
                .map(|t| {
                    let a = self.fs[t].mul(&self.fs[s]).expect("shape");
                    a.sub(&self.fs[s].mul(&self.fs[t]).expect("shape")).expect("shape")
                })
                .collect();
            for e in 0..n2 {
                let row: Vec<u32> = comms.iter().map(|c| c.data()[e]).collect();
                red.push(&row);
            }
        }
        red.nullspace()
    }

    /// The center as a commutative matrix algebra on the `f` side, with the
    /// matching `g` components.
    pub fn center(&self) -> Center {
        let coords = self.center_coords();
        let pairs: Vec<(Mat<Fp>, Mat<Fp>)> = coords.iter().map(|x| self.combination(x)).collect();
        let fs: Vec<Mat<Fp>> = pairs.iter().map(|p| p.0.clone()).collect();
        Center {
            algebra: MatrixAlgebra::new(self.field, fs).expect("independent center basis"),
            pairs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Center {
    pub algebra: MatrixAlgebra,
    pub pairs: Vec<(Mat<Fp>, Mat<Fp>)>,
}

impl Center {
    /// Whether the involution fixes every central element.
    pub fn fixed_by_involution(&self) -> bool {
        self.pairs.iter().all(|(f, g)| f == g)
    }
}

/// `Adj(b) = {(f, g) : b(uf, v) = b(u, vg)}`.
pub fn compute_adjoint(b: &Bimap) -> Result<StarAlgebra, AdjointError> {
    if b.dim_u() != b.dim_v() {
        return Err(AdjointError::NotSquare);
    }
    if !b.is_nondegenerate() {
        return Err(AdjointError::Degenerate);
    }
    let f = b.field();
    let (n, w) = (b.dim_v(), b.dim_w());
    let unknowns = 2 * n * n;
    let mut red = RowReducer::new(f, unknowns);
    for i in 0..n {
        for j in 0..n {
            for k in 0..w {
                let mut row = vec![0u32; unknowns];
                for a in 0..n {
                    row[i * n + a] = f.add(&row[i * n + a], &b.get(a, j)[k]);
                    let idx = n * n + j * n + a;
                    row[idx] = f.sub(&row[idx], &b.get(i, a)[k]);
                }
                red.push(&row);
            }
        }
    }
    let pairs: Vec<(Mat<Fp>, Mat<Fp>)> = red
        .nullspace()
        .into_iter()
        .map(|x| {
            (
                Mat::from_data(f, n, n, x[..n * n].to_vec()).expect("shape"),
                Mat::from_data(f, n, n, x[n * n..].to_vec()).expect("shape"),
            )
        })
        .collect();
    let a = StarAlgebra::from_pairs(f, n, pairs)?;
    if !a.contains_identity() {
        return Err(AdjointError::NotClosed("identity missing"));
    }
    if !a.is_closed_under_involution() {
        return Err(AdjointError::NotClosed("involution"));
    }
    if !a.is_closed_under_products() {
        return Err(AdjointError::NotClosed("products"));
    }
    Ok(a)
}

/// Outcome of the simplicity test.
#[derive(Clone, Debug)]
pub struct Simplicity {
    /// Center field, `k = GF(p^e)`.
    pub center: FieldIso,
    /// Center elements, as pairs, in the same order as the center algebra.
    pub center_pairs: Vec<(Mat<Fp>, Mat<Fp>)>,
    /// `dim_k V`.
    pub module_rank: usize,
}

/// `A` acts irreducibly and is simple. Irreducibility is probed from each
/// basis vector; simplicity is certified by the center being a field `k`
/// with `dim A = e (dim_k V)^2`, which forces `A = End_k(V)`.
pub fn is_simple_irreducible(a: &StarAlgebra, seed: u64) -> Result<Simplicity, AdjointError> {
    if let Some(w) = a.irreducibility_witness() {
        return Err(AdjointError::NotSimple(format!(
            "invariant subspace of dimension {} in dimension {}",
            w.dim(),
            a.module_dim()
        )));
    }
    let center = a.center();
    let iso = match center.algebra.field_test(seed)? {
        FieldTest::Field(iso) => iso,
        FieldTest::NotField(_) => return Err(AdjointError::CenterNotField),
    };
    let e = iso.degree();
    let n = a.module_dim();
    if !n.is_multiple_of(e) || a.dim() != e * (n / e) * (n / e) {
        return Err(AdjointError::NotSimple(format!(
            "dimension {} is not that of a full matrix algebra over GF(p^{e}) on a {n}-dimensional space",
            a.dim()
        )));
    }
    Ok(Simplicity { center: iso, center_pairs: center.pairs, module_rank: n / e })
}

/// Type of the involution on a simple algebra `M_n(k)`, read off from the
/// dimension of the symmetric elements.
pub fn classify_involution(a: &StarAlgebra, s: &Simplicity) -> InvolutionType {
    let fixes_center = s.center_pairs.iter().all(|(f, g)| f == g);
    let e = s.center.degree();
    if !fixes_center {
        return InvolutionType::Unitary;
    }
    let n = s.module_rank;
    let sym = a.symmetric_dim();
    if !sym.is_multiple_of(e) {
        return InvolutionType::Unclassified;
    }
    match sym / e {
        x if x == n * (n + 1) / 2 => InvolutionType::Orthogonal,
        x if x + n == n * (n + 1) / 2 => InvolutionType::Symplectic,
        _ => InvolutionType::Unclassified,
    }
}

/// `V (x)_A V` with its induced bimap and the projection to `W`.
#[derive(Clone, Debug)]
pub struct TensorSpace {
    /// `n^2 x t` matrix sending `u_i (x) u_j` (index `i*n + j`) to `T`.
    pub quotient_map: Mat<Fp>,
    /// `(u, v) -> u (x)_A v`.
    pub tensor: Bimap,
    /// `t x w` with `b = tensor * pihat`.
    pub pihat: Mat<Fp>,
    /// Indices `i*n + j` whose classes form the basis of `T`.
    pub free_columns: Vec<usize>,
}

impl TensorSpace {
    pub fn dim(&self) -> usize {
        self.quotient_map.cols()
    }
}

/// `V (x) V` modulo `(u f) (x) v - u (x) (v g)` over a basis of `A`.
pub fn tensor_over(a: &StarAlgebra, b: &Bimap) -> Result<TensorSpace, AdjointError> {
    let n = b.dim_v();
    if a.module_dim() != n || b.dim_u() != n {
        return Err(AdjointError::NotSquare);
    }
    let f = b.field();
    let n2 = n * n;
    let mut red = RowReducer::new(f, n2);
    for t in 0..a.dim() {
        let (fm, gm) = a.pair(t);
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![0u32; n2];
                for x in 0..n {
                    let idx = x * n + j;
                    row[idx] = f.add(&row[idx], fm.get(i, x));
                    let idx = i * n + x;
                    row[idx] = f.sub(&row[idx], gm.get(j, x));
                }
                red.push(&row);
            }
        }
    }
    let relations = Subspace::row_space(&red.row_space());
    let q = relations.quotient_map();
    let free = relations.free_columns();
    let mut tensor = Vec::with_capacity(n2 * free.len());
    for r in 0..n2 {
        tensor.extend_from_slice(q.row(r));
    }
    let tensor = Bimap::new(f, n, n, free.len(), tensor, BimapKind::General)?;
    let pihat = Mat::from_rows_with_cols(
        f,
        b.dim_w(),
        &free.iter().map(|&c| b.get(c / n, c % n).to_vec()).collect::<Vec<_>>(),
    )
    .expect("shape");
    for i in 0..n {
        for j in 0..n {
            if pihat.vec_mul(tensor.get(i, j)).expect("shape") != b.get(i, j) {
                return Err(AdjointError::NotClosed("b does not factor through the tensor product"));
            }
        }
    }
    Ok(TensorSpace { quotient_map: q, tensor, pihat, free_columns: free })
}

/// `b` written as a standard symplectic form over its adjoint center field:
/// `b(x phi, y phi) = j(x, y) psi` where `j` is the flattened standard form
/// on `k^{2m}`.
#[derive(Clone, Debug)]
pub struct KStructure {
    pub field: FieldCtx,
    pub m: usize,
    /// `2me x dim V`, invertible.
    pub phi: Mat<Fp>,
    /// `e x dim W`, surjective.
    pub psi: Mat<Fp>,
    pub involution: InvolutionType,
    pub adjoint_dim: usize,
    pub tensor_dim: usize,
}

/// Which step of [`k_structure`] failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KStructureError {
    #[error("degenerate: {0}")]
    Degeneracy(AdjointError),
    #[error("reducible: {0}")]
    Reducibility(AdjointError),
    #[error("center field: {0}")]
    CenterField(AdjointError),
    #[error("involution type: {0}")]
    InvolutionType(AdjointError),
    #[error("tensor form: {0}")]
    TensorForm(AdjointError),
}

pub fn k_structure(b: &Bimap, seed: u64) -> Result<KStructure, KStructureError> {
    let a = compute_adjoint(b).map_err(KStructureError::Degeneracy)?;
    let simple = is_simple_irreducible(&a, seed).map_err(|e| match e {
        AdjointError::CenterNotField | AdjointError::Centroid(_) => KStructureError::CenterField(e),
        other => KStructureError::Reducibility(other),
    })?;
    let ty = classify_involution(&a, &simple);
    let n_k = simple.module_rank;
    if ty != InvolutionType::Symplectic || n_k % 2 != 0 {
        return Err(KStructureError::InvolutionType(AdjointError::WrongInvolution(ty)));
    }
    let iso = &simple.center;
    let k = iso.ctx().clone();
    let e = k.d();
    let f = b.field();
    let n = b.dim_v();
    let t = tensor_over(&a, b).map_err(KStructureError::TensorForm)?;
    if t.dim() != e {
        return Err(KStructureError::TensorForm(AdjointError::TensorDimension { expected: e, got: t.dim() }));
    }
    // x of the canonical model acting on V
    let x_v = iso.from_field(k.generator().coeffs());
    // k-basis of V: greedy orbit basis from the standard basis
    let mut span = Subspace::zero(f, n);
    let mut prows: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        if span.contains(&v).expect("shape") {
            continue;
        }
        let mut cur = v;
        for _ in 0..e {
            prows.push(cur.clone());
            cur = x_v.vec_mul(&cur).expect("shape");
        }
        span = Subspace::span(f, n, &prows).expect("shape");
    }
    let p_mat = Mat::from_rows(f, &prows).expect("shape");
    debug_assert!(p_mat.is_invertible());
    // k-coordinate on T: lambda -> t0 . lambda, with t0 the first basis vector
    let q = &t.quotient_map;
    let x_t = Mat::from_fn(f, e, e, |r, c| {
        // T basis vector r is the class of u_i (x) u_j for the r-th free column
        let idx = t.free_columns[r];
        let (i, j) = (idx / n, idx % n);
        // (u_i X) (x) u_j
        (0..n).fold(0u32, |acc, a| f.add(&acc, &f.mul(x_v.get(i, a), q.get(a * n + j, c))))
    });
    let mut trows = Vec::with_capacity(e);
    let mut cur = vec![0u32; e];
    cur[0] = 1;
    for _ in 0..e {
        trows.push(cur.clone());
        cur = x_t.vec_mul(&cur).expect("shape");
    }
    let psi_t = Mat::from_rows(f, &trows).expect("shape");
    let psi_t_coords = BasisCoords::new(&psi_t)
        .map_err(|_| KStructureError::TensorForm(AdjointError::TensorForm("T is not one-dimensional over k".into())))?;
    // Gram matrix over k of the basis v_i = prows[i*e]
    let gram = Mat::from_fn(k.clone(), n_k, n_k, |i, j| {
        let tv = t.tensor.evaluate(&prows[i * e], &prows[j * e]).expect("shape");
        psi_t_coords.coords(&tv).expect("basis of T")
    });
    let hyp = hyperbolic_basis(&gram).map_err(|err| KStructureError::TensorForm(AdjointError::Bimap(err)))?;
    let phi = flatten_k_matrix(&k, &hyp).mul(&p_mat).expect("shape");
    let psi = psi_t.mul(&t.pihat).expect("shape");
    Ok(KStructure {
        field: k,
        m: n_k / 2,
        phi,
        psi,
        involution: ty,
        adjoint_dim: a.dim(),
        tensor_dim: t.dim(),
    })
}

/// One hyperbolic line of an orthogonal decomposition, with the
/// self-adjoint idempotent projecting onto it.
#[derive(Clone, Debug)]
pub struct PerpSummand {
    pub line: Subspace<Fp>,
    pub idempotent: Mat<Fp>,
}

/// Orthogonal decomposition of `b` into hyperbolic lines over the adjoint
/// center field, via a hyperbolic basis.
pub fn perp_decompose(b: &Bimap, seed: u64) -> Result<Vec<PerpSummand>, KStructureError> {
    let ks = k_structure(b, seed)?;
    let e = ks.field.d();
    let f = b.field();
    let n = b.dim_v();
    let m = ks.m;
    let phi_inv = ks.phi.inverse().expect("phi is invertible");
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let coords: Vec<usize> = (0..e).map(|a| i * e + a).chain((0..e).map(|a| (m + i) * e + a)).collect();
        let mut sel = Mat::zeros(f, n, n);
        for &c in &coords {
            sel.set(c, c, 1);
        }
        let idempotent = phi_inv.mul(&sel).and_then(|x| x.mul(&ks.phi)).expect("shape");
        let line = Subspace::span(f, n, &coords.iter().map(|&c| ks.phi.row(c).to_vec()).collect::<Vec<_>>())
            .expect("shape");
        out.push(PerpSummand { line, idempotent });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimap::standard_symplectic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    fn coeff_projection(d: usize, keep: &[usize]) -> Mat<Fp> {
        let mut m = Mat::zeros(f3(), d, keep.len());
        for (t, &c) in keep.iter().enumerate() {
            m.set(c, t, 1);
        }
        m
    }

    #[test]
    fn adjoint_dimensions() {
        for (m, d) in [(1, 1), (1, 2), (2, 1), (1, 3)] {
            let k = FieldCtx::new(3, d).unwrap();
            let a = compute_adjoint(&standard_symplectic(m, &k)).unwrap();
            assert_eq!(a.dim(), 4 * m * m * d, "m={m} d={d}");
            assert!(a.contains_identity());
        }
        // a projection to Z/p: M_{2me}(Z/p)
        let k = FieldCtx::new(3, 2).unwrap();
        let b = standard_symplectic(1, &k).quotient(&coeff_projection(2, &[0])).unwrap();
        assert_eq!(compute_adjoint(&b).unwrap().dim(), 16);
    }

    #[test]
    fn simple_center_and_type() {
        let k = FieldCtx::new(3, 3).unwrap();
        let j = standard_symplectic(1, &k);
        let a = compute_adjoint(&j).unwrap();
        let s = is_simple_irreducible(&a, 0).unwrap();
        assert_eq!(s.center.degree(), 3);
        assert_eq!(s.module_rank, 2);
        assert_eq!(classify_involution(&a, &s), InvolutionType::Symplectic);

        let k9 = FieldCtx::new(3, 2).unwrap();
        let b = standard_symplectic(1, &k9).quotient(&coeff_projection(2, &[1])).unwrap();
        let a = compute_adjoint(&b).unwrap();
        let s = is_simple_irreducible(&a, 0).unwrap();
        assert_eq!(s.center.degree(), 1);
        assert_eq!(s.module_rank, 4);
        assert_eq!(a.symmetric_dim(), 6);
        assert_eq!(classify_involution(&a, &s), InvolutionType::Symplectic);
    }

    #[test]
    fn scalars_give_orthogonal_type() {
        let id = Mat::identity(f3(), 1);
        let a = StarAlgebra::from_pairs(f3(), 1, vec![(id.clone(), id)]).unwrap();
        let s = is_simple_irreducible(&a, 0).unwrap();
        assert_eq!(classify_involution(&a, &s), InvolutionType::Orthogonal);
    }

    #[test]
    fn perp_sum_is_reducible() {
        let k = FieldCtx::new(3, 1).unwrap();
        let j = standard_symplectic(1, &k);
        let jj = j.direct_sum(&j).unwrap();
        let a = compute_adjoint(&jj).unwrap();
        assert!(a.irreducibility_witness().is_some());
        assert!(matches!(is_simple_irreducible(&a, 0), Err(AdjointError::NotSimple(_))));
    }

    #[test]
    fn tensor_square_of_the_standard_form() {
        for d in 1..=3 {
            let k = FieldCtx::new(3, d).unwrap();
            let j = standard_symplectic(2, &k);
            let a = compute_adjoint(&j).unwrap();
            let t = tensor_over(&a, &j).unwrap();
            assert_eq!(t.dim(), d);
            assert!(t.tensor.is_alternating());
            assert!(t.tensor.is_nondegenerate());
        }
    }

    #[test]
    fn tensor_over_scalars_is_the_full_tensor_square() {
        let k = FieldCtx::new(3, 1).unwrap();
        let j = standard_symplectic(1, &k);
        let id = Mat::identity(f3(), 2);
        let scalars = StarAlgebra::from_pairs(f3(), 2, vec![(id.clone(), id)]).unwrap();
        assert_eq!(tensor_over(&scalars, &j).unwrap().dim(), 4);
    }

    #[test]
    fn adjoint_of_j_sits_inside_adjoint_of_quotient() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        let q = j.quotient(&coeff_projection(2, &[0])).unwrap();
        let aj = compute_adjoint(&j).unwrap();
        let aq = compute_adjoint(&q).unwrap();
        for t in 0..aj.dim() {
            let (f, g) = aj.pair(t);
            assert!(aq.contains(f, g));
        }
    }

    #[test]
    fn conjugation_covariance() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = loop {
            let x = Mat::from_fn(f3(), 4, 4, |_, _| rng.gen_range(0..3));
            if x.is_invertible() {
                break x;
            }
        };
        let xinv = x.inverse().unwrap();
        let pulled = j.pullback(&x, &x).unwrap();
        let a = compute_adjoint(&j).unwrap();
        let ap = compute_adjoint(&pulled).unwrap();
        assert_eq!(a.dim(), ap.dim());
        for t in 0..a.dim() {
            let (f, g) = a.pair(t);
            let fc = x.mul(f).unwrap().mul(&xinv).unwrap();
            let gc = x.mul(g).unwrap().mul(&xinv).unwrap();
            assert!(ap.contains(&fc, &gc));
        }
    }

    #[test]
    fn k_structure_reproduces_the_form() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(2, &k);
        let ks = k_structure(&j, 0).unwrap();
        assert_eq!((ks.m, ks.field.d()), (2, 2));
        let std = standard_symplectic(2, &ks.field);
        let transported = j.pullback(&ks.phi, &ks.phi).unwrap();
        assert_eq!(transported, std.compose_unchecked(&ks.psi));
    }

    #[test]
    fn perp_decomposition_idempotents() {
        let k = FieldCtx::new(3, 2).unwrap();
        for m in 1..=2 {
            let j = standard_symplectic(m, &k);
            let parts = perp_decompose(&j, 0).unwrap();
            assert_eq!(parts.len(), m);
            let a = compute_adjoint(&j).unwrap();
            let n = j.dim_v();
            let mut sum = Mat::zeros(f3(), n, n);
            for (i, pi) in parts.iter().enumerate() {
                let e = &pi.idempotent;
                assert_eq!(e.mul(e).unwrap(), *e);
                assert!(a.contains(e, e), "self-adjoint idempotent");
                assert_eq!(pi.line.dim(), 2 * 2);
                for (jdx, pj) in parts.iter().enumerate() {
                    if i != jdx {
                        assert!(e.mul(&pj.idempotent).unwrap().is_zero());
                    }
                }
                sum = sum.add(e).unwrap();
            }
            assert_eq!(sum, Mat::identity(f3(), n));
        }
    }
}
