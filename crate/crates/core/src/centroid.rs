//! The centroid `Cent(b)` and field recognition for commutative matrix
//! algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bimap::Bimap;
use crate::ff::{is_irreducible, minimal_polynomial, Field, FieldCtx, Fp, Poly};
use crate::group::{CertificationFailure, Class2Group};
use crate::linalg::{BasisCoords, Mat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CentroidError {
    #[error("bimap is degenerate")]
    Degenerate,
    #[error("bimap values do not span W")]
    ImageNotFull,
    #[error("algebra is not commutative")]
    NotCommutative,
    #[error("algebra is not closed under multiplication")]
    NotClosed,
    #[error("field test inconclusive after {0} candidates")]
    Inconclusive(usize),
    #[error(transparent)]
    Certification(#[from] CertificationFailure),
}

/// Trials in the seeded random phase, per dimension of the algebra.
const RANDOM_TRIALS_PER_DIM: usize = 4;
/// Largest algebra searched exhaustively when the structured phases fail.
const EXHAUSTIVE_LIMIT: u64 = 59_049;

/// A commutative unital subalgebra of square matrices over `Z/p`,
/// given by a basis.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    field: Fp,
    basis: Vec<Mat<Fp>>,
    coords: BasisCoords<Fp>,
}

impl MatrixAlgebra {
    pub fn new(field: Fp, basis: Vec<Mat<Fp>>) -> Result<Self, CentroidError> {
        let n = basis.first().map_or(0, |m| m.rows());
        let flat = Mat::from_rows_with_cols(field, n * n, &basis.iter().map(|m| m.data().to_vec()).collect::<Vec<_>>())
            .expect("square matrices of one size");
        let coords = BasisCoords::new(&flat).map_err(|_| CentroidError::NotClosed)?;
        Ok(MatrixAlgebra { field, basis, coords })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Mat<Fp>] {
        &self.basis
    }

    pub fn field(&self) -> Fp {
        self.field
    }

    pub fn contains(&self, m: &Mat<Fp>) -> bool {
        self.coords.coords(m.data()).is_some()
    }

    pub fn coords(&self, m: &Mat<Fp>) -> Option<Vec<u32>> {
        self.coords.coords(m.data())
    }

    pub fn combination(&self, coeffs: &[u32]) -> Mat<Fp> {
        let n = self.basis[0].rows();
        let mut acc = Mat::zeros(self.field, n, n);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0 {
                acc = acc.add(&b.scale(c)).expect("shape");
            }
        }
        acc
    }

    pub fn is_commutative(&self) -> bool {
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                if a.mul(b).expect("shape") != b.mul(a).expect("shape") {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_closed(&self) -> bool {
        self.basis
            .iter()
            .all(|a| self.basis.iter().all(|b| self.contains(&a.mul(b).expect("shape"))))
    }

    /// Decide whether the algebra is a field.
    ///
    /// A finite commutative algebra is a field exactly when some element
    /// has an irreducible minimal polynomial of full degree, and it is not
    /// a field as soon as a nonzero element is singular or has a reducible
    /// minimal polynomial. Candidates: the basis, pairwise sums, seeded
    /// random combinations, then everything when the algebra is small.
    pub fn field_test(&self, seed: u64) -> Result<FieldTest, CentroidError> {
        if !self.is_commutative() {
            return Err(CentroidError::NotCommutative);
        }
        let dim = self.dim();
        let p = self.field.p();
        let mut tried = 0;
        let mut check = |coeffs: Vec<u32>| -> Option<FieldTest> {
            tried += 1;
            let a = self.combination(&coeffs);
            if a.is_zero() {
                return None;
            }
            if !a.is_invertible() {
                return Some(FieldTest::NotField(NonFieldWitness::Singular(coeffs)));
            }
            let mp = minimal_polynomial(&a);
            if !is_irreducible(&mp).expect("minimal polynomials are monic") {
                return Some(FieldTest::NotField(NonFieldWitness::ReducibleMinpoly(coeffs, mp)));
            }
            if mp.degree() == Some(dim) {
                return Some(FieldTest::Field(self.field_iso(a, mp)));
            }
            None
        };
        let unit = |i: usize| {
            let mut v = vec![0; dim];
            v[i] = 1;
            v
        };
        for i in 0..dim {
            if let Some(r) = check(unit(i)) {
                return Ok(r);
            }
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let mut v = unit(i);
                v[j] = 1;
                if let Some(r) = check(v) {
                    return Ok(r);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_TRIALS_PER_DIM * dim {
            let v: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..p)).collect();
            if let Some(r) = check(v) {
                return Ok(r);
            }
        }
        let size = (p as u64).checked_pow(dim as u32);
        if size.is_some_and(|s| s <= EXHAUSTIVE_LIMIT) {
            for mut idx in 0..size.unwrap() {
                let v: Vec<u32> = (0..dim)
                    .map(|_| {
                        let c = (idx % p as u64) as u32;
                        idx /= p as u64;
                        c
                    })
                    .collect();
                if let Some(r) = check(v) {
                    return Ok(r);
                }
            }
        }
        Err(CentroidError::Inconclusive(tried))
    }

    fn field_iso(&self, generator: Mat<Fp>, minpoly: Poly) -> FieldIso {
        let e = self.dim();
        let n = generator.rows();
        let ctx = FieldCtx::new(self.field.p(), e).expect("p was validated");
        let lifted: Vec<Vec<u32>> = minpoly
            .coeffs()
            .iter()
            .map(|&c| {
                let mut v = vec![0; e];
                v[0] = c;
                v
            })
            .collect();
        // Roots come sorted; the smallest is a deterministic choice.
        let root = ctx.roots(&lifted, 0x5eed)[0].clone();
        let mut powers = vec![Mat::identity(self.field, n)];
        let mut root_powers = vec![ctx.one()];
        for i in 1..e {
            powers.push(powers[i - 1].mul(&generator).expect("square"));
            root_powers.push(ctx.mul(&root_powers[i - 1], &root));
        }
        let flat = Mat::from_rows(self.field, &powers.iter().map(|m| m.data().to_vec()).collect::<Vec<_>>())
            .expect("shape");
        let root_mat = Mat::from_rows(self.field, &root_powers).expect("shape");
        FieldIso {
            ctx,
            generator,
            root,
            power_coords: BasisCoords::new(&flat).expect("powers of a generator are independent"),
            root_coords: BasisCoords::new(&root_mat).expect("powers of a root are independent"),
            powers,
            root_powers,
        }
    }
}

#[derive(Clone, Debug)]
pub enum NonFieldWitness {
    /// A nonzero singular element: a zero divisor.
    Singular(Vec<u32>),
    /// An element whose minimal polynomial factors.
    ReducibleMinpoly(Vec<u32>, Poly),
}

#[derive(Clone, Debug)]
pub enum FieldTest {
    Field(FieldIso),
    NotField(NonFieldWitness),
}

impl FieldTest {
    pub fn is_field(&self) -> bool {
        matches!(self, FieldTest::Field(_))
    }

    pub fn into_iso(self) -> Option<FieldIso> {
        match self {
            FieldTest::Field(iso) => Some(iso),
            FieldTest::NotField(_) => None,
        }
    }
}

/// An explicit isomorphism between a matrix field `Z/p[z]` and the
/// canonical model `GF(p^e)`, sending `z` to `root`.
#[derive(Clone, Debug)]
pub struct FieldIso {
    ctx: FieldCtx,
    generator: Mat<Fp>,
    root: Vec<u32>,
    powers: Vec<Mat<Fp>>,
    root_powers: Vec<Vec<u32>>,
    power_coords: BasisCoords<Fp>,
    root_coords: BasisCoords<Fp>,
}

impl FieldIso {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn degree(&self) -> usize {
        self.ctx.d()
    }

    pub fn generator(&self) -> &Mat<Fp> {
        &self.generator
    }

    pub fn root(&self) -> &[u32] {
        &self.root
    }

    /// Image of an algebra element in `GF(p^e)`.
    pub fn to_field(&self, m: &Mat<Fp>) -> Option<Vec<u32>> {
        let c = self.power_coords.coords(m.data())?;
        let k = &self.ctx;
        Some(c.iter().zip(&self.root_powers).fold(k.zero(), |acc, (a, r)| {
            k.add(&acc, &k.mul(&k.from_int(*a as i64), r))
        }))
    }

    /// The algebra element corresponding to `a` in `GF(p^e)`.
    pub fn from_field(&self, a: &[u32]) -> Mat<Fp> {
        let c = self.root_coords.coords(a).expect("root powers span the field");
        let n = self.generator.rows();
        let f = *self.generator.field();
        c.iter().zip(&self.powers).fold(Mat::zeros(f, n, n), |acc, (x, m)| acc.add(&m.scale(x)).expect("shape"))
    }
}

/// `Cent(b)`: pairs `(f, h)` with `b(uf, v) = b(u, v)h = b(u, vf)`, stored as
/// block-diagonal matrices `diag(f, h)`.
#[derive(Clone, Debug)]
pub struct CentroidRing {
    dim_v: usize,
    dim_w: usize,
    algebra: MatrixAlgebra,
}

impl CentroidRing {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    /// The `(f, h)` pairs of the basis.
    pub fn pairs(&self) -> Vec<(Mat<Fp>, Mat<Fp>)> {
        let (n, w) = (self.dim_v, self.dim_w);
        self.algebra
            .basis()
            .iter()
            .map(|m| (m.submatrix(0..n, 0..n), m.submatrix(n..n + w, n..n + w)))
            .collect()
    }

    pub fn is_field(&self, seed: u64) -> Result<FieldTest, CentroidError> {
        self.algebra.field_test(seed)
    }
}

/// The linear system for the centroid: unknowns are the entries of `f`
/// (`n^2`) then `h` (`w^2`).
fn centroid_system(b: &Bimap) -> Mat<Fp> {
    let f = b.field();
    let (n, w) = (b.dim_v(), b.dim_w());
    let unknowns = n * n + w * w;
    let mut rows = Vec::with_capacity(2 * n * n * w);
    for i in 0..n {
        for j in 0..n {
            for k in 0..w {
                // b(u_i f, u_j)_k - (b(u_i, u_j) h)_k
                let mut left = vec![0u32; unknowns];
                // (b(u_i, u_j) h)_k - b(u_i, u_j f)_k
                let mut right = vec![0u32; unknowns];
                for a in 0..n {
                    left[i * n + a] = f.add(&left[i * n + a], &b.get(a, j)[k]);
                    right[j * n + a] = f.sub(&right[j * n + a], &b.get(i, a)[k]);
                }
                for l in 0..w {
                    let c = b.get(i, j)[l];
                    let idx = n * n + l * w + k;
                    left[idx] = f.sub(&left[idx], &c);
                    right[idx] = f.add(&right[idx], &c);
                }
                rows.push(left);
                rows.push(right);
            }
        }
    }
    Mat::from_rows_with_cols(f, unknowns, &rows).expect("shape")
}

pub fn compute_centroid(b: &Bimap) -> Result<CentroidRing, CentroidError> {
    if !b.is_nondegenerate() {
        return Err(CentroidError::Degenerate);
    }
    if b.image().dim() != b.dim_w() {
        return Err(CentroidError::ImageNotFull);
    }
    let f = b.field();
    let (n, w) = (b.dim_v(), b.dim_w());
    let basis: Vec<Mat<Fp>> = centroid_system(b)
        .nullspace()
        .into_iter()
        .map(|x| {
            Mat::from_fn(f, n + w, n + w, |r, c| {
                if r < n && c < n {
                    x[r * n + c]
                } else if r >= n && c >= n {
                    x[n * n + (r - n) * w + (c - n)]
                } else {
                    0
                }
            })
        })
        .collect();
    let algebra = MatrixAlgebra::new(f, basis)?;
    if !algebra.is_closed() {
        return Err(CentroidError::NotClosed);
    }
    Ok(CentroidRing { dim_v: n, dim_w: w, algebra })
}

/// Result of the generalized-Heisenberg test: `G = H_m(K)` with `K` of
/// degree `field.degree()`.
#[derive(Clone, Debug)]
pub struct HeisenbergShape {
    pub m: usize,
    pub field: FieldIso,
}

/// `G` is a generalized Heisenberg group exactly when its centroid is a
/// field `K` and `G'` is one-dimensional over `K`.
pub fn is_generalized_heisenberg(g: &Class2Group) -> Result<Option<HeisenbergShape>, CentroidError> {
    let b = g.extract_bimap()?;
    let cent = compute_centroid(&b)?;
    let iso = match cent.is_field(0)? {
        FieldTest::Field(iso) => iso,
        FieldTest::NotField(_) => return Ok(None),
    };
    let e = iso.degree();
    if b.dim_w() != e || b.dim_v() % (2 * e) != 0 {
        return Ok(None);
    }
    Ok(Some(HeisenbergShape { m: b.dim_v() / (2 * e), field: iso }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimap::standard_symplectic;
    use crate::linalg::Subspace;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    /// Independent construction of the centroid equations: the relation
    /// map applied to each unknown unit vector, evaluated with `evaluate`.
    fn oracle_centroid_dim(b: &Bimap) -> usize {
        let (n, w) = (b.dim_v(), b.dim_w());
        let unknowns = n * n + w * w;
        let f = b.field();
        let mut cols = Vec::new();
        for t in 0..unknowns {
            let mut fm = Mat::zeros(f, n, n);
            let mut hm = Mat::zeros(f, w, w);
            if t < n * n {
                fm.set(t / n, t % n, 1);
            } else {
                hm.set((t - n * n) / w, (t - n * n) % w, 1);
            }
            let mut col = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let mut ui = vec![0; n];
                    ui[i] = 1;
                    let mut uj = vec![0; n];
                    uj[j] = 1;
                    let a = b.evaluate(&fm.vec_mul(&ui).unwrap(), &uj).unwrap();
                    let c = hm.vec_mul(&b.evaluate(&ui, &uj).unwrap()).unwrap();
                    let d = b.evaluate(&ui, &fm.vec_mul(&uj).unwrap()).unwrap();
                    for k in 0..w {
                        col.push(f.sub(&a[k], &c[k]));
                        col.push(f.sub(&c[k], &d[k]));
                    }
                }
            }
            cols.push(col);
        }
        // the relation map's kernel dimension
        let m = Mat::from_rows(f, &cols).unwrap();
        unknowns - m.rank()
    }

    #[test]
    fn centroid_of_flattened_form_is_the_field() {
        for d in 1..=3 {
            let k = FieldCtx::new(3, d).unwrap();
            let j = standard_symplectic(1, &k);
            let c = compute_centroid(&j).unwrap();
            assert_eq!(c.dim(), d);
            let id = Mat::identity(f3(), j.dim_v() + j.dim_w());
            assert!(c.algebra().contains(&id));
            let iso = c.is_field(1).unwrap().into_iso().expect("field");
            assert_eq!(iso.degree(), d);
            // the restriction to W is faithful
            let hs: Vec<Vec<u32>> = c.pairs().iter().map(|(_, h)| h.data().to_vec()).collect();
            assert_eq!(Mat::from_rows(f3(), &hs).unwrap().rank(), d);
        }
    }

    #[test]
    fn centroid_matches_oracle_on_projected_form() {
        let k = FieldCtx::new(3, 2).unwrap();
        let j = standard_symplectic(1, &k);
        let pi = Mat::from_rows(f3(), &[vec![1], vec![0]]).unwrap();
        let b = j.quotient(&pi).unwrap();
        let c = compute_centroid(&b).unwrap();
        assert_eq!(c.dim(), oracle_centroid_dim(&b));
        assert_eq!(c.dim(), 1);
        assert!(c.is_field(0).unwrap().is_field());
    }

    #[test]
    fn field_isomorphism_is_multiplicative() {
        let k = FieldCtx::new(3, 3).unwrap();
        let c = compute_centroid(&standard_symplectic(1, &k)).unwrap();
        let iso = c.is_field(2).unwrap().into_iso().unwrap();
        let basis = c.algebra().basis();
        for a in basis {
            for b in basis {
                let lhs = iso.to_field(&a.mul(b).unwrap()).unwrap();
                let rhs = iso.ctx().mul(&iso.to_field(a).unwrap(), &iso.to_field(b).unwrap());
                assert_eq!(lhs, rhs);
            }
            assert_eq!(&iso.from_field(&iso.to_field(a).unwrap()), a);
        }
    }

    #[test]
    fn direct_sum_is_not_a_field() {
        // j over GF(3) twice, each summand with its own W: centroid Z/3 x Z/3
        let k = FieldCtx::new(3, 1).unwrap();
        let j = standard_symplectic(1, &k);
        let b = j.direct_sum(&j).unwrap();
        let c = compute_centroid(&b).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(!c.is_field(0).unwrap().is_field());
    }

    #[test]
    fn degenerate_input_rejected() {
        let k = FieldCtx::new(3, 1).unwrap();
        let j = standard_symplectic(1, &k).perp_sum(&Bimap::zero(f3(), 1, 1)).unwrap();
        assert!(matches!(compute_centroid(&j), Err(CentroidError::Degenerate)));
    }

    #[test]
    fn heisenberg_recognized_by_centroid() {
        for m in 1..=2 {
            for d in 1..=3 {
                let k = FieldCtx::new(3, d).unwrap();
                let shape = is_generalized_heisenberg(&Class2Group::heisenberg(m, &k)).unwrap().unwrap();
                assert_eq!((shape.m, shape.field.degree()), (m, d));
            }
        }
    }

    #[test]
    fn quotient_of_cubic_heisenberg_is_not_heisenberg() {
        let k = FieldCtx::new(3, 3).unwrap();
        let h = Class2Group::heisenberg(1, &k);
        let n = Subspace::span(f3(), 3, &[vec![0, 1, 0]]).unwrap();
        let g = h.quotient_group(&n).unwrap();
        assert!(is_generalized_heisenberg(&g).unwrap().is_none());
    }
}
