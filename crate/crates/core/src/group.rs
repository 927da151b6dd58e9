//! Class-2 groups of exponent `p` through the Baer correspondence.
//!
//! A [`Class2Group`] is `Grp(b)` for an alternating bimap `b: V x V -> W`:
//! the set `V x W` with `(u; s)(v; t) = (u + v; s + t + b(u, v)/2)`.

use rand::Rng;
use thiserror::Error;

use crate::bimap::{pseudo_isometry_violation, standard_symplectic, Bimap, BimapError, BimapKind};
use crate::ff::{Field, FieldCtx, Fp};
use crate::linalg::{LinalgError, Mat, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("element shape does not match the group")]
    Mismatch,
    #[error("commutator tensor must be alternating")]
    NotAlternating,
    #[error("cannot quotient by all of the derived subgroup")]
    FullKernel,
    #[error("kernel lives in dimension {got}, central part has dimension {expected}")]
    KernelAmbient { expected: usize, got: usize },
    #[error(transparent)]
    Bimap(#[from] BimapError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which inclusion of `1 = G^p < G' = Z(G) < G` fails.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum CertificationFailure {
    #[error("group is abelian (G' = 1)")]
    Abelian,
    #[error("center strictly contains the derived subgroup (Bi(G) has a nonzero radical)")]
    CenterExceedsDerived,
    #[error("derived subgroup is smaller than the central factor (commutators do not span W)")]
    DerivedBelowCentral,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub u: Vec<u32>,
    pub s: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Class2Group {
    bimap: Bimap,
}

impl Class2Group {
    /// `Grp(b)` for an alternating `b`.
    pub fn from_bimap(b: Bimap) -> Result<Self, GroupError> {
        if !b.is_alternating() {
            return Err(GroupError::NotAlternating);
        }
        let b = if b.kind() == BimapKind::Alternating {
            b
        } else {
            Bimap::new(b.field(), b.dim_v(), b.dim_v(), b.dim_w(), b.tensor().to_vec(), BimapKind::Alternating)?
        };
        Ok(Class2Group { bimap: b })
    }

    /// `H_m(K)`.
    pub fn heisenberg(m: usize, k: &FieldCtx) -> Self {
        Class2Group { bimap: standard_symplectic(m, k) }
    }

    /// The Brahana product of a general bimap `c: U x V -> W`, presented by
    /// its alternating extension `b((u,v),(x,y)) = c(u,y) - c(x,v)`.
    pub fn brahana(c: &Bimap) -> Self {
        let f = c.field();
        let (du, dv, dw) = (c.dim_u(), c.dim_v(), c.dim_w());
        let b = Bimap::alternating_from_fn(f, du + dv, dw, |i, j| {
            // i < j; only U x V pairs contribute
            if i < du && j >= du {
                c.get(i, j - du).to_vec()
            } else {
                vec![0; dw]
            }
        });
        Class2Group { bimap: b }
    }

    pub fn bimap(&self) -> &Bimap {
        &self.bimap
    }
    pub fn field(&self) -> Fp {
        self.bimap.field()
    }
    pub fn p(&self) -> u32 {
        self.bimap.p()
    }
    pub fn dim_v(&self) -> usize {
        self.bimap.dim_v()
    }
    pub fn dim_w(&self) -> usize {
        self.bimap.dim_w()
    }

    /// `log_p |G|`.
    pub fn log_order(&self) -> usize {
        self.dim_v() + self.dim_w()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { u: vec![0; self.dim_v()], s: vec![0; self.dim_w()] }
    }

    pub fn element(&self, u: Vec<u32>, s: Vec<u32>) -> Result<GroupElement, GroupError> {
        let p = self.p();
        if u.len() != self.dim_v() || s.len() != self.dim_w() || u.iter().chain(&s).any(|&c| c >= p) {
            return Err(GroupError::Mismatch);
        }
        Ok(GroupElement { u, s })
    }

    pub fn random_element(&self, rng: &mut impl Rng) -> GroupElement {
        let p = self.p();
        GroupElement {
            u: (0..self.dim_v()).map(|_| rng.gen_range(0..p)).collect(),
            s: (0..self.dim_w()).map(|_| rng.gen_range(0..p)).collect(),
        }
    }

    /// Every element, in base-`p` counting order of `(u, s)`.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        let n = self.log_order();
        let p = self.p() as u64;
        (0..p.pow(n as u32)).map(move |mut idx| {
            let coords: Vec<u32> = (0..n)
                .map(|_| {
                    let c = (idx % p) as u32;
                    idx /= p;
                    c
                })
                .collect();
            GroupElement { u: coords[..self.dim_v()].to_vec(), s: coords[self.dim_v()..].to_vec() }
        })
    }

    fn check(&self, g: &GroupElement) -> Result<(), GroupError> {
        if g.u.len() != self.dim_v() || g.s.len() != self.dim_w() {
            return Err(GroupError::Mismatch);
        }
        Ok(())
    }

    fn add_vec(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let f = self.field();
        a.iter().zip(b).map(|(x, y)| f.add(x, y)).collect()
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        let f = self.field();
        let half = f.half();
        let b = self.bimap.eval_unchecked(&g.u, &h.u);
        let s: Vec<u32> = g
            .s
            .iter()
            .zip(&h.s)
            .zip(&b)
            .map(|((x, y), z)| f.add(&f.add(x, y), &f.mul(&half, z)))
            .collect();
        Ok(GroupElement { u: self.add_vec(&g.u, &h.u), s })
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        Ok(self.power(g, -1))
    }

    /// `(u; s)^e = (e u; e s)`.
    pub fn power(&self, g: &GroupElement, e: i64) -> GroupElement {
        let f = self.field();
        let c = f.from_int(e);
        GroupElement {
            u: g.u.iter().map(|x| f.mul(x, &c)).collect(),
            s: g.s.iter().map(|x| f.mul(x, &c)).collect(),
        }
    }

    /// `[g, h] = (0; b(u, v))`.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        self.check(g)?;
        self.check(h)?;
        Ok(GroupElement { u: vec![0; self.dim_v()], s: self.bimap.eval_unchecked(&g.u, &h.u) })
    }

    /// `g^-1 h^-1 g h` by repeated multiplication.
    pub fn commutator_by_products(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement, GroupError> {
        let gi = self.inverse(g)?;
        let hi = self.inverse(h)?;
        let x = self.multiply(&gi, &hi)?;
        let y = self.multiply(&x, g)?;
        self.multiply(&y, h)
    }

    /// `(Z(G), G')` as subspaces of the coordinate space `V + W`.
    pub fn center_and_derived(&self) -> (Subspace<Fp>, Subspace<Fp>) {
        let f = self.field();
        let (dv, dw) = (self.dim_v(), self.dim_w());
        let pad = |v: Vec<u32>, at_w: bool| {
            let mut out = vec![0; dv + dw];
            let off = if at_w { dv } else { 0 };
            out[off..off + v.len()].copy_from_slice(&v);
            out
        };
        let mut center: Vec<Vec<u32>> = self.bimap.radical().basis_vecs().into_iter().map(|v| pad(v, false)).collect();
        center.extend(Mat::identity(f, dw).row_vecs().into_iter().map(|v| pad(v, true)));
        let derived: Vec<Vec<u32>> = self.bimap.image().basis_vecs().into_iter().map(|v| pad(v, true)).collect();
        (
            Subspace::span(f, dv + dw, &center).expect("ambient"),
            Subspace::span(f, dv + dw, &derived).expect("ambient"),
        )
    }

    /// Certifies `1 = G^p < G' = Z(G) < G`. `G^p = 1` holds for every
    /// `Grp(b)`, so only the commutator data is inspected.
    pub fn certify(&self) -> Result<(), CertificationFailure> {
        if self.bimap.is_zero() {
            return Err(CertificationFailure::Abelian);
        }
        if self.bimap.radical().dim() > 0 {
            return Err(CertificationFailure::CenterExceedsDerived);
        }
        if self.bimap.image().dim() < self.dim_w() {
            return Err(CertificationFailure::DerivedBelowCentral);
        }
        Ok(())
    }

    /// `Bi(G): G/Z(G) x G/Z(G) -> G'`, in coordinates of the complement of
    /// the radical and of the echelon basis of the image.
    pub fn extract_bimap(&self) -> Result<Bimap, CertificationFailure> {
        self.certify()?;
        let b = &self.bimap;
        let radical = b.radical();
        let f = self.field();
        let section = Mat::from_rows_with_cols(f, b.dim_v(), &radical.complement_basis()).expect("shape");
        let image = b.image();
        // coordinates in the image basis: project with the echelon pivots
        let mut coords = Mat::zeros(f, b.dim_w(), image.dim());
        for (t, &pc) in image.pivots().iter().enumerate() {
            coords.set(pc, t, 1);
        }
        let reduced = b.pullback(&section, &section).expect("shape").compose_unchecked(&coords);
        Ok(Bimap::new(f, reduced.dim_v(), reduced.dim_v(), reduced.dim_w(), reduced.tensor().to_vec(), BimapKind::Alternating)
            .expect("restriction of an alternating bimap"))
    }

    /// `G / N` for a proper subspace `N` of the central coordinates `W`.
    pub fn quotient_group(&self, n: &Subspace<Fp>) -> Result<Class2Group, GroupError> {
        if n.ambient() != self.dim_w() {
            return Err(GroupError::KernelAmbient { expected: self.dim_w(), got: n.ambient() });
        }
        if n.dim() == self.dim_w() {
            return Err(GroupError::FullKernel);
        }
        Ok(Class2Group { bimap: self.bimap.quotient(&n.quotient_map())? })
    }
}

/// A checked isomorphism `(u; s) -> (u f; s fhat + u tau)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedIsomorphism {
    pub f: Mat<Fp>,
    pub fhat: Mat<Fp>,
    pub tau: Mat<Fp>,
}

impl CheckedIsomorphism {
    pub fn apply(&self, g: &GroupElement) -> GroupElement {
        let mut s = self.fhat.vec_mul(&g.s).expect("shape");
        let shear = self.tau.vec_mul(&g.u).expect("shape");
        let f = self.f.field();
        for (a, b) in s.iter_mut().zip(shear) {
            *a = f.add(a, &b);
        }
        GroupElement { u: self.f.vec_mul(&g.u).expect("shape"), s }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsomorphismError {
    #[error("map shapes do not match the groups")]
    Shape,
    #[error("f is not invertible")]
    SingularF,
    #[error("fhat is not invertible")]
    SingularFhat,
    #[error("relation fails on basis pair ({0}, {1})")]
    Relation(usize, usize),
}

/// Verify that `(u; s) -> (u f; s fhat + u tau)` is an isomorphism
/// `G1 -> G2`. `tau` defaults to zero.
pub fn apply_isomorphism(
    g1: &Class2Group,
    g2: &Class2Group,
    f: &Mat<Fp>,
    fhat: &Mat<Fp>,
    tau: Option<&Mat<Fp>>,
) -> Result<CheckedIsomorphism, IsomorphismError> {
    if g1.p() != g2.p()
        || f.rows() != g1.dim_v()
        || f.cols() != g2.dim_v()
        || fhat.rows() != g1.dim_w()
        || fhat.cols() != g2.dim_w()
    {
        return Err(IsomorphismError::Shape);
    }
    let tau = match tau {
        Some(t) if t.rows() != g1.dim_v() || t.cols() != g2.dim_w() => return Err(IsomorphismError::Shape),
        Some(t) => t.clone(),
        None => Mat::zeros(g1.field(), g1.dim_v(), g2.dim_w()),
    };
    if !f.is_invertible() {
        return Err(IsomorphismError::SingularF);
    }
    if !fhat.is_invertible() {
        return Err(IsomorphismError::SingularFhat);
    }
    if let Some((i, j)) = pseudo_isometry_violation(g1.bimap(), g2.bimap(), f, fhat) {
        return Err(IsomorphismError::Relation(i, j));
    }
    Ok(CheckedIsomorphism { f: f.clone(), fhat: fhat.clone(), tau })
}

/// Multiplication in the Brahana product `U x V x W` of `c`:
/// `(u,v;s)(x,y;t) = (u+x, v+y; s+t+c(u,y))`, elements written as
/// `(u ++ v; s)`.
pub fn brahana_multiply(c: &Bimap, g: &GroupElement, h: &GroupElement) -> GroupElement {
    let f = c.field();
    let du = c.dim_u();
    let cross = c.eval_unchecked(&g.u[..du], &h.u[du..]);
    GroupElement {
        u: g.u.iter().zip(&h.u).map(|(a, b)| f.add(a, b)).collect(),
        s: g.s.iter().zip(&h.s).zip(&cross).map(|((a, b), x)| f.add(&f.add(a, b), x)).collect(),
    }
}

/// The isomorphism from the Brahana product to [`Class2Group::brahana`]:
/// `(u,v;s) -> ((u,v); s - c(u,v)/2)`.
pub fn brahana_to_baer(c: &Bimap, g: &GroupElement) -> GroupElement {
    let f = c.field();
    let du = c.dim_u();
    let cuv = c.eval_unchecked(&g.u[..du], &g.u[du..]);
    let half = f.half();
    GroupElement {
        u: g.u.clone(),
        s: g.s.iter().zip(&cuv).map(|(a, x)| f.sub(a, &f.mul(&half, x))).collect(),
    }
}

/// The dot product `K^m x K^m -> K` restricted to `Z/p`.
pub fn dot_product_bimap(m: usize, k: &FieldCtx) -> Bimap {
    let d = k.d();
    let x = k.generator();
    let mut powers = vec![k.one()];
    for a in 1..2 * d {
        powers.push(k.mul(&powers[a - 1], &x.coeffs().to_vec()));
    }
    let n = m * d;
    let mut tensor = vec![0u32; n * n * d];
    for i in 0..m {
        for a in 0..d {
            for b in 0..d {
                let start = ((i * d + a) * n + (i * d + b)) * d;
                tensor[start..start + d].copy_from_slice(&powers[a + b]);
            }
        }
    }
    Bimap::new(k.prime_field(), n, n, d, tensor, BimapKind::General).expect("shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h1(d: usize) -> Class2Group {
        Class2Group::heisenberg(1, &FieldCtx::new(3, d).unwrap())
    }

    #[test]
    fn product_examples() {
        let g = h1(1);
        let e = g.element(vec![1, 0], vec![0]).unwrap();
        let f = g.element(vec![0, 1], vec![0]).unwrap();
        assert_eq!(g.multiply(&e, &f).unwrap(), g.element(vec![1, 1], vec![2]).unwrap());
        assert_eq!(g.multiply(&e, &g.identity()).unwrap(), e);
        assert_eq!(g.commutator(&e, &f).unwrap(), g.element(vec![0, 0], vec![1]).unwrap());
        let x = g.element(vec![2, 1], vec![1]).unwrap();
        assert_eq!(g.multiply(&x, &g.inverse(&x).unwrap()).unwrap(), g.identity());
        assert_eq!(g.multiply(&e, &GroupElement { u: vec![0], s: vec![] }), Err(GroupError::Mismatch));
    }

    #[test]
    fn powers_agree_with_iteration() {
        let g = Class2Group::heisenberg(2, &FieldCtx::new(5, 1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = g.random_element(&mut rng);
            let mut acc = g.identity();
            for e in 0..=10 {
                assert_eq!(g.power(&x, e), acc);
                acc = g.multiply(&acc, &x).unwrap();
            }
            assert_eq!(g.power(&x, 5), g.identity());
        }
    }

    #[test]
    fn group_laws_on_random_elements() {
        let g = h1(2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let (a, b, c) = (g.random_element(&mut rng), g.random_element(&mut rng), g.random_element(&mut rng));
            let left = g.multiply(&g.multiply(&a, &b).unwrap(), &c).unwrap();
            let right = g.multiply(&a, &g.multiply(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
            assert_eq!(g.commutator(&a, &b).unwrap(), g.commutator_by_products(&a, &b).unwrap());
        }
    }

    #[test]
    fn heisenberg_orders() {
        assert_eq!(h1(1).log_order(), 3);
        assert_eq!(h1(2).log_order(), 6);
        let h = Class2Group::heisenberg(2, &FieldCtx::new(3, 1).unwrap());
        let (z, d) = h.center_and_derived();
        assert_eq!((z.dim(), d.dim()), (1, 1));
        assert_eq!(z, d);
        assert_eq!(h.certify(), Ok(()));
    }

    #[test]
    fn certification_failures() {
        let f3 = Fp::new(3).unwrap();
        let abelian = Class2Group::from_bimap(Bimap::zero(f3, 3, 1)).unwrap();
        assert_eq!(abelian.certify(), Err(CertificationFailure::Abelian));
        let j = standard_symplectic(1, &FieldCtx::new(3, 1).unwrap());
        let degenerate = Class2Group::from_bimap(j.perp_sum(&Bimap::zero(f3, 1, 1)).unwrap()).unwrap();
        let (z, d) = degenerate.center_and_derived();
        assert!(z.dim() > d.dim());
        assert_eq!(degenerate.certify(), Err(CertificationFailure::CenterExceedsDerived));
        let wide = Class2Group::from_bimap(j.direct_sum(&Bimap::zero(f3, 2, 1)).unwrap()).unwrap();
        assert_eq!(wide.certify(), Err(CertificationFailure::CenterExceedsDerived));
        let thin = Class2Group::from_bimap(j.compose_unchecked(&Mat::from_rows(f3, &[vec![1, 0]]).unwrap())).unwrap();
        assert_eq!(thin.certify(), Err(CertificationFailure::DerivedBelowCentral));
    }

    #[test]
    fn extract_bimap_of_certified_group_is_itself() {
        let h = h1(2);
        let b = h.extract_bimap().unwrap();
        assert_eq!(&b, h.bimap());
        assert_eq!(b.radical().dim(), 0);
        let rebuilt = Class2Group::from_bimap(b).unwrap();
        let id_v = Mat::identity(h.field(), 4);
        let id_w = Mat::identity(h.field(), 2);
        assert!(apply_isomorphism(&rebuilt, &h, &id_v, &id_w, None).is_ok());
    }

    #[test]
    fn quotient_group_orders() {
        let h = h1(2);
        let f3 = h.field();
        let zero = Subspace::zero(f3, 2);
        assert_eq!(h.quotient_group(&zero).unwrap(), h);
        let line = Subspace::span(f3, 2, &[vec![1, 1]]).unwrap();
        assert_eq!(h.quotient_group(&line).unwrap().log_order(), 5);
        assert_eq!(h.quotient_group(&Subspace::full(f3, 2)), Err(GroupError::FullKernel));
        assert!(matches!(
            h.quotient_group(&Subspace::zero(f3, 3)),
            Err(GroupError::KernelAmbient { .. })
        ));
    }

    #[test]
    fn shear_is_an_automorphism() {
        let h = h1(1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f3 = h.field();
        let tau = Mat::from_rows(f3, &[vec![2], vec![1]]).unwrap();
        let iso = apply_isomorphism(&h, &h, &Mat::identity(f3, 2), &Mat::identity(f3, 1), Some(&tau)).unwrap();
        for _ in 0..50 {
            let (a, b) = (h.random_element(&mut rng), h.random_element(&mut rng));
            assert_eq!(iso.apply(&h.multiply(&a, &b).unwrap()), h.multiply(&iso.apply(&a), &iso.apply(&b)).unwrap());
        }
    }

    #[test]
    fn random_pairs_are_rejected_with_witness() {
        let h = h1(2);
        let f3 = h.field();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut rejected = 0;
        for _ in 0..30 {
            let f = Mat::from_fn(f3, 4, 4, |_, _| rng.gen_range(0..3));
            let fhat = Mat::from_fn(f3, 2, 2, |_, _| rng.gen_range(0..3));
            if let Err(IsomorphismError::Relation(i, j)) = apply_isomorphism(&h, &h, &f, &fhat, None) {
                assert!(i < 4 && j < 4);
                rejected += 1;
            }
        }
        assert!(rejected > 0);
    }

    #[test]
    fn brahana_presentation_is_isomorphic_to_the_product() {
        let k = FieldCtx::new(3, 2).unwrap();
        let c = dot_product_bimap(1, &k);
        let g = Class2Group::brahana(&c);
        assert!(g.bimap().is_alternating());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let (a, b) = (g.random_element(&mut rng), g.random_element(&mut rng));
            let lhs = brahana_to_baer(&c, &brahana_multiply(&c, &a, &b));
            let rhs = g.multiply(&brahana_to_baer(&c, &a), &brahana_to_baer(&c, &b)).unwrap();
            assert_eq!(lhs, rhs);
            assert!(g.bimap().evaluate(&a.u, &a.u).unwrap().iter().all(|&x| x == 0));
        }
        let zero = Bimap::new(k.prime_field(), 2, 2, 1, vec![0; 4], BimapKind::General).unwrap();
        assert_eq!(Class2Group::brahana(&zero).certify(), Err(CertificationFailure::Abelian));
    }
}
