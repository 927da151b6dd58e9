//! Isomorphism testing for quotients of generalized Heisenberg groups.
//!
//! Two quotients `H/M` and `H/N` of the same `H = H_m(K)` are isomorphic
//! exactly when some `(sigma^i, c)` in `Gal(K) x| K^x` carries `M` to `N`.
//! For each `i` the scalar `c` solves a linear system over `Z/p`.

use serde::Serialize;
use thiserror::Error;

use crate::bimap::Bimap;
use crate::ff::{Field, FieldCtx, Fp};
use crate::group::{apply_isomorphism, CheckedIsomorphism, Class2Group};
use crate::linalg::{Mat, Subspace};
use crate::recognize::{kernel_section, recognize, NotAQuotient, QuotientDescriptor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoTestError {
    #[error("first group: {0}")]
    First(NotAQuotient),
    #[error("second group: {0}")]
    Second(NotAQuotient),
    #[error("assembled witness failed verification: {0}")]
    Witness(String),
    #[error("search needs {required} candidates, guard is {limit}")]
    Budget { required: u128, limit: u128 },
}

/// `U c` as a subspace, for `c` in `K`.
pub fn scale_subspace(k: &FieldCtx, u: &Subspace<Fp>, c: &[u32]) -> Subspace<Fp> {
    u.image_under(&k.mul_matrix(c)).expect("ambient d")
}

/// `U sigma^i`.
pub fn frobenius_subspace(k: &FieldCtx, u: &Subspace<Fp>, i: usize) -> Subspace<Fp> {
    u.image_under(&k.frobenius_power_matrix(i)).expect("ambient d")
}

/// Finds `c != 0` in `K` with `U c = V`, or `None`.
///
/// Unknowns are the coefficients of `c` and a matrix `alpha` with
/// `u_i c = sum_l alpha_il v_l`. Every nonzero `c` in the projection of the
/// solution space works, since `U c` is then a subspace of `V` of the same
/// dimension. The one returned is the least as a polynomial (coefficients
/// compared from the top degree), which is `1` whenever a constant works.
pub fn subspace_scale_solver(k: &FieldCtx, u: &Subspace<Fp>, v: &Subspace<Fp>) -> Option<Vec<u32>> {
    let d = k.d();
    let f = k.prime_field();
    if u.dim() != v.dim() || u.ambient() != d || v.ambient() != d {
        return None;
    }
    let r = u.dim();
    if r == 0 {
        return Some(k.one());
    }
    let unknowns = d + r * r;
    let ub = u.basis_vecs();
    let vb = v.basis_vecs();
    let mut rows = Vec::with_capacity(r * d);
    for (i, ui) in ub.iter().enumerate() {
        let mul = k.mul_matrix(ui);
        for coord in 0..d {
            let mut row = vec![0u32; unknowns];
            for a in 0..d {
                row[a] = *mul.get(a, coord);
            }
            for (l, vl) in vb.iter().enumerate() {
                row[d + i * r + l] = f.neg(&vl[coord]);
            }
            rows.push(row);
        }
    }
    let sys = Mat::from_rows_with_cols(f, unknowns, &rows).expect("shape");
    let kernel = sys.nullspace();
    let cs: Vec<Vec<u32>> = kernel.iter().map(|x| x[..d].iter().rev().copied().collect()).collect();
    // reversed coordinates: echelon form puts the top degree first
    let span = Subspace::span(f, d, &cs).expect("shape");
    let last = span.basis_vecs().pop()?;
    Some(last.into_iter().rev().collect())
}

/// One step of the Galois loop.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct GaloisStep {
    pub i: usize,
    pub scalar: Option<Vec<u32>>,
}

#[derive(Clone, Debug)]
pub struct IsoWitness {
    pub i: usize,
    pub c: Vec<u32>,
    pub isomorphism: CheckedIsomorphism,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NonIsoReason {
    OrderMismatch { log_order: (usize, usize) },
    FloorMismatch { first: (u32, usize, usize), second: (u32, usize, usize) },
    KernelOrbits { transcript: Vec<GaloisStep> },
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Isomorphic(IsoWitness),
    NonIsomorphic(NonIsoReason),
}

impl Verdict {
    pub fn is_isomorphic(&self) -> bool {
        matches!(self, Verdict::Isomorphic(_))
    }
}

pub fn iso_test(g1: &Class2Group, g2: &Class2Group) -> Result<Verdict, IsoTestError> {
    let d1 = recognize(g1).map_err(IsoTestError::First)?;
    let d2 = recognize(g2).map_err(IsoTestError::Second)?;
    iso_test_descriptors(g1, &d1, g2, &d2)
}

/// The Galois loop on two recognized groups.
pub fn iso_test_descriptors(
    g1: &Class2Group,
    d1: &QuotientDescriptor,
    g2: &Class2Group,
    d2: &QuotientDescriptor,
) -> Result<Verdict, IsoTestError> {
    if g1.log_order() != g2.log_order() {
        return Ok(Verdict::NonIsomorphic(NonIsoReason::OrderMismatch {
            log_order: (g1.log_order(), g2.log_order()),
        }));
    }
    if !d1.is_floor(d2.m, d2.p(), d2.d()) {
        return Ok(Verdict::NonIsomorphic(NonIsoReason::FloorMismatch {
            first: (d1.p(), d1.m, d1.d()),
            second: (d2.p(), d2.m, d2.d()),
        }));
    }
    let k = &d1.field;
    let mut transcript = Vec::with_capacity(k.d());
    for i in 0..k.d() {
        let moved = frobenius_subspace(k, &d1.kernel, i);
        match subspace_scale_solver(k, &moved, &d2.kernel) {
            Some(c) => {
                let isomorphism = assemble_witness(g1, d1, g2, d2, i, &c)?;
                return Ok(Verdict::Isomorphic(IsoWitness { i, c, isomorphism }));
            }
            None => transcript.push(GaloisStep { i, scalar: None }),
        }
    }
    Ok(Verdict::NonIsomorphic(NonIsoReason::KernelOrbits { transcript }))
}

/// The automorphism `(x -> x^sigma^i diag(I_m, c I_m); a -> a^sigma^i c)` of
/// `H_m(K)` in flattened coordinates.
pub fn heisenberg_automorphism(k: &FieldCtx, m: usize, i: usize, c: &[u32]) -> (Mat<Fp>, Mat<Fp>) {
    let d = k.d();
    let f = k.prime_field();
    let frob = k.frobenius_power_matrix(i);
    let scale = k.mul_matrix(c);
    let fc = frob.mul(&scale).expect("square");
    let mut phi_v = Mat::zeros(f, 2 * m * d, 2 * m * d);
    for blk in 0..2 * m {
        let block = if blk < m { &frob } else { &fc };
        for r in 0..d {
            for s in 0..d {
                phi_v.set(blk * d + r, blk * d + s, *block.get(r, s));
            }
        }
    }
    (phi_v, fc)
}

fn assemble_witness(
    g1: &Class2Group,
    d1: &QuotientDescriptor,
    g2: &Class2Group,
    d2: &QuotientDescriptor,
    i: usize,
    c: &[u32],
) -> Result<CheckedIsomorphism, IsoTestError> {
    let (phi_v, phi_k) = heisenberg_automorphism(&d1.field, d1.m, i, c);
    let phi1_inv = d1.phi.inverse().expect("recognition produces an invertible phi");
    let f = phi1_inv.mul(&phi_v).and_then(|x| x.mul(&d2.phi)).expect("shape");
    let fhat = kernel_section(&d1.kernel, &d1.psi)
        .mul(&phi_k)
        .and_then(|x| x.mul(&d2.psi))
        .expect("shape");
    apply_isomorphism(g1, g2, &f, &fhat, None).map_err(|e| IsoTestError::Witness(e.to_string()))
}

/// Exhaustive orbit test: is `N = (M sigma^i) c` for some `i` and `c != 0`?
pub fn oracle_orbit_test(
    k: &FieldCtx,
    m: &Subspace<Fp>,
    n: &Subspace<Fp>,
    limit: u128,
) -> Result<bool, IsoTestError> {
    let required = k.d() as u128 * (k.order() as u128 - 1);
    if required > limit {
        return Err(IsoTestError::Budget { required, limit });
    }
    if m.dim() != n.dim() {
        return Ok(false);
    }
    for i in 0..k.d() {
        let mi = frobenius_subspace(k, m, i);
        for c in k.elements().skip(1) {
            if scale_subspace(k, &mi, &c) == *n {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `|GL(n, p)|`, saturating.
pub fn gl_order(n: usize, p: u32) -> u128 {
    let q = p as u128;
    let pn = q.saturating_pow(n as u32);
    (0..n).fold(1u128, |acc, i| acc.saturating_mul(pn - q.pow(i as u32)))
}

/// Exhaustive pseudo-isometry search for `b1 -> b2`, by backtracking over
/// the rows of `f` with incremental consistency checks on `fhat`.
pub struct PseudoIsometrySearch<'a> {
    b1: &'a Bimap,
    b2: &'a Bimap,
    field: Fp,
    n: usize,
    w: usize,
    alternating: bool,
    all_vectors: Vec<Vec<u32>>,
    pub visited: u64,
}

/// Echelon rows `(x, y)` encoding `x fhat = y`, pivots on `x`.
#[derive(Clone)]
struct Constraints {
    rows: Vec<(usize, Vec<u32>, Vec<u32>)>,
}

impl Constraints {
    /// Adds `x fhat = y`; false on inconsistency.
    fn add(&mut self, field: Fp, mut x: Vec<u32>, mut y: Vec<u32>) -> bool {
        for (piv, rx, ry) in &self.rows {
            let c = x[*piv];
            if c != 0 {
                for (a, b) in x.iter_mut().zip(rx) {
                    *a = field.sub(a, &field.mul(&c, b));
                }
                for (a, b) in y.iter_mut().zip(ry) {
                    *a = field.sub(a, &field.mul(&c, b));
                }
            }
        }
        match x.iter().position(|&a| a != 0) {
            None => y.iter().all(|&a| a == 0),
            Some(piv) => {
                let inv = field.inv(&x[piv]).expect("nonzero");
                for a in x.iter_mut() {
                    *a = field.mul(a, &inv);
                }
                for a in y.iter_mut() {
                    *a = field.mul(a, &inv);
                }
                for (_, rx, ry) in self.rows.iter_mut() {
                    let c = rx[piv];
                    if c != 0 {
                        for (a, b) in rx.iter_mut().zip(&x) {
                            *a = field.sub(a, &field.mul(&c, b));
                        }
                        for (a, b) in ry.iter_mut().zip(&y) {
                            *a = field.sub(a, &field.mul(&c, b));
                        }
                    }
                }
                self.rows.push((piv, x, y));
                true
            }
        }
    }

    /// `fhat` extends to an invertible map exactly when the determined part
    /// is injective.
    fn extends_invertibly(&self, field: Fp, w: usize) -> bool {
        let ys: Vec<Vec<u32>> = self.rows.iter().map(|r| r.2.clone()).collect();
        Mat::from_rows_with_cols(field, w, &ys).expect("shape").rank() == self.rows.len()
    }
}

impl<'a> PseudoIsometrySearch<'a> {
    pub fn new(b1: &'a Bimap, b2: &'a Bimap, limit: u128) -> Result<Option<Self>, IsoTestError> {
        let n = b1.dim_v();
        if b1.dim_u() != n || b2.dim_u() != b2.dim_v() || b2.dim_v() != n || b1.dim_w() != b2.dim_w() || b1.p() != b2.p() {
            return Ok(None);
        }
        let required = gl_order(n, b1.p());
        if required > limit {
            return Err(IsoTestError::Budget { required, limit });
        }
        let p = b1.p();
        let total = (p as u64).pow(n as u32);
        let all_vectors = (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let c = (idx % p as u64) as u32;
                        idx /= p as u64;
                        c
                    })
                    .collect()
            })
            .collect();
        Ok(Some(PseudoIsometrySearch {
            b1,
            b2,
            field: b1.field(),
            n,
            w: b1.dim_w(),
            alternating: b1.is_alternating() && b2.is_alternating(),
            all_vectors,
            visited: 0,
        }))
    }

    fn index_of(&self, v: &[u32]) -> usize {
        let p = self.field.p() as usize;
        v.iter().rev().fold(0, |acc, &c| acc * p + c as usize)
    }

    /// Walks the search tree; `visit` is called on each complete `f` and
    /// returns whether to continue.
    fn walk(
        &mut self,
        rows: &mut Vec<usize>,
        span: &mut Vec<bool>,
        cons: &Constraints,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if rows.len() == self.n {
            if !cons.extends_invertibly(self.field, self.w) {
                return true;
            }
            return visit(rows);
        }
        let i = rows.len();
        let p = self.field.p();
        for cand in 1..self.all_vectors.len() {
            if span[cand] {
                continue;
            }
            self.visited += 1;
            let mut next = cons.clone();
            let mut ok = true;
            let r_new = self.all_vectors[cand].clone();
            for (j, &rj) in rows.iter().enumerate() {
                let rj = &self.all_vectors[rj];
                let pairs: &[(usize, usize, &Vec<u32>, &Vec<u32>)] = &[(j, i, rj, &r_new), (i, j, &r_new, rj)];
                let count = if self.alternating { 1 } else { 2 };
                for &(a, b, ra, rb) in &pairs[..count] {
                    let x = self.b1.get(a, b).to_vec();
                    let y = self.b2.eval_unchecked(ra, rb);
                    if !next.add(self.field, x, y) {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && !self.alternating {
                let x = self.b1.get(i, i).to_vec();
                let y = self.b2.eval_unchecked(&r_new, &r_new);
                ok = next.add(self.field, x, y);
            }
            if !ok {
                continue;
            }
            // extend the span bitmap
            let old = span.clone();
            let members: Vec<usize> = (0..old.len()).filter(|&s| old[s]).collect();
            for s in members {
                let sv = self.all_vectors[s].clone();
                for a in 1..p {
                    let v: Vec<u32> = sv
                        .iter()
                        .zip(&r_new)
                        .map(|(x, y)| self.field.add(x, &self.field.mul(&a, y)))
                        .collect();
                    let idx = self.index_of(&v);
                    span[idx] = true;
                }
            }
            rows.push(cand);
            let cont = self.walk(rows, span, &next, visit);
            rows.pop();
            *span = old;
            if !cont {
                return false;
            }
        }
        true
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let mut span = vec![false; self.all_vectors.len()];
        span[0] = true;
        let mut rows = Vec::with_capacity(self.n);
        self.walk(&mut rows, &mut span, &Constraints { rows: Vec::new() }, visit);
    }

    /// The first pseudo-isometry found, as `f`.
    pub fn find(&mut self) -> Option<Mat<Fp>> {
        let mut found = None;
        let vectors = self.all_vectors.clone();
        let field = self.field;
        let n = self.n;
        self.run(&mut |rows| {
            found = Some(Mat::from_rows_with_cols(field, n, &rows.iter().map(|&r| vectors[r].clone()).collect::<Vec<_>>()).expect("shape"));
            false
        });
        found
    }

    /// Number of invertible `f` admitting an invertible `fhat`. When `b1`
    /// has full image `fhat` is unique, so this is the number of pairs.
    pub fn count(&mut self) -> u64 {
        let mut total = 0u64;
        self.run(&mut |_| {
            total += 1;
            true
        });
        total
    }
}

/// Ground truth: does a pseudo-isometry `b1 -> b2` exist?
pub fn oracle_pseudo_isometry(b1: &Bimap, b2: &Bimap, limit: u128) -> Result<bool, IsoTestError> {
    Ok(match PseudoIsometrySearch::new(b1, b2, limit)? {
        Some(mut s) => s.find().is_some(),
        None => false,
    })
}

/// Size of the pseudo-isometry group of `b` (exhaustive).
pub fn pseudo_isometry_count(b: &Bimap, limit: u128) -> Result<u64, IsoTestError> {
    Ok(PseudoIsometrySearch::new(b, b, limit)?.map_or(0, |mut s| s.count()))
}
