//! Invariants that fail to tell quotients of Heisenberg groups apart: the
//! Camina property, class sizes, the character-table pair, indecomposability
//! and the shape of the automorphism group.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bimap::Bimap;
use crate::centroid::{compute_centroid, CentroidError};
use crate::ff::{FieldCtx, Fp};
use crate::group::{CertificationFailure, Class2Group};
use crate::isotest::{frobenius_subspace, subspace_scale_solver};
use crate::linalg::{Mat, Subspace};
use crate::recognize::{recognize, QuotientDescriptor};

/// Largest `p^dim V` for which Camina and class data sweep every `u`.
pub const EXHAUSTIVE_LIMIT: u64 = 59_049;
const RANDOM_PROBES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("group is not certified class 2 with G' = Z(G): {0}")]
    NotCertified(#[from] CertificationFailure),
    #[error(transparent)]
    Centroid(#[from] CentroidError),
    #[error("group is not indigenous to a Heisenberg group: {0}")]
    NotIndigenous(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Sampled,
}

/// Rank of `v -> b(u, v)`.
pub fn pairing_rank(b: &Bimap, u: &[u32]) -> usize {
    let rows: Vec<Vec<u32>> = (0..b.dim_v())
        .map(|j| {
            let mut e = vec![0; b.dim_v()];
            e[j] = 1;
            b.eval_unchecked(u, &e)
        })
        .collect();
    Mat::from_rows_with_cols(b.field(), b.dim_w(), &rows).expect("shape").rank()
}

fn vector_at(p: u32, n: usize, mut idx: u64) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let c = (idx % p as u64) as u32;
            idx /= p as u64;
            c
        })
        .collect()
}

fn space_size(p: u32, n: usize) -> Option<u64> {
    (p as u64).checked_pow(n as u32)
}

/// Histogram `rank -> number of u in V` with that pairing rank, over every
/// `u` or over probes.
fn rank_histogram(b: &Bimap, seed: u64) -> (BTreeMap<usize, u64>, Method) {
    let p = b.p();
    let n = b.dim_v();
    let mut hist = BTreeMap::new();
    match space_size(p, n).filter(|&t| t <= EXHAUSTIVE_LIMIT) {
        Some(total) => {
            for idx in 0..total {
                *hist.entry(pairing_rank(b, &vector_at(p, n, idx))).or_insert(0) += 1;
            }
            (hist, Method::Exhaustive)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut probes: Vec<Vec<u32>> = Mat::identity(b.field(), n).row_vecs();
            for i in 0..n {
                for j in i + 1..n {
                    let mut v = vec![0; n];
                    v[i] = 1;
                    v[j] = 1;
                    probes.push(v);
                }
            }
            probes.extend((0..RANDOM_PROBES).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()));
            for u in probes.iter().filter(|u| u.iter().any(|&c| c != 0)) {
                *hist.entry(pairing_rank(b, u)).or_insert(0) += 1;
            }
            (hist, Method::Sampled)
        }
    }
}

/// Every nonzero `u` pairs onto all of `W`.
pub fn is_camina(g: &Class2Group, seed: u64) -> (bool, Method) {
    let b = g.bimap();
    let (hist, method) = rank_histogram(b, seed);
    let ok = hist.iter().all(|(&r, &count)| r == b.dim_w() || (r == 0 && count <= 1 && method == Method::Exhaustive))
        && !b.is_zero();
    (ok, method)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassSizeEntry {
    /// Class size `p^size_log`.
    pub size_log: usize,
    pub classes: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassData {
    /// Centralizer order of a noncentral element, as a power of `p`, when all
    /// agree.
    pub noncentral_centralizer_log: Option<usize>,
    /// Class sizes with multiplicities.
    pub classes: Vec<ClassSizeEntry>,
    pub method: Method,
}

/// Centralizer orders from ranks: `|C_G(u; s)| = p^(dim V - rank(u) + dim W)`
/// and the class of `(u; s)` has `p^rank(u)` elements.
pub fn class_data(g: &Class2Group, seed: u64) -> ClassData {
    let b = g.bimap();
    let (dv, dw) = (g.dim_v(), g.dim_w());
    let p = BigUint::from(g.p());
    let (mut hist, method) = rank_histogram(b, seed);
    if method == Method::Sampled {
        // Ranks seen on probes stand in for the whole space. With a single
        // nonzero rank (the Camina case) the multiset is then exact.
        let nonzero: Vec<usize> = hist.keys().copied().filter(|&r| r > 0).collect();
        hist.clear();
        hist.insert(0, 1);
        if let [r] = nonzero[..] {
            hist.insert(r, space_size(g.p(), dv).map_or(u64::MAX, |t| t - 1));
        }
    }
    let noncentral: Vec<usize> = hist.keys().copied().filter(|&r| r > 0).collect();
    let noncentral_centralizer_log = match noncentral[..] {
        [r] => Some(dv - r + dw),
        _ => None,
    };
    let classes = hist
        .iter()
        .map(|(&r, &us)| {
            // each u gives p^dw elements, in classes of size p^r
            let count = BigUint::from(us) * p.pow(dw as u32) / p.pow(r as u32);
            ClassSizeEntry { size_log: r, classes: count.to_string() }
        })
        .collect();
    ClassData { noncentral_centralizer_log, classes, method }
}

/// Brute-force centralizer orders, element by element. Only for tiny groups.
pub fn brute_force_centralizers(g: &Class2Group) -> BTreeMap<usize, usize> {
    let elements: Vec<_> = g.elements().collect();
    let mut hist = BTreeMap::new();
    for x in &elements {
        let c = elements
            .iter()
            .filter(|y| g.multiply(x, y).unwrap() == g.multiply(y, x).unwrap())
            .count();
        *hist.entry(c).or_insert(0) += 1;
    }
    hist
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterInvariant {
    /// `[G:G']` as a power of `p`.
    pub abelianization_log: usize,
    /// `|G'|` as a power of `p`.
    pub derived_log: usize,
    /// The pair determines the character table only for Camina groups.
    pub determines_character_table: bool,
}

pub fn character_invariant(g: &Class2Group, camina: bool) -> CharacterInvariant {
    let derived_log = g.bimap().image().dim();
    CharacterInvariant {
        abelianization_log: g.log_order() - derived_log,
        derived_log,
        determines_character_table: camina,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CentralDecomposition {
    pub indecomposable: bool,
    /// Number of factors in a fully refined central decomposition.
    pub factors: usize,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Indecomposability {
    pub direct: bool,
    pub direct_method: Method,
    pub central: Option<CentralDecomposition>,
}

/// Direct factors of a certified group correspond to idempotents of its
/// centroid. A field has none; otherwise a probe that is neither nilpotent
/// nor a unit exhibits one.
pub fn is_directly_indecomposable(g: &Class2Group, seed: u64) -> Result<(bool, Method), InvariantError> {
    let cent = compute_centroid(g.bimap())?;
    if cent.is_field(seed)?.is_field() {
        return Ok((true, Method::Exhaustive));
    }
    let alg = cent.algebra();
    let f = alg.field();
    let p = f.p();
    let dim = alg.dim();
    let size = alg.basis()[0].rows();
    let one = Mat::identity(f, size);
    let splits = |a: &Mat<Fp>| {
        (0..p).any(|lambda| {
            let x = a.sub(&one.scale(&lambda)).expect("square");
            if x.is_invertible() {
                return false;
            }
            let mut pow = x.clone();
            for _ in 0..size {
                pow = pow.mul(&x).expect("square");
            }
            !pow.is_zero()
        })
    };
    match space_size(p, dim).filter(|&t| t <= EXHAUSTIVE_LIMIT) {
        Some(total) => {
            let split = (0..total).any(|idx| splits(&alg.combination(&vector_at(p, dim, idx))));
            Ok((!split, Method::Exhaustive))
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let split = alg.basis().iter().any(&splits)
                || (0..RANDOM_PROBES).any(|_| {
                    let c: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..p)).collect();
                    splits(&alg.combination(&c))
                });
            // no splitting probe found: local, unless the sample missed
            Ok((!split, if split { Method::Exhaustive } else { Method::Sampled }))
        }
    }
}

/// Direct indecomposability from the centroid, central from the floor.
pub fn indecomposability_flags(g: &Class2Group, seed: u64) -> Result<Indecomposability, InvariantError> {
    g.certify()?;
    let (direct, direct_method) = is_directly_indecomposable(g, seed)?;
    let central = recognize(g).ok().as_ref().map(central_decomposition);
    Ok(Indecomposability { direct, direct_method, central })
}

pub fn central_decomposition(desc: &QuotientDescriptor) -> CentralDecomposition {
    CentralDecomposition {
        indecomposable: desc.m == 1,
        factors: desc.m,
        kind: serde_json::to_value(desc.involution)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default(),
    }
}

/// `|Sp(2m, q)| = q^(m^2) prod_{i=1..m} (q^(2i) - 1)` with `q = p^d`.
pub fn symplectic_order(m: usize, p: u32, d: usize) -> BigUint {
    let q = BigUint::from(p).pow(d as u32);
    let mut order = q.pow((m * m) as u32);
    for i in 1..=m {
        order *= q.pow(2 * i as u32) - 1u32;
    }
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AutComponents {
    /// `|Sp(2m, K)|`.
    pub symplectic_order: String,
    /// The hom part has order `p^hom_part_log`.
    pub hom_part_log: usize,
    /// `|Gal(K)| * (|K| - 1)`, bounding `Aut G / C(G')`.
    pub quotient_order_bound: String,
    /// Pairs `(e, f)` with `e | d` and `f | gcd(n, d)`: the top quotient is
    /// `Z_e x| GF(p^f)^x` for one of them.
    pub quotient_shapes: Vec<(usize, usize)>,
    /// The pair realized by this kernel, when computed.
    pub exact_shape: Option<(usize, usize)>,
}

/// `{s in K : M s <= M}` as a subspace of `K`; a subfield.
pub fn kernel_multiplier_field(k: &FieldCtx, m: &Subspace<Fp>) -> Subspace<Fp> {
    let f = k.prime_field();
    let d = k.d();
    if m.dim() == 0 || m.dim() == d {
        return Subspace::full(f, d);
    }
    let q = m.quotient_map();
    let blocks: Vec<Mat<Fp>> = m.basis_vecs().iter().map(|v| k.mul_matrix(v).mul(&q).expect("shape")).collect();
    let mut sys = blocks[0].clone();
    for b in &blocks[1..] {
        sys = sys.hstack(b).expect("shape");
    }
    Subspace::span(f, d, &sys.left_kernel()).expect("shape")
}

/// `(e, f)` for a kernel `M`: `e` counts the Frobenius powers that map `M`
/// to a scalar multiple of itself and `p^f` is the size of its multiplier
/// field.
pub fn exact_quotient_shape(k: &FieldCtx, m: &Subspace<Fp>) -> (usize, usize) {
    let e = (0..k.d())
        .filter(|&i| subspace_scale_solver(k, &frobenius_subspace(k, m, i), m).is_some())
        .count();
    (e, kernel_multiplier_field(k, m).dim())
}

pub fn aut_components(desc: &QuotientDescriptor, log_order: usize, exact: bool) -> AutComponents {
    let (p, d, m) = (desc.p(), desc.d(), desc.m);
    let n = log_order;
    let g = n.gcd(&d);
    let divisors = |x: usize| (1..=x).filter(move |i| x.is_multiple_of(*i));
    let quotient_shapes = divisors(d).flat_map(|e| divisors(g).map(move |f| (e, f))).collect();
    let q = BigUint::from(p).pow(d as u32);
    AutComponents {
        symplectic_order: symplectic_order(m, p, d).to_string(),
        hom_part_log: 2 * m * d * (n - 2 * m * d),
        quotient_order_bound: (BigUint::from(d) * (q - 1u32)).to_string(),
        quotient_shapes,
        exact_shape: exact.then(|| exact_quotient_shape(&desc.field, &desc.kernel)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Floor {
    pub m: usize,
    pub p: u32,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantProfile {
    pub p: u32,
    pub log_order: usize,
    pub order: String,
    pub exponent: u32,
    pub derived_log: usize,
    pub abelianization_log: usize,
    pub is_camina: bool,
    pub camina_method: Method,
    pub class_data: ClassData,
    pub character_invariant: CharacterInvariant,
    pub indecomposability: Indecomposability,
    pub floor: Option<Floor>,
    pub aut: Option<AutComponents>,
}

impl InvariantProfile {
    /// The fields that the indistinguishability statement covers.
    pub fn indistinguishable_from(&self, other: &InvariantProfile) -> bool {
        self.p == other.p
            && self.log_order == other.log_order
            && self.exponent == other.exponent
            && self.is_camina == other.is_camina
            && self.class_data.classes == other.class_data.classes
            && self.character_invariant == other.character_invariant
            && self.indecomposability.direct == other.indecomposability.direct
            && self.indecomposability.central.as_ref().map(|c| c.indecomposable)
                == other.indecomposability.central.as_ref().map(|c| c.indecomposable)
    }
}

/// Exponent of `G`. For odd `p` and class 2 the `p`-th power map is a
/// homomorphism, so generators decide it.
pub fn exponent(g: &Class2Group) -> u32 {
    let gens = (0..g.dim_v() + g.dim_w()).map(|i| {
        let mut u = vec![0; g.dim_v()];
        let mut s = vec![0; g.dim_w()];
        if i < g.dim_v() {
            u[i] = 1;
        } else {
            s[i - g.dim_v()] = 1;
        }
        g.element(u, s).expect("shape")
    });
    let mut nontrivial = false;
    for x in gens {
        nontrivial = true;
        if g.power(&x, g.p() as i64) != g.identity() {
            // not reachable for Baer groups, kept as a guard
            return 0;
        }
    }
    if nontrivial {
        g.p()
    } else {
        1
    }
}

pub fn profile(g: &Class2Group, seed: u64) -> Result<InvariantProfile, InvariantError> {
    g.certify()?;
    let (camina, camina_method) = is_camina(g, seed);
    let character = character_invariant(g, camina);
    let (direct, direct_method) = is_directly_indecomposable(g, seed)?;
    let desc = recognize(g).ok();
    let central = desc.as_ref().map(central_decomposition);
    let floor = desc.as_ref().map(|x| Floor { m: x.m, p: x.p(), d: x.d() });
    let aut = desc.as_ref().map(|x| aut_components(x, g.log_order(), true));
    Ok(InvariantProfile {
        p: g.p(),
        log_order: g.log_order(),
        order: BigUint::from(g.p()).pow(g.log_order() as u32).to_string(),
        exponent: exponent(g),
        derived_log: character.derived_log,
        abelianization_log: character.abelianization_log,
        is_camina: camina,
        camina_method,
        class_data: class_data(g, seed),
        character_invariant: character,
        indecomposability: Indecomposability { direct, direct_method, central },
        floor,
        aut,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bimap::standard_symplectic;

    fn f3() -> Fp {
        Fp::new(3).unwrap()
    }

    #[test]
    fn heisenberg_is_camina() {
        for (m, d) in [(1, 1), (1, 2), (2, 1), (1, 3)] {
            let g = Class2Group::heisenberg(m, &FieldCtx::new(3, d).unwrap());
            assert_eq!(is_camina(&g, 0), (true, Method::Exhaustive));
        }
    }

    #[test]
    fn perp_sum_into_separate_centers_is_not_camina() {
        let j = standard_symplectic(1, &FieldCtx::new(3, 1).unwrap());
        let g = Class2Group::from_bimap(j.direct_sum(&j).unwrap()).unwrap();
        assert!(!is_camina(&g, 0).0);
        let (direct, method) = is_directly_indecomposable(&g, 0).unwrap();
        assert!(!direct);
        assert_eq!(method, Method::Exhaustive);
    }

    #[test]
    fn symplectic_orders() {
        assert_eq!(symplectic_order(1, 3, 1), BigUint::from(24u32));
        assert_eq!(symplectic_order(1, 3, 2), BigUint::from(720u32));
        assert_eq!(symplectic_order(2, 3, 1), BigUint::from(51_840u32));
    }

    #[test]
    fn class_data_of_heisenberg_over_gf9() {
        let g = Class2Group::heisenberg(1, &FieldCtx::new(3, 2).unwrap());
        let cd = class_data(&g, 0);
        assert_eq!(cd.noncentral_centralizer_log, Some(4));
        assert_eq!(
            cd.classes,
            vec![
                ClassSizeEntry { size_log: 0, classes: "9".into() },
                ClassSizeEntry { size_log: 2, classes: "80".into() }
            ]
        );
        let ci = character_invariant(&g, true);
        assert_eq!((ci.abelianization_log, ci.derived_log), (4, 2));
    }

    #[test]
    fn multiplier_field_of_kernels() {
        let k = FieldCtx::new(3, 4).unwrap();
        // GF(9) inside GF(81) is stable under itself
        let sub = Subspace::span(f3(), 4, &k.elements().filter(|x| k.frobenius_power_matrix(2).vec_mul(x).unwrap() == *x).collect::<Vec<_>>()).unwrap();
        assert_eq!(sub.dim(), 2);
        assert_eq!(kernel_multiplier_field(&k, &sub), sub);
        let line = Subspace::span(f3(), 4, &[vec![1, 0, 0, 0]]).unwrap();
        assert_eq!(kernel_multiplier_field(&k, &line).dim(), 1);
        assert_eq!(exact_quotient_shape(&k, &line), (4, 1));
    }

    #[test]
    fn exponent_is_p() {
        let g = Class2Group::heisenberg(1, &FieldCtx::new(5, 1).unwrap());
        assert_eq!(exponent(&g), 5);
    }
}
