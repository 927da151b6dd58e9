//! Finite fields of odd characteristic.
//!
//! Two field models share the [`Field`] trait so that matrices and
//! subspaces can be written once: [`Fp`] is the prime field `Z/p` with
//! elements stored as `u32`, and [`FieldCtx`] is `GF(p^d)` realized as
//! `Z/p[x]/(f)` for a fixed monic irreducible modulus `f`. The default
//! modulus is the lexicographically smallest one (coefficients compared
//! from the constant term upward), so every serialized element is
//! reproducible.
//!
//! [`FieldElement`] is the ergonomic, context-carrying element type; the
//! raw `Vec<u32>` coefficient vectors are what the generic linear algebra
//! works with.

use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus must be monic of degree {expected}, got {got:?}")]
    BadModulus { expected: usize, got: Vec<u32> },
    #[error("modulus {0:?} is reducible")]
    ReducibleModulus(Vec<u32>),
    #[error("polynomial must be monic and nonzero")]
    NotMonic,
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("coefficient vector has length {got}, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("coefficient {0} is not reduced modulo p")]
    Unreduced(u32),
}

/// A field whose elements are plain values, with all arithmetic routed
/// through the field object.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Image of an integer under `Z -> F`.
    fn from_int(&self, n: i64) -> Self::Elem;
    fn characteristic(&self) -> u32;
    /// Degree over the prime field.
    fn degree(&self) -> usize;
    fn same_field(&self, other: &Self) -> bool;
}

/// The prime field `Z/p`, `p` odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fp {
    p: u32,
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u32;
    while (i as u64) * (i as u64) <= n as u64 {
        if n.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n.is_multiple_of(q) {
            out.push(q);
            while n.is_multiple_of(q) {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Fp {
    pub fn new(p: u32) -> Result<Self, FieldError> {
        if p == 2 || !is_prime(p) || p > 1 << 16 {
            return Err(FieldError::NotOddPrime(p));
        }
        Ok(Fp { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, n: i64) -> u32 {
        n.rem_euclid(self.p as i64) as u32
    }

    /// `1/2 = (p + 1) / 2`.
    pub fn half(&self) -> u32 {
        self.p.div_ceil(2)
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a as u64 % self.p as u64;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p as u64;
            }
            base = base * base % self.p as u64;
            e >>= 1;
        }
        acc as u32
    }
}

impl Field for Fp {
    type Elem = u32;

    #[inline]
    fn zero(&self) -> u32 {
        0
    }
    #[inline]
    fn one(&self) -> u32 {
        1
    }
    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        ((*a as u64 * *b as u64) % self.p as u64) as u32
    }
    fn inv(&self, a: &u32) -> Option<u32> {
        if (*a).is_multiple_of(self.p) {
            None
        } else {
            Some(self.pow(*a, self.p as u64 - 2))
        }
    }
    #[inline]
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn from_int(&self, n: i64) -> u32 {
        self.reduce(n)
    }
    fn characteristic(&self) -> u32 {
        self.p
    }
    fn degree(&self) -> usize {
        1
    }
    fn same_field(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

/// A polynomial over `Z/p`, coefficients in ascending degree, no trailing
/// zeros (the zero polynomial has an empty coefficient list).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Poly {
    p: u32,
    coeffs: Vec<u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn new(p: u32, coeffs: Vec<u32>) -> Self {
        let mut poly = Poly {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        poly.normalize();
        poly
    }

    pub fn zero(p: u32) -> Self {
        Poly { p, coeffs: vec![] }
    }

    pub fn monomial(p: u32, degree: usize) -> Self {
        let mut coeffs = vec![0; degree + 1];
        coeffs[degree] = 1;
        Poly { p, coeffs }
    }

    /// `x`.
    pub fn x(p: u32) -> Self {
        Self::monomial(p, 1)
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    fn fp(&self) -> Fp {
        Fp { p: self.p }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let f = self.fp();
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                f.add(
                    self.coeffs.get(i).unwrap_or(&0),
                    other.coeffs.get(i).unwrap_or(&0),
                )
            })
            .collect();
        Poly::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let f = self.fp();
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                f.sub(
                    self.coeffs.get(i).unwrap_or(&0),
                    other.coeffs.get(i).unwrap_or(&0),
                )
            })
            .collect();
        Poly::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u64 * b as u64) % p;
            }
        }
        Poly::new(self.p, acc.into_iter().map(|c| c as u32).collect())
    }

    pub fn scale(&self, c: u32) -> Poly {
        let f = self.fp();
        Poly::new(self.p, self.coeffs.iter().map(|a| f.mul(a, &c)).collect())
    }

    /// Euclidean division; panics on a zero divisor, which callers never pass.
    pub fn divrem(&self, divisor: &Poly) -> (Poly, Poly) {
        let f = self.fp();
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead_inv = f.inv(&divisor.coeffs[dd]).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(self.p), self.clone());
        }
        let mut quot = vec![0u32; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = f.mul(&rem[k], &lead_inv);
            if c == 0 {
                continue;
            }
            quot[k - dd] = c;
            for (i, &dc) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + i;
                rem[idx] = f.sub(&rem[idx], &f.mul(&c, &dc));
            }
        }
        (Poly::new(self.p, quot), Poly::new(self.p, rem))
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.divrem(divisor).1
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn make_monic(&self) -> Poly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lc) => {
                let inv = self.fp().inv(&lc).expect("nonzero");
                self.scale(inv)
            }
        }
    }

    /// `self^e mod modulus`.
    pub fn pow_mod(&self, mut e: u64, modulus: &Poly) -> Poly {
        let mut base = self.rem(modulus);
        let mut acc = Poly::new(self.p, vec![1]).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(modulus);
            }
            base = base.mul(&base).rem(modulus);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, x: u32) -> u32 {
        let f = self.fp();
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, c| f.add(&f.mul(&acc, &x), c))
    }

    /// Evaluate at a square matrix (Horner).
    pub fn eval_matrix(&self, m: &Mat<Fp>) -> Mat<Fp> {
        let f = self.fp();
        let n = m.rows();
        let mut acc = Mat::zeros(f, n, n);
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(m).expect("square");
            for i in 0..n {
                let v = f.add(acc.get(i, i), &c);
                acc.set(i, i, v);
            }
        }
        acc
    }

    /// Companion matrix acting on row vectors: `e_i -> e_{i+1}`, with the
    /// last row holding `-c_0, ..., -c_{n-1}`.
    pub fn companion(&self) -> Mat<Fp> {
        let f = self.fp();
        let n = self.degree().expect("nonzero polynomial");
        let mut m = Mat::zeros(f, n, n);
        for i in 0..n.saturating_sub(1) {
            m.set(i, i + 1, 1);
        }
        for j in 0..n {
            m.set(n - 1, j, f.neg(&self.coeffs[j]));
        }
        m
    }
}

/// Deterministic irreducibility test: a monic `f` of degree `n` is
/// irreducible iff `x^(p^n) = x mod f` and `gcd(x^(p^(n/q)) - x, f) = 1`
/// for every prime `q | n`.
pub fn is_irreducible(f: &Poly) -> Result<bool, FieldError> {
    if f.is_zero() || !f.is_monic() {
        return Err(FieldError::NotMonic);
    }
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return Err(FieldError::NotMonic);
    }
    if n == 1 {
        return Ok(true);
    }
    let p = f.p();
    let x = Poly::x(p);
    // frob[k] = x^(p^k) mod f
    let mut frob = vec![x.rem(f)];
    for k in 1..=n {
        let next = frob[k - 1].pow_mod(p as u64, f);
        frob.push(next);
    }
    if frob[n] != x.rem(f) {
        return Ok(false);
    }
    for q in prime_factors(n) {
        let h = frob[n / q].sub(&x);
        if h.gcd(f).degree() != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The lexicographically smallest monic irreducible polynomial of degree
/// `d` over `Z/p`, comparing coefficient vectors `[c_0, ..., c_{d-1}]`
/// from `c_0` upward.
pub fn find_irreducible(p: u32, d: usize) -> Result<Poly, FieldError> {
    Fp::new(p)?;
    if d == 0 {
        return Err(FieldError::ZeroDegree);
    }
    let mut digits = vec![0u32; d];
    loop {
        let mut coeffs = digits.clone();
        coeffs.push(1);
        let f = Poly::new(p, coeffs);
        if is_irreducible(&f)? {
            return Ok(f);
        }
        // c_0 is the most significant digit
        let mut k = d;
        loop {
            if k == 0 {
                unreachable!("irreducible polynomials exist in every degree");
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < p {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Minimal polynomial of a square matrix, found as the first power of `m`
/// that is linearly dependent on the lower ones.
pub fn minimal_polynomial(m: &Mat<Fp>) -> Poly {
    let f = *m.field();
    let n = m.rows();
    assert_eq!(n, m.cols(), "minimal polynomial of a non-square matrix");
    let mut powers: Vec<Vec<u32>> = vec![Mat::identity(f, n).into_data()];
    let mut current = Mat::identity(f, n);
    loop {
        current = current.mul(m).expect("square");
        let target = current.data().to_vec();
        // Solve sum a_i powers[i] = target.
        let k = powers.len();
        let mut sys = Mat::zeros(f, n * n, k);
        for (j, pw) in powers.iter().enumerate() {
            for (i, v) in pw.iter().enumerate() {
                sys.set(i, j, *v);
            }
        }
        if let Some((sol, _)) = sys.solve(&target).expect("consistent shapes") {
            let mut coeffs: Vec<u32> = sol.iter().map(|a| f.neg(a)).collect();
            coeffs.push(1);
            return Poly::new(f.p(), coeffs);
        }
        powers.push(target);
    }
}

struct CtxInner {
    fp: Fp,
    d: usize,
    modulus: Poly,
    /// `x^k mod f` for `k = d .. 2d-2`, as length-`d` vectors.
    reduction: Vec<Vec<u32>>,
    frobenius: Vec<Vec<u32>>,
}

/// `GF(p^d)` as `Z/p[x]/(modulus)`. Cheap to clone.
#[derive(Clone)]
pub struct FieldCtx {
    inner: Arc<CtxInner>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF({}^{}) mod {}",
            self.inner.fp.p(),
            self.inner.d,
            self.inner.modulus
        )
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.modulus == other.inner.modulus
    }
}

impl Eq for FieldCtx {}

/// Serialized field descriptor: `{"p": 3, "d": 5, "modulus": [c0, ..., 1]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub d: usize,
    pub modulus: Vec<u32>,
}

impl FieldCtx {
    /// `GF(p^d)` with the canonical (lexicographically smallest) modulus.
    pub fn new(p: u32, d: usize) -> Result<Self, FieldError> {
        let modulus = find_irreducible(p, d)?;
        Self::with_modulus(modulus)
    }

    pub fn with_modulus(modulus: Poly) -> Result<Self, FieldError> {
        let fp = Fp::new(modulus.p())?;
        let d = modulus.degree().ok_or(FieldError::ZeroDegree)?;
        if d == 0 || !modulus.is_monic() {
            return Err(FieldError::BadModulus {
                expected: d.max(1),
                got: modulus.coeffs().to_vec(),
            });
        }
        if !is_irreducible(&modulus)? {
            return Err(FieldError::ReducibleModulus(modulus.coeffs().to_vec()));
        }
        let p = fp.p();
        let mut reduction = Vec::new();
        for k in d..(2 * d).max(d + 1) {
            let r = Poly::monomial(p, k).rem(&modulus);
            let mut v = r.coeffs().to_vec();
            v.resize(d, 0);
            reduction.push(v);
        }
        let mut ctx = CtxInner {
            fp,
            d,
            modulus,
            reduction,
            frobenius: Vec::new(),
        };
        let mut frob = Vec::with_capacity(d);
        for a in 0..d {
            let xa = Poly::monomial(p, a);
            let img = xa.pow_mod(p as u64, &ctx.modulus);
            let mut v = img.coeffs().to_vec();
            v.resize(d, 0);
            frob.push(v);
        }
        ctx.frobenius = frob;
        Ok(FieldCtx {
            inner: Arc::new(ctx),
        })
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self, FieldError> {
        if desc.modulus.len() != desc.d + 1 || desc.modulus.last() != Some(&1) {
            return Err(FieldError::BadModulus {
                expected: desc.d,
                got: desc.modulus.clone(),
            });
        }
        if let Some(&c) = desc.modulus.iter().find(|&&c| c >= desc.p) {
            return Err(FieldError::Unreduced(c));
        }
        let ctx = Self::with_modulus(Poly::new(desc.p, desc.modulus.clone()))?;
        if ctx.d() != desc.d {
            return Err(FieldError::BadModulus {
                expected: desc.d,
                got: desc.modulus.clone(),
            });
        }
        Ok(ctx)
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor {
            p: self.p(),
            d: self.d(),
            modulus: self.inner.modulus.coeffs().to_vec(),
        }
    }

    pub fn p(&self) -> u32 {
        self.inner.fp.p()
    }

    pub fn d(&self) -> usize {
        self.inner.d
    }

    pub fn prime_field(&self) -> Fp {
        self.inner.fp
    }

    pub fn modulus(&self) -> &Poly {
        &self.inner.modulus
    }

    /// `|K|`, saturating at `u64::MAX`.
    pub fn order(&self) -> u64 {
        (self.p() as u64).saturating_pow(self.d() as u32)
    }

    /// Matrix of `a -> a^p` on coefficient row vectors.
    pub fn frobenius_matrix(&self) -> Mat<Fp> {
        Mat::from_rows(self.inner.fp, &self.inner.frobenius).expect("d x d")
    }

    /// Matrix of `a -> a^(p^e)`.
    pub fn frobenius_power_matrix(&self, e: usize) -> Mat<Fp> {
        let f = self.frobenius_matrix();
        let mut acc = Mat::identity(self.inner.fp, self.d());
        for _ in 0..(e % self.d()) {
            acc = acc.mul(&f).expect("square");
        }
        acc
    }

    /// Matrix of `a -> a * c` on coefficient row vectors.
    pub fn mul_matrix(&self, c: &[u32]) -> Mat<Fp> {
        let d = self.d();
        let mut rows = Vec::with_capacity(d);
        let mut xa = vec![0u32; d];
        xa[0] = 1;
        for _ in 0..d {
            rows.push(self.mul(&xa, &c.to_vec()));
            xa = self.mul(&xa, &self.x_raw());
        }
        Mat::from_rows(self.inner.fp, &rows).expect("d x d")
    }

    fn x_raw(&self) -> Vec<u32> {
        let mut v = vec![0u32; self.d()];
        if self.d() > 1 {
            v[1] = 1;
        } else {
            // x reduces to -c_0 in degree one
            v[0] = self.inner.fp.neg(&self.inner.modulus.coeffs()[0]);
        }
        v
    }

    /// The class of `x`, a root of the modulus.
    pub fn generator(&self) -> FieldElement {
        FieldElement {
            ctx: self.clone(),
            coeffs: self.x_raw(),
        }
    }

    pub fn element(&self, coeffs: Vec<u32>) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.d() {
            return Err(FieldError::BadLength {
                expected: self.d(),
                got: coeffs.len(),
            });
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= self.p()) {
            return Err(FieldError::Unreduced(c));
        }
        Ok(FieldElement {
            ctx: self.clone(),
            coeffs,
        })
    }

    pub fn from_prime(&self, a: u32) -> FieldElement {
        let mut coeffs = vec![0; self.d()];
        coeffs[0] = a % self.p();
        FieldElement {
            ctx: self.clone(),
            coeffs,
        }
    }

    /// All elements in base-`p` counting order of their coefficient vectors
    /// (`c_0` least significant).
    pub fn elements(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        let p = self.p();
        let d = self.d();
        (0..self.order()).map(move |mut n| {
            (0..d)
                .map(|_| {
                    let c = (n % p as u64) as u32;
                    n /= p as u64;
                    c
                })
                .collect()
        })
    }

    pub fn pow_raw(&self, a: &[u32], mut e: u64) -> Vec<u32> {
        let mut base = a.to_vec();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn frobenius_raw(&self, a: &[u32], e: usize) -> Vec<u32> {
        let f = self.inner.fp;
        let mut cur = a.to_vec();
        for _ in 0..(e % self.d()) {
            let mut next = vec![0u32; self.d()];
            for (i, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (j, &r) in self.inner.frobenius[i].iter().enumerate() {
                    next[j] = f.add(&next[j], &f.mul(&c, &r));
                }
            }
            cur = next;
        }
        cur
    }

    /// Roots of a polynomial over this field given by coefficients in
    /// ascending degree. Equal-degree splitting with a seeded generator,
    /// so the output is deterministic.
    pub fn roots(&self, coeffs: &[Vec<u32>], seed: u64) -> Vec<Vec<u32>> {
        let poly = KPoly::new(self, coeffs.to_vec());
        let q = self.order();
        // restrict to the product of linear factors: gcd(f, y^q - y)
        let y = KPoly::new(self, vec![self.zero(), self.one()]);
        let yq = y.pow_mod(q, &poly);
        let split = poly.gcd(&yq.sub(&y));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut stack = vec![split];
        while let Some(g) = stack.pop() {
            match g.degree() {
                None | Some(0) => continue,
                Some(1) => {
                    let g = g.monic();
                    out.push(self.neg(&g.coeffs[0]));
                    continue;
                }
                Some(dg) => loop {
                    let r: Vec<Vec<u32>> = (0..dg)
                        .map(|_| (0..self.d()).map(|_| rng.gen_range(0..self.p())).collect())
                        .collect();
                    let rpoly = KPoly::new(self, r);
                    if rpoly.degree().unwrap_or(0) == 0 {
                        continue;
                    }
                    let h = rpoly.pow_mod((q - 1) / 2, &g).sub(&KPoly::new(self, vec![self.one()]));
                    let c = g.gcd(&h);
                    let dc = c.degree().unwrap_or(0);
                    if dc > 0 && dc < dg {
                        let (quot, _) = g.divrem(&c);
                        stack.push(c);
                        stack.push(quot);
                        break;
                    }
                },
            }
        }
        out.sort();
        out
    }
}

impl Field for FieldCtx {
    type Elem = Vec<u32>;

    fn zero(&self) -> Vec<u32> {
        vec![0; self.d()]
    }
    fn one(&self) -> Vec<u32> {
        let mut v = vec![0; self.d()];
        v[0] = 1;
        v
    }
    fn add(&self, a: &Vec<u32>, b: &Vec<u32>) -> Vec<u32> {
        let f = self.inner.fp;
        a.iter().zip(b).map(|(x, y)| f.add(x, y)).collect()
    }
    fn sub(&self, a: &Vec<u32>, b: &Vec<u32>) -> Vec<u32> {
        let f = self.inner.fp;
        a.iter().zip(b).map(|(x, y)| f.sub(x, y)).collect()
    }
    fn neg(&self, a: &Vec<u32>) -> Vec<u32> {
        let f = self.inner.fp;
        a.iter().map(|x| f.neg(x)).collect()
    }
    fn mul(&self, a: &Vec<u32>, b: &Vec<u32>) -> Vec<u32> {
        let d = self.d();
        let p = self.p() as u64;
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let mut out: Vec<u64> = prod[..d].to_vec();
        for k in d..2 * d - 1 {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (j, &r) in self.inner.reduction[k - d].iter().enumerate() {
                out[j] = (out[j] + c * r as u64) % p;
            }
        }
        out.into_iter().map(|c| c as u32).collect()
    }
    fn inv(&self, a: &Vec<u32>) -> Option<Vec<u32>> {
        if a.iter().all(|&c| c == 0) {
            return None;
        }
        Some(self.pow_raw(a, self.order() - 2))
    }
    fn is_zero(&self, a: &Vec<u32>) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn from_int(&self, n: i64) -> Vec<u32> {
        let mut v = vec![0; self.d()];
        v[0] = self.inner.fp.reduce(n);
        v
    }
    fn characteristic(&self) -> u32 {
        self.p()
    }
    fn degree(&self) -> usize {
        self.d()
    }
    fn same_field(&self, other: &Self) -> bool {
        self == other
    }
}

/// Dense univariate polynomial over an extension field; only what root
/// finding needs.
#[derive(Clone, Debug)]
struct KPoly<'a> {
    k: &'a FieldCtx,
    coeffs: Vec<Vec<u32>>,
}

impl<'a> KPoly<'a> {
    fn new(k: &'a FieldCtx, coeffs: Vec<Vec<u32>>) -> Self {
        let mut out = KPoly { k, coeffs };
        while out.coeffs.last().is_some_and(|c| k.is_zero(c)) {
            out.coeffs.pop();
        }
        out
    }

    fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn monic(&self) -> Self {
        let lc = self.coeffs.last().expect("nonzero");
        let inv = self.k.inv(lc).expect("nonzero leading coefficient");
        KPoly::new(self.k, self.coeffs.iter().map(|c| self.k.mul(c, &inv)).collect())
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = self.k.zero();
        KPoly::new(
            self.k,
            (0..n)
                .map(|i| {
                    self.k.sub(
                        self.coeffs.get(i).unwrap_or(&zero),
                        other.coeffs.get(i).unwrap_or(&zero),
                    )
                })
                .collect(),
        )
    }

    fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return KPoly::new(self.k, vec![]);
        }
        let mut out = vec![self.k.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = self.k.add(&out[i + j], &self.k.mul(a, b));
            }
        }
        KPoly::new(self.k, out)
    }

    fn divrem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("nonzero divisor");
        let lead_inv = self.k.inv(&divisor.coeffs[dd]).expect("nonzero");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (KPoly::new(self.k, vec![]), self.clone());
        }
        let mut quot = vec![self.k.zero(); rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = self.k.mul(&rem[top], &lead_inv);
            if self.k.is_zero(&c) {
                continue;
            }
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = self.k.sub(&rem[idx], &self.k.mul(&c, dc));
            }
            quot[top - dd] = c;
        }
        (KPoly::new(self.k, quot), KPoly::new(self.k, rem))
    }

    fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while b.degree().is_some() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        if a.degree().is_some() {
            a.monic()
        } else {
            a
        }
    }

    fn pow_mod(&self, mut e: u64, modulus: &Self) -> Self {
        let mut base = self.divrem(modulus).1;
        let mut acc = KPoly::new(self.k, vec![self.k.one()]);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).divrem(modulus).1;
            }
            base = base.mul(&base).divrem(modulus).1;
            e >>= 1;
        }
        acc
    }
}

/// An element of `GF(p^d)` tied to its context. Mixing contexts is an
/// error, not a panic.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    ctx: FieldCtx,
    coeffs: Vec<u32>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Poly::new(self.ctx.p(), self.coeffs.clone()))
    }
}

impl FieldElement {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u32> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.ctx.is_zero(&self.coeffs)
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch)
        }
    }

    fn wrap(&self, coeffs: Vec<u32>) -> FieldElement {
        FieldElement {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.add(&self.coeffs, &other.coeffs)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.sub(&self.coeffs, &other.coeffs)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check(other)?;
        Ok(self.wrap(self.ctx.mul(&self.coeffs, &other.coeffs)))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.ctx.neg(&self.coeffs))
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        self.ctx
            .inv(&self.coeffs)
            .map(|c| self.wrap(c))
            .ok_or(FieldError::ZeroInverse)
    }

    pub fn pow(&self, e: u64) -> Self {
        self.wrap(self.ctx.pow_raw(&self.coeffs, e))
    }

    /// `a -> a^(p^e)`.
    pub fn frobenius(&self, e: usize) -> Self {
        self.wrap(self.ctx.frobenius_raw(&self.coeffs, e))
    }

    /// Membership in the subfield of order `p^e`; `None` when `e` does not
    /// divide the degree.
    pub fn in_subfield(&self, e: usize) -> Option<bool> {
        if e == 0 || !self.ctx.d().is_multiple_of(e) {
            return None;
        }
        Some(self.frobenius(e) == *self)
    }
}
