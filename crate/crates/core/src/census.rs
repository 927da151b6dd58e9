//! Counting isomorphism classes of quotients `H_1(K)/M` by enumerating
//! kernels `M` and bucketing them by orbit under `Gal(K) x| K^x`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::Config;
use crate::ff::{FieldCtx, Fp};
use crate::group::Class2Group;
use crate::invariants::{profile, Floor, InvariantProfile};
use crate::isotest::iso_test_descriptors;
use crate::linalg::{gaussian_binomial, Mat, Subspace, SubspaceEnumerator};
use crate::recognize::{recognize, QuotientDescriptor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("good pairs start at n = 12, got {0}")]
    SmallN(usize),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("needs {required} {what}, budget is {budget}")]
    Budget { what: &'static str, required: String, budget: u64 },
    #[error("recognition failed on a representative: {0}")]
    Recognition(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GoodPair {
    pub n: usize,
    pub d: usize,
    /// `2d + 2 <= n <= 3d`.
    pub bounds: bool,
    /// No `i` with `n - 2d <= i < d` divides `d`.
    pub divisibility: bool,
    /// `12 d - 5 n`, which stays bounded.
    pub drift: i64,
}

impl GoodPair {
    pub fn verified(&self) -> bool {
        self.bounds && self.divisibility
    }
}

fn good_pair_d(n: usize) -> usize {
    match n {
        12..=15 => 5,
        16..=21 => 7,
        22..=23 => 8,
        24..=33 => 11,
        34..=39 => 13,
        40..=57 => 19,
        58..=59 => 23,
        _ => {
            let q = n / 12;
            (1..=4)
                .map(|e| 5 * q + e)
                .find(|d| [1, 7, 11, 17, 23, 29].contains(&(d % 30)))
                .expect("5q mod 30 is a multiple of 5, so some e in 1..=4 works")
        }
    }
}

/// `(n, d)` with `2d + 2 <= n <= 3d` and no divisor of `d` in `[n - 2d, d)`.
pub fn good_pair(n: usize) -> Result<GoodPair, CensusError> {
    if n < 12 {
        return Err(CensusError::SmallN(n));
    }
    let d = good_pair_d(n);
    Ok(GoodPair {
        n,
        d,
        bounds: 2 * d + 2 <= n && n <= 3 * d,
        divisibility: (n.saturating_sub(2 * d)..d).all(|i| i == 0 || !d.is_multiple_of(i)),
        drift: 12 * d as i64 - 5 * n as i64,
    })
}

/// `p^(s(d-s)) / (d (p^d - 1))`.
pub fn lower_bound(p: u32, d: usize, s: usize) -> BigRational {
    let num = BigInt::from(p).pow((s * (d - s)) as u32);
    let den = BigInt::from(d) * (BigInt::from(p).pow(d as u32) - 1);
    BigRational::new(num, den)
}

/// The same bound for the group acting effectively: prime-field scalars fix
/// every subspace.
pub fn effective_lower_bound(p: u32, d: usize, s: usize) -> BigRational {
    lower_bound(p, d, s) * BigRational::from_integer(BigInt::from(p - 1))
}

/// `Gal(K) x| K^x` acting on subspaces of `K`, one matrix per element modulo
/// prime-field scalars.
pub struct OrbitAction {
    field: FieldCtx,
    elements: Vec<(usize, Vec<u32>, Mat<Fp>)>,
}

impl OrbitAction {
    pub fn new(k: &FieldCtx, max_field_order: u64) -> Result<Self, CensusError> {
        let order = k.order();
        if order > max_field_order {
            return Err(CensusError::Budget { what: "field elements", required: order.to_string(), budget: max_field_order });
        }
        let scalars: Vec<(Vec<u32>, Mat<Fp>)> = k
            .elements()
            .filter(|c| c.iter().rev().find(|&&x| x != 0) == Some(&1))
            .map(|c| {
                let m = k.mul_matrix(&c);
                (c, m)
            })
            .collect();
        let mut elements = Vec::with_capacity(k.d() * scalars.len());
        for i in 0..k.d() {
            let frob = k.frobenius_power_matrix(i);
            for (c, mul) in &scalars {
                elements.push((i, c.clone(), frob.mul(mul).expect("square")));
            }
        }
        Ok(OrbitAction { field: k.clone(), elements })
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    /// Number of matrices, `d (p^d - 1) / (p - 1)`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The least image of `m` in echelon order.
    pub fn canonical(&self, m: &Subspace<Fp>) -> Subspace<Fp> {
        self.elements
            .iter()
            .map(|(_, _, g)| m.image_under(g).expect("ambient d"))
            .min()
            .expect("the identity is an element")
    }

    pub fn orbit(&self, m: &Subspace<Fp>) -> BTreeSet<Subspace<Fp>> {
        self.elements.iter().map(|(_, _, g)| m.image_under(g).expect("ambient d")).collect()
    }

    /// `(m sigma^i) c` for the `idx`-th element, with its `(i, c)`.
    pub fn apply(&self, idx: usize, m: &Subspace<Fp>) -> (usize, Vec<u32>, Subspace<Fp>) {
        let (i, c, g) = &self.elements[idx];
        (*i, c.clone(), m.image_under(g).expect("ambient d"))
    }
}

/// Least element of the orbit of `m` under `Gal(K) x| K^x`.
pub fn orbit_canonical(k: &FieldCtx, m: &Subspace<Fp>, max_field_order: u64) -> Result<Subspace<Fp>, CensusError> {
    Ok(OrbitAction::new(k, max_field_order)?.canonical(m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitEntry {
    /// Echelon basis of the canonical kernel.
    pub representative: Vec<Vec<u32>>,
    pub size: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusChecks {
    pub sizes_sum_to_count: bool,
    pub sizes_divide_group_order: bool,
    pub prime_scalars_act_trivially: bool,
    pub meets_lower_bound: bool,
    pub meets_effective_bound: bool,
}

impl CensusChecks {
    pub fn all(&self) -> bool {
        self.sizes_sum_to_count
            && self.sizes_divide_group_order
            && self.prime_scalars_act_trivially
            && self.meets_lower_bound
            && self.meets_effective_bound
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Validation {
    /// Floor of `H_1(K)/M` for each representative.
    pub floors: Vec<Floor>,
    /// Whether every floor is `H_1(K)` itself.
    pub all_indigenous: bool,
    /// Whether `(n, d)` is a good pair, in which case indigenousness is
    /// guaranteed.
    pub indigenous_expected: bool,
    pub inter_orbit_pairs: usize,
    pub inter_orbit_nonisomorphic: usize,
    pub intra_orbit_pairs: usize,
    pub intra_orbit_isomorphic: usize,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.inter_orbit_pairs == self.inter_orbit_nonisomorphic
            && self.intra_orbit_pairs == self.intra_orbit_isomorphic
            && (!self.indigenous_expected || self.all_indigenous)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub p: u32,
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub subspace_count: String,
    pub orbit_count: usize,
    /// `p^(s(d-s)) / (d (p^d - 1))`, reduced.
    pub lower_bound: String,
    pub lower_bound_ceil: String,
    /// Same, times `p - 1`.
    pub effective_lower_bound: String,
    /// `ceil(subspace_count / (d (p^d - 1) / (p - 1)))`.
    pub effective_count_bound: String,
    pub good_pair: bool,
    pub orbits: Vec<OrbitEntry>,
    pub checks: CensusChecks,
    pub validation: Option<Validation>,
    pub profiles: Option<Vec<InvariantProfile>>,
}

#[derive(Clone, Debug, Default)]
pub struct CensusOptions {
    pub config: Config,
    /// Pairs of representatives (and orbit members) pushed through
    /// `iso_test`; all pairs when there are at most this many.
    pub validate_pairs: usize,
    pub with_invariants: bool,
}

fn ceil(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Enumerates all `(d - s)`-dimensional kernels of `K = GF(p^d)` and buckets
/// them by canonical orbit representative.
pub fn run_census(p: u32, d: usize, s: usize, opts: &CensusOptions) -> Result<CensusReport, CensusError> {
    if s > d {
        return Err(CensusError::Params(format!("s = {s} exceeds d = {d}")));
    }
    let k = FieldCtx::new(p, d).map_err(|e| CensusError::Params(e.to_string()))?;
    let f = k.prime_field();
    let budget = opts.config.max_subspaces;
    let count = gaussian_binomial(d, d - s, p as u64);
    if count > BigUint::from(budget) {
        return Err(CensusError::Budget { what: "subspaces", required: count.to_string(), budget });
    }
    let action = OrbitAction::new(&k, opts.config.max_field_order)?;
    let en = SubspaceEnumerator::new(f, d, d - s, budget).map_err(|e| CensusError::Params(e.to_string()))?;
    let total = en.total();

    let chunks = (rayon::current_num_threads() as u64 * 8).max(1);
    let step = total.div_ceil(chunks).max(1);
    let starts: Vec<u64> = (0..total).step_by(step as usize).collect();
    let partial: Vec<BTreeMap<Subspace<Fp>, u64>> = starts
        .par_iter()
        .map(|&a| {
            let mut buckets = BTreeMap::new();
            for m in en.range(a, (a + step).min(total)) {
                *buckets.entry(action.canonical(&m)).or_insert(0) += 1;
            }
            buckets
        })
        .collect();
    let mut buckets: BTreeMap<Subspace<Fp>, u64> = BTreeMap::new();
    for part in partial {
        for (key, n) in part {
            *buckets.entry(key).or_insert(0) += n;
        }
    }

    let group_order = d as u64 * (k.order() - 1);
    let effective_order = group_order / (p as u64 - 1);
    let reps: Vec<Subspace<Fp>> = buckets.keys().cloned().collect();
    let lb = lower_bound(p, d, s);
    let elb = effective_lower_bound(p, d, s);
    let orbit_count = BigInt::from(reps.len());
    let count_bound = ceil(&BigRational::new(BigInt::from(total), BigInt::from(effective_order)));
    let checks = CensusChecks {
        sizes_sum_to_count: buckets.values().sum::<u64>() == total,
        sizes_divide_group_order: buckets.values().all(|&n| effective_order.is_multiple_of(n)),
        prime_scalars_act_trivially: reps.iter().all(|m| {
            (1..p).all(|c| {
                let mut v = vec![0; d];
                v[0] = c;
                m.image_under(&k.mul_matrix(&v)).expect("ambient") == *m
            })
        }),
        meets_lower_bound: orbit_count >= ceil(&lb),
        meets_effective_bound: orbit_count >= count_bound,
    };

    let n = 2 * d + s;
    let good = n >= 12 && good_pair(n).map(|g| g.d == d && g.verified()).unwrap_or(false);
    let needs_groups = s > 0 && (opts.validate_pairs > 0 || opts.with_invariants);
    let groups: Vec<Class2Group> = if needs_groups {
        let h = Class2Group::heisenberg(1, &k);
        reps.iter().map(|m| h.quotient_group(m).expect("proper kernel")).collect()
    } else {
        Vec::new()
    };
    let validation = if s > 0 && opts.validate_pairs > 0 {
        Some(validate(&k, &action, &reps, &groups, good, opts)?)
    } else {
        None
    };
    let profiles = if needs_groups && opts.with_invariants {
        let seed = opts.config.seed;
        Some(
            groups
                .par_iter()
                .map(|g| profile(g, seed).map_err(|e| CensusError::Recognition(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };

    Ok(CensusReport {
        p,
        d,
        s,
        n,
        subspace_count: count.to_string(),
        orbit_count: reps.len(),
        lower_bound: lb.to_string(),
        lower_bound_ceil: ceil(&lb).to_string(),
        effective_lower_bound: elb.to_string(),
        effective_count_bound: count_bound.to_string(),
        good_pair: good,
        orbits: buckets
            .iter()
            .map(|(m, &size)| OrbitEntry { representative: m.basis_vecs(), size })
            .collect(),
        checks,
        validation,
        profiles,
    })
}

fn recognize_all(groups: &[Class2Group]) -> Result<Vec<QuotientDescriptor>, CensusError> {
    groups
        .par_iter()
        .map(|g| recognize(g).map_err(|e| CensusError::Recognition(e.to_string())))
        .collect()
}

fn validate(
    k: &FieldCtx,
    action: &OrbitAction,
    reps: &[Subspace<Fp>],
    groups: &[Class2Group],
    good: bool,
    opts: &CensusOptions,
) -> Result<Validation, CensusError> {
    let limit = opts.validate_pairs;
    let descs = recognize_all(groups)?;
    let floors: Vec<Floor> = descs.iter().map(|x| Floor { m: x.m, p: x.p(), d: x.d() }).collect();
    let all_indigenous = descs.iter().all(|x| x.is_floor(1, k.p(), k.d()));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.config.seed);

    let r = reps.len();
    let all_pairs: Vec<(usize, usize)> = (0..r).flat_map(|a| (a + 1..r).map(move |b| (a, b))).collect();
    let inter: Vec<(usize, usize)> = if all_pairs.len() <= limit {
        all_pairs
    } else {
        (0..limit)
            .map(|_| {
                let a = rng.gen_range(0..r);
                let b = (a + rng.gen_range(1..r)) % r;
                (a, b)
            })
            .collect()
    };
    let inter_ok = inter
        .par_iter()
        .filter(|&&(a, b)| {
            matches!(iso_test_descriptors(&groups[a], &descs[a], &groups[b], &descs[b]), Ok(v) if !v.is_isomorphic())
        })
        .count();

    let h = Class2Group::heisenberg(1, k);
    let intra: Vec<(usize, usize)> = (0..limit.min(r)).map(|a| (a, rng.gen_range(0..action.len()))).collect();
    let intra_ok = intra
        .par_iter()
        .filter(|&&(a, idx)| {
            let (_, _, member) = action.apply(idx, &reps[a]);
            let g = h.quotient_group(&member).expect("proper kernel");
            match recognize(&g) {
                Ok(dm) => matches!(iso_test_descriptors(&groups[a], &descs[a], &g, &dm), Ok(v) if v.is_isomorphic()),
                Err(_) => false,
            }
        })
        .count();

    Ok(Validation {
        floors,
        all_indigenous,
        indigenous_expected: good,
        inter_orbit_pairs: inter.len(),
        inter_orbit_nonisomorphic: inter_ok,
        intra_orbit_pairs: intra.len(),
        intra_orbit_isomorphic: intra_ok,
    })
}

/// `[d s]_p` as a `u64`, when it fits.
pub fn subspace_count(p: u32, d: usize, s: usize) -> Option<u64> {
    gaussian_binomial(d, d - s, p as u64).to_u64()
}

/// Whether `r` is an integer.
pub fn is_integral(r: &BigRational) -> bool {
    r.denom().is_one() || r.numer().is_zero()
}
