//! The acceptance checks, runnable from the library, the CLI and the test
//! suite. Each check returns a status line; none of them panics.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bimap::standard_symplectic;
use crate::census::{good_pair, lower_bound, run_census, CensusOptions, OrbitAction};
use crate::config::Config;
use crate::ff::{FieldCtx, Fp};
use crate::group::{apply_isomorphism, dot_product_bimap, Class2Group};
use crate::invariants::{profile, symplectic_order};
use crate::isotest::{
    iso_test, iso_test_descriptors, oracle_orbit_test, oracle_pseudo_isometry, pseudo_isometry_count, scale_subspace,
    subspace_scale_solver, Verdict,
};
use crate::linalg::{gaussian_binomial, Subspace, SubspaceEnumerator};
use crate::recognize::recognize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {} ({} ms, limit {} ms): {}",
            self.status, self.id, self.name, self.elapsed_ms, self.limit_ms, self.detail
        )
    }
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn timed(id: u8, name: &'static str, limit: Duration, check: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (status, detail) = match outcome {
        Ok(d) if elapsed <= limit => (Status::Pass, d),
        Ok(d) => (Status::Fail, format!("{d}; exceeded the time limit")),
        Err(e) => (Status::Fail, e),
    };
    CheckResult { id, name, status, detail, elapsed_ms: elapsed.as_millis(), limit_ms: limit.as_millis() }
}

fn skipped(id: u8, name: &'static str, limit: Duration, why: &str) -> CheckResult {
    CheckResult { id, name, status: Status::Skipped, detail: why.into(), elapsed_ms: 0, limit_ms: limit.as_millis() }
}

fn field(p: u32, d: usize) -> Result<FieldCtx, String> {
    FieldCtx::new(p, d).map_err(|e| e.to_string())
}

fn verify(g1: &Class2Group, g2: &Class2Group, v: &Verdict) -> Result<(), String> {
    match v {
        Verdict::Isomorphic(w) => apply_isomorphism(g1, g2, &w.isomorphism.f, &w.isomorphism.fhat, None)
            .map(|_| ())
            .map_err(|e| format!("witness rejected: {e}")),
        Verdict::NonIsomorphic(r) => Err(format!("expected isomorphic, got {r:?}")),
    }
}

pub fn baer_layer() -> CheckResult {
    timed(1, "Baer layer", Duration::from_secs(1), || {
        let g = Class2Group::heisenberg(1, &field(3, 1)?);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (a, b, c) = (g.random_element(&mut rng), g.random_element(&mut rng), g.random_element(&mut rng));
            let left = g.multiply(&g.multiply(&a, &b).unwrap(), &c).unwrap();
            let right = g.multiply(&a, &g.multiply(&b, &c).unwrap()).unwrap();
            ensure!(left == right, "associativity fails on {a:?} {b:?} {c:?}");
        }
        let basis: Vec<_> = (0..3)
            .map(|i| {
                let mut u = vec![0, 0];
                let mut s = vec![0];
                if i < 2 {
                    u[i] = 1;
                } else {
                    s[0] = 1;
                }
                g.element(u, s).unwrap()
            })
            .collect();
        for x in &basis {
            for y in &basis {
                ensure!(
                    g.commutator(x, y).unwrap() == g.commutator_by_products(x, y).unwrap(),
                    "commutator formula disagrees with products on {x:?}, {y:?}"
                );
            }
        }
        let all: Vec<_> = g.elements().collect();
        ensure!(all.len() == 27, "enumerated {} elements", all.len());
        ensure!(all.iter().all(|x| g.power(x, 3) == g.identity()), "some element has order 9");
        Ok("100 triples associative; commutators agree on basis pairs; g^3 = 1 on all 27 elements".into())
    })
}

pub fn recognition_round_trip() -> CheckResult {
    timed(2, "Recognition round-trip", Duration::from_secs(10), || {
        for m in 1..=2 {
            for d in 1..=3 {
                let desc = recognize(&Class2Group::heisenberg(m, &field(3, d)?)).map_err(|e| e.to_string())?;
                ensure!(desc.is_floor(m, 3, d), "H_{m}(GF(3^{d})) recognized as m = {}, d = {}", desc.m, desc.d());
                ensure!(desc.kernel.dim() == 0, "H_{m}(GF(3^{d})) has kernel of dim {}", desc.kernel.dim());
            }
        }
        Ok("(m, d) recovered with M = 0 for all (m, d) in {1,2} x {1,2,3}".into())
    })
}

pub fn field_collapse(cfg: &Config) -> CheckResult {
    timed(3, "Field-collapse identification", Duration::from_secs(600), || {
        let k9 = field(3, 2)?;
        let h2 = Class2Group::heisenberg(2, &field(3, 1)?);
        let lines = SubspaceEnumerator::new(k9.prime_field(), 2, 1, 16).map_err(|e| e.to_string())?;
        ensure!(lines.total() == 4, "{} lines in GF(9)", lines.total());
        let mut fast = Duration::ZERO;
        for n in lines.iter() {
            let q = Class2Group::heisenberg(1, &k9).quotient_group(&n).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let desc = recognize(&q).map_err(|e| e.to_string())?;
            ensure!(desc.is_floor(2, 3, 1), "floor is H_{}(GF(3^{}))", desc.m, desc.d());
            let v = iso_test(&q, &h2).map_err(|e| e.to_string())?;
            verify(&q, &h2, &v)?;
            fast = fast.max(start.elapsed());
            let truth = oracle_pseudo_isometry(q.bimap(), h2.bimap(), cfg.gl_guard as u128).map_err(|e| e.to_string())?;
            ensure!(truth, "exhaustive search finds no pseudo-isometry");
        }
        ensure!(fast < Duration::from_secs(1), "fast path took {fast:?}");
        Ok(format!("4 kernels: floor H_2(GF(3)), verified witnesses, exhaustive search agrees; fast path {} ms", fast.as_millis()))
    })
}

pub fn indigenous_regime(cfg: &Config) -> CheckResult {
    let limit = Duration::from_secs(30);
    let name = "Indigenous regime";
    if cfg.max_subspaces == 0 {
        return skipped(4, name, limit, "census budget is 0");
    }
    timed(4, name, limit, || {
        let k = field(3, 3)?;
        let h = Class2Group::heisenberg(1, &k);
        let lines: Vec<_> = SubspaceEnumerator::new(k.prime_field(), 3, 1, 100).map_err(|e| e.to_string())?.iter().collect();
        ensure!(lines.len() == 13, "{} lines", lines.len());
        let groups: Vec<_> = lines.iter().map(|n| h.quotient_group(n).unwrap()).collect();
        let descs = groups.iter().map(recognize).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        ensure!(descs.iter().all(|x| x.is_floor(1, 3, 3)), "some floor is not H_1(GF(27))");
        let opts = CensusOptions { config: cfg.clone(), validate_pairs: 0, with_invariants: false };
        let census = run_census(3, 3, 2, &opts).map_err(|e| e.to_string())?;
        ensure!(census.orbit_count == 1, "census reports {} orbits", census.orbit_count);
        let mut pairs = 0;
        for a in 0..13 {
            for b in a + 1..13 {
                let v = iso_test_descriptors(&groups[a], &descs[a], &groups[b], &descs[b]).map_err(|e| e.to_string())?;
                verify(&groups[a], &groups[b], &v)?;
                pairs += 1;
            }
        }
        Ok(format!("13 kernels indigenous, 1 orbit, {pairs} pairs isomorphic with verified witnesses"))
    })
}

/// Representatives of the (3, 5, 2) census, for checks 5 and 6.
fn separation_representatives(cfg: &Config) -> Result<(Vec<Subspace<Fp>>, usize), String> {
    let opts = CensusOptions { config: cfg.clone(), validate_pairs: 0, with_invariants: false };
    let r = run_census(3, 5, 2, &opts).map_err(|e| e.to_string())?;
    let f = Fp::new(3).unwrap();
    let reps = r.orbits.iter().map(|o| Subspace::span(f, 5, &o.representative).unwrap()).collect();
    Ok((reps, r.subspace_count.parse().unwrap()))
}

pub fn separation_regime(cfg: &Config) -> CheckResult {
    let limit = Duration::from_secs(300);
    let name = "Separation regime";
    if cfg.max_subspaces == 0 {
        return skipped(5, name, limit, "census budget is 0");
    }
    timed(5, name, limit, || {
        let gp = good_pair(12).map_err(|e| e.to_string())?;
        ensure!(gp.d == 5 && gp.verified(), "good_pair(12) = {gp:?}");
        let (reps, count) = separation_representatives(cfg)?;
        ensure!(count == 1210, "census enumerated {count} kernels");
        ensure!(gaussian_binomial(5, 3, 3) == BigUint::from(1210u32), "Gaussian binomial disagrees");
        let orbits = reps.len();
        ensure!(orbits >= 2, "{orbits} orbits, below the effective bound 2");
        let lb = lower_bound(3, 5, 2);
        ensure!(lb.to_string() == "729/1210", "lower bound is {lb}");
        ensure!(BigUint::from(orbits) >= lb.ceil().to_integer().to_biguint().unwrap(), "below the orbit-counting lower bound");

        let k = field(3, 5)?;
        let h = Class2Group::heisenberg(1, &k);
        let groups: Vec<_> = reps.iter().map(|m| h.quotient_group(m).unwrap()).collect();
        let descs = groups.par_iter().map(recognize).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        for a in 0..orbits {
            for b in 0..orbits {
                let v = iso_test_descriptors(&groups[a], &descs[a], &groups[b], &descs[b]).map_err(|e| e.to_string())?;
                ensure!(v.is_isomorphic() == (a == b), "iso_test on representatives {a}, {b}: {}", v.is_isomorphic());
            }
        }

        let action = OrbitAction::new(&k, cfg.max_field_order).map_err(|e| e.to_string())?;
        let all: Vec<_> = SubspaceEnumerator::new(k.prime_field(), 5, 3, cfg.max_subspaces)
            .map_err(|e| e.to_string())?
            .iter()
            .collect();
        let guard = cfg.max_field_order as u128 * 5;
        let disagreements = all
            .par_iter()
            .map(|m| {
                let canon = action.canonical(m);
                reps.iter()
                    .filter(|r| oracle_orbit_test(&k, m, r, guard).unwrap_or(false) != (**r == canon))
                    .count()
            })
            .sum::<usize>();
        ensure!(disagreements == 0, "{disagreements} subspace/representative pairs disagree with the orbit oracle");
        Ok(format!(
            "1210 kernels, {orbits} orbits (bounds 2 and 1), representatives pairwise nonisomorphic, oracle agrees on all {} subspaces",
            all.len()
        ))
    })
}

pub fn indistinguishability(cfg: &Config) -> CheckResult {
    let limit = Duration::from_secs(60);
    let name = "Indistinguishability";
    if cfg.max_subspaces == 0 {
        return skipped(6, name, limit, "census budget is 0");
    }
    timed(6, name, limit, || {
        let (reps, _) = separation_representatives(cfg)?;
        let h = Class2Group::heisenberg(1, &field(3, 5)?);
        let profiles = reps
            .par_iter()
            .map(|m| profile(&h.quotient_group(m).unwrap(), cfg.seed))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        for (i, pr) in profiles.iter().enumerate() {
            ensure!(pr.log_order == 12, "rep {i}: order 3^{}", pr.log_order);
            ensure!(pr.exponent == 3, "rep {i}: exponent {}", pr.exponent);
            // [G:G'] |G'| = |G| forces |G'| = 3^2 here
            ensure!(pr.derived_log == 2, "rep {i}: |G'| = 3^{}", pr.derived_log);
            ensure!(pr.abelianization_log == 10, "rep {i}: [G:G'] = 3^{}", pr.abelianization_log);
            ensure!(pr.is_camina, "rep {i}: not Camina");
            ensure!(pr.class_data.noncentral_centralizer_log == Some(10), "rep {i}: centralizers {:?}", pr.class_data);
            ensure!(pr.indecomposability.direct, "rep {i}: directly decomposable");
            let central = pr.indecomposability.central.as_ref().ok_or(format!("rep {i}: not recognized"))?;
            ensure!(central.indecomposable && central.kind == "symplectic", "rep {i}: central decomposition {central:?}");
            ensure!(pr.indistinguishable_from(&profiles[0]), "rep {i} differs from rep 0");
        }
        Ok(format!(
            "{} representatives: order 3^12, exponent 3, |G'| = 3^2, [G:G'] = 3^10, Camina, centralizers 3^10, equal character pairs, indecomposable (symplectic)",
            profiles.len()
        ))
    })
}

pub fn automorphism_structure(cfg: &Config) -> CheckResult {
    timed(7, "Automorphism structure", Duration::from_secs(600), || {
        let guard = cfg.gl_guard as u128;
        let j3 = standard_symplectic(1, &field(3, 1)?);
        let n3 = pseudo_isometry_count(&j3, guard).map_err(|e| e.to_string())?;
        let shape3 = BigUint::from(2u32) * symplectic_order(1, 3, 1);
        ensure!(n3 == 48 && BigUint::from(n3) == shape3, "H_1(GF(3)): {n3} pseudo-isometries");
        let j9 = standard_symplectic(1, &field(3, 2)?);
        let n9 = pseudo_isometry_count(&j9, guard).map_err(|e| e.to_string())?;
        let shape9 = BigUint::from(2u32 * 8) * symplectic_order(1, 3, 2);
        ensure!(n9 == 11_520 && BigUint::from(n9) == shape9, "H_1(GF(9)): {n9} pseudo-isometries");
        Ok("48 = 1*2*24 for H_1(GF(3)); 11520 = 2*8*720 for H_1(GF(9))".into())
    })
}

pub fn ronyai_solver(cfg: &Config) -> CheckResult {
    timed(8, "Ronyai solver", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut solved = 0;
        let mut rejected = 0;
        for d in [3usize, 5, 8] {
            let k = field(3, d)?;
            let f = k.prime_field();
            let random_subspace = |rng: &mut ChaCha8Rng, dim: usize| loop {
                let vecs: Vec<Vec<u32>> = (0..dim).map(|_| (0..d).map(|_| rng.gen_range(0..3)).collect()).collect();
                let s = Subspace::span(f, d, &vecs).unwrap();
                if s.dim() == dim {
                    break s;
                }
            };
            let per = if d == 8 { 334 } else { 333 };
            for _ in 0..per {
                let dim = rng.gen_range(0..=d);
                let u = random_subspace(&mut rng, dim);
                let c = loop {
                    let c: Vec<u32> = (0..d).map(|_| rng.gen_range(0..3)).collect();
                    if c.iter().any(|&x| x != 0) {
                        break c;
                    }
                };
                let v = scale_subspace(&k, &u, &c);
                let found = subspace_scale_solver(&k, &u, &v).ok_or(format!("no solution for U c at d = {d}"))?;
                ensure!(scale_subspace(&k, &u, &found) == v, "returned scalar does not map U to Uc at d = {d}");
                solved += 1;
                let other_dim = (u.dim() + rng.gen_range(1..=d)) % (d + 1);
                let w = random_subspace(&mut rng, other_dim);
                ensure!(subspace_scale_solver(&k, &u, &w).is_none(), "dimension mismatch solved at d = {d}");
                rejected += 1;
            }
        }
        Ok(format!("{solved} scaled pairs solved exactly; {rejected} dimension mismatches rejected"))
    })
}

pub fn good_pair_table() -> CheckResult {
    timed(9, "Good-pair table", Duration::from_secs(1), || {
        let table = [(12, 15, 5), (16, 21, 7), (22, 23, 8), (24, 33, 11), (34, 39, 13), (40, 57, 19), (58, 59, 23)];
        for n in 12..=200 {
            let gp = good_pair(n).map_err(|e| e.to_string())?;
            ensure!(gp.verified(), "good_pair({n}) = {gp:?} fails verification");
            if let Some(&(_, _, d)) = table.iter().find(|&&(a, b, _)| (a..=b).contains(&n)) {
                ensure!(gp.d == d, "good_pair({n}) = {}, table says {d}", gp.d);
            }
        }
        Ok("n in [12, 200] verified; [12, 59] matches the table".into())
    })
}

pub fn brahana_bridge() -> CheckResult {
    timed(10, "Brahana bridge", Duration::from_secs(5), || {
        let k = field(3, 2)?;
        let g = Class2Group::brahana(&dot_product_bimap(1, &k));
        let desc = recognize(&g).map_err(|e| e.to_string())?;
        ensure!(desc.is_floor(1, 3, 2), "floor H_{}(GF(3^{}))", desc.m, desc.d());
        let h = Class2Group::heisenberg(1, &k);
        let v = iso_test(&g, &h).map_err(|e| e.to_string())?;
        verify(&g, &h, &v)?;
        Ok("Brahana group of the dot product is H_1(GF(9)) with a verified witness".into())
    })
}

pub fn run_all(cfg: &Config) -> Vec<CheckResult> {
    vec![
        baer_layer(),
        recognition_round_trip(),
        field_collapse(cfg),
        indigenous_regime(cfg),
        separation_regime(cfg),
        indistinguishability(cfg),
        automorphism_structure(cfg),
        ronyai_solver(cfg),
        good_pair_table(),
        brahana_bridge(),
    ]
}
