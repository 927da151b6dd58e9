use hquot::bimap::standard_symplectic;
use hquot::ff::{FieldCtx, Fp};
use hquot::group::{apply_isomorphism, Class2Group};
use hquot::isotest::{
    iso_test, iso_test_descriptors, oracle_orbit_test, oracle_pseudo_isometry, pseudo_isometry_count,
    scale_subspace, subspace_scale_solver, Verdict,
};
use hquot::linalg::{Subspace, SubspaceEnumerator};
use hquot::recognize::recognize;
use proptest::prelude::*;

const GUARD: u128 = 30_000_000;

fn kernels(k: &FieldCtx) -> Vec<Subspace<Fp>> {
    (0..k.d())
        .flat_map(|dim| SubspaceEnumerator::new(k.prime_field(), k.d(), dim, 1 << 20).unwrap().iter().collect::<Vec<_>>())
        .collect()
}

/// Runs iso_test on every pair of quotients of `H_1(K)` and compares with the
/// orbit oracle; returns the verdict matrix.
fn sweep(p: u32, d: usize) -> (Vec<Class2Group>, Vec<Vec<bool>>) {
    let k = FieldCtx::new(p, d).unwrap();
    let h = Class2Group::heisenberg(1, &k);
    let ms = kernels(&k);
    let groups: Vec<_> = ms.iter().map(|m| h.quotient_group(m).unwrap()).collect();
    let descs: Vec<_> = groups.iter().map(|g| recognize(g).unwrap()).collect();
    let mut table = vec![vec![false; ms.len()]; ms.len()];
    for a in 0..ms.len() {
        for b in 0..ms.len() {
            let verdict = iso_test_descriptors(&groups[a], &descs[a], &groups[b], &descs[b]).unwrap();
            let oracle = oracle_orbit_test(&k, &ms[a], &ms[b], GUARD).unwrap();
            assert_eq!(verdict.is_isomorphic(), oracle, "p={p} d={d} pair ({a},{b})");
            if let Verdict::Isomorphic(w) = &verdict {
                apply_isomorphism(&groups[a], &groups[b], &w.isomorphism.f, &w.isomorphism.fhat, None).unwrap();
            }
            table[a][b] = verdict.is_isomorphic();
        }
    }
    (groups, table)
}

fn assert_equivalence(table: &[Vec<bool>]) {
    let n = table.len();
    for a in 0..n {
        assert!(table[a][a]);
        for b in 0..n {
            assert_eq!(table[a][b], table[b][a]);
            for c in 0..n {
                if table[a][b] && table[b][c] {
                    assert!(table[a][c]);
                }
            }
        }
    }
}

#[test]
fn agrees_with_orbit_oracle_gf9() {
    let (groups, table) = sweep(3, 2);
    assert_equivalence(&table);
    // at GF(9) the pseudo-isometry sweep is feasible as well
    for a in 0..groups.len() {
        for b in 0..groups.len() {
            let truth = oracle_pseudo_isometry(groups[a].bimap(), groups[b].bimap(), GUARD).unwrap();
            assert_eq!(table[a][b], truth, "pair ({a},{b})");
        }
    }
}

#[test]
fn agrees_with_orbit_oracle_gf27() {
    let (_, table) = sweep(3, 3);
    assert_equivalence(&table);
}

#[test]
fn agrees_with_orbit_oracle_gf25() {
    let (_, table) = sweep(5, 2);
    assert_equivalence(&table);
}

#[test]
fn field_collapse_matches_heisenberg_over_prime_field() {
    let k9 = FieldCtx::new(3, 2).unwrap();
    let k3 = FieldCtx::new(3, 1).unwrap();
    let h2 = Class2Group::heisenberg(2, &k3);
    let lines = SubspaceEnumerator::new(k9.prime_field(), 2, 1, 100).unwrap();
    assert_eq!(lines.total(), 4);
    for n in lines.iter() {
        let q = Class2Group::heisenberg(1, &k9).quotient_group(&n).unwrap();
        assert!(iso_test(&q, &h2).unwrap().is_isomorphic());
    }
}

#[test]
fn pseudo_isometry_group_orders() {
    let k3 = FieldCtx::new(3, 1).unwrap();
    assert_eq!(pseudo_isometry_count(&standard_symplectic(1, &k3), GUARD).unwrap(), 48);
    let k9 = FieldCtx::new(3, 2).unwrap();
    assert_eq!(pseudo_isometry_count(&standard_symplectic(1, &k9), GUARD).unwrap(), 11_520);
}

#[test]
fn different_orders_are_rejected_without_search() {
    let k = FieldCtx::new(3, 2).unwrap();
    let h = Class2Group::heisenberg(1, &k);
    let h3 = Class2Group::heisenberg(1, &FieldCtx::new(3, 1).unwrap());
    assert!(!iso_test(&h, &h3).unwrap().is_isomorphic());
}

fn subspace_strategy(d: usize) -> impl Strategy<Value = (Vec<Vec<u32>>, Vec<u32>)> {
    (
        prop::collection::vec(prop::collection::vec(0u32..3, d), 0..d),
        prop::collection::vec(0u32..3, d),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_recovers_scalings((vecs, c) in subspace_strategy(5)) {
        prop_assume!(c.iter().any(|&x| x != 0));
        let k = FieldCtx::new(3, 5).unwrap();
        let u = Subspace::span(k.prime_field(), 5, &vecs).unwrap();
        let v = scale_subspace(&k, &u, &c);
        let found = subspace_scale_solver(&k, &u, &v).expect("a scalar exists");
        prop_assert_eq!(scale_subspace(&k, &u, &found), v.clone());
        prop_assert!(subspace_scale_solver(&k, &v, &u).is_some());
    }
}
