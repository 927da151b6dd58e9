//! Recognition and isomorphism testing must not depend on the coordinates a
//! group is presented in.

use hquot::ff::{FieldCtx, Fp};
use hquot::group::{apply_isomorphism, Class2Group};
use hquot::isotest::{iso_test, oracle_orbit_test, Verdict};
use hquot::linalg::{Mat, SubspaceEnumerator};
use hquot::recognize::recognize;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_invertible(f: Fp, n: usize, rng: &mut ChaCha8Rng) -> Mat<Fp> {
    loop {
        let m = Mat::from_fn(f, n, n, |_, _| rng.gen_range(0..f.p()));
        if m.is_invertible() {
            return m;
        }
    }
}

/// `Grp(b)` presented in random coordinates.
fn scramble(g: &Class2Group, rng: &mut ChaCha8Rng) -> Class2Group {
    let f = g.field();
    let x = random_invertible(f, g.dim_v(), rng);
    let y = random_invertible(f, g.dim_w(), rng);
    Class2Group::from_bimap(g.bimap().transport(&x, &y).unwrap()).unwrap()
}

fn params() -> impl Strategy<Value = (u32, usize, usize, usize, u64)> {
    prop_oneof![
        Just((3u32, 2usize, 1usize)),
        Just((3, 3, 1)),
        Just((3, 4, 1)),
        Just((5, 2, 1)),
        Just((3, 2, 2)),
        Just((5, 3, 1)),
    ]
    .prop_flat_map(|(p, d, m)| (Just(p), Just(d), Just(m), 0..d, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scrambled_quotients_agree_with_the_orbit_oracle((p, d, m, kdim, seed) in params()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = FieldCtx::new(p, d).unwrap();
        let en = SubspaceEnumerator::new(k.prime_field(), d, kdim, 1 << 20).unwrap();
        let a = en.nth(rng.gen_range(0..en.total())).unwrap();
        let b = en.nth(rng.gen_range(0..en.total())).unwrap();
        let h = Class2Group::heisenberg(m, &k);
        let g1 = h.quotient_group(&a).unwrap();
        let g2 = scramble(&h.quotient_group(&b).unwrap(), &mut rng);

        let d1 = recognize(&g1).unwrap();
        let d2 = recognize(&g2).unwrap();
        prop_assert!(d1.is_floor(d2.m, d2.p(), d2.d()));

        let verdict = iso_test(&g1, &g2).unwrap();
        let truth = oracle_orbit_test(&k, &a, &b, 1 << 24).unwrap();
        prop_assert_eq!(verdict.is_isomorphic(), truth);
        if let Verdict::Isomorphic(w) = verdict {
            prop_assert!(apply_isomorphism(&g1, &g2, &w.isomorphism.f, &w.isomorphism.fhat, None).is_ok());
        }
    }

    #[test]
    fn a_group_is_isomorphic_to_any_presentation_of_itself((p, d, m, kdim, seed) in params()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = FieldCtx::new(p, d).unwrap();
        let en = SubspaceEnumerator::new(k.prime_field(), d, kdim, 1 << 20).unwrap();
        let n = en.nth(rng.gen_range(0..en.total())).unwrap();
        let g = Class2Group::heisenberg(m, &k).quotient_group(&n).unwrap();
        let g2 = scramble(&g, &mut rng);
        prop_assert!(iso_test(&g, &g2).unwrap().is_isomorphic());
        prop_assert!(iso_test(&g2, &g).unwrap().is_isomorphic());
    }
}

#[test]
fn floor_of_a_quotient_has_the_right_size() {
    // |G| = p^(2md + s) with G' of dimension s; the floor keeps V.
    let k = FieldCtx::new(3, 4).unwrap();
    let h = Class2Group::heisenberg(1, &k);
    for n in SubspaceEnumerator::new(k.prime_field(), 4, 2, 1000).unwrap().iter() {
        let g = h.quotient_group(&n).unwrap();
        let desc = recognize(&g).unwrap();
        assert_eq!(2 * desc.m * desc.d(), g.dim_v());
        assert_eq!(desc.d() - desc.kernel.dim(), g.dim_w());
    }
}
