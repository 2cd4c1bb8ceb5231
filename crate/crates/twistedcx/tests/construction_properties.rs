use proptest::prelude::*;

use twistedcx::cover_model::CoverNerve;
use twistedcx::dgcat_descent::{fiber_differential, restrict_morphism, restrict_to_fiber, verify_fiber_object, SIGMA};
use twistedcx::exact_linalg::Field;
use twistedcx::functors::{
    gamma, is_facewise_quasi_iso, local_equivalence, sheafify, tau, twist, verify_adjunction, weq_criterion,
};
use twistedcx::gen;
use twistedcx::resolution::{common_sheafify, hom_transfer, invert_weak_equivalence, twisted_resolution};
use twistedcx::twisted_core::{is_weak_equivalence, Morphism};

fn field(prime: bool) -> Field {
    if prime {
        Field::prime(101).unwrap()
    } else {
        Field::Rational
    }
}

fn nerve_for(k: u8) -> CoverNerve {
    match k % 3 {
        0 => gen::interval(),
        1 => CoverNerve::circle(),
        _ => CoverNerve::simplex(3),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn local_equivalences_and_adjunction_hold(seed in any::<u64>(), k in any::<u8>(), p in any::<bool>()) {
        let nerve = nerve_for(k);
        let t = gen::twisted(&mut gen::rng(seed), &nerve, field(p), 0, 1, 2);
        let s = sheafify(&t).unwrap();
        for j in 0..nerve.len() {
            prop_assert!(local_equivalence(&t, &s, j).holds());
        }
        prop_assert!(verify_adjunction(&t, &s).holds());
        let ts = twist(&s.complex, &nerve);
        prop_assert!(is_weak_equivalence(&gamma(&t, &s), &ts, &t).holds());
    }

    #[test]
    fn tau_is_a_quasi_isomorphism(seed in any::<u64>(), k in any::<u8>(), p in any::<bool>()) {
        let nerve = nerve_for(k);
        let pc = gen::presheaf_complex(&mut gen::rng(seed), &nerve, field(p), 0, 2, 2, seed % 2 == 0);
        let t = twist(&pc, &nerve);
        let s = sheafify(&t).unwrap();
        let m = tau(&pc, &s);
        prop_assert!(is_facewise_quasi_iso(&m, &pc, &s.complex));
    }

    #[test]
    fn weak_equivalence_tests_agree(seed in any::<u64>(), k in any::<u8>()) {
        let nerve = nerve_for(k);
        let mut rng = gen::rng(seed);
        let t = gen::twisted(&mut rng, &nerve, Field::Rational, 0, 1, 2);
        let phi = gen::constant_morphism(&mut rng, &t.family, &t.family, 0, 0, 0.5);
        let phi = if phi.diff(&t.a, &t.a, &nerve).is_zero() { phi } else { Morphism::identity(&t.family) };
        prop_assert!(weq_criterion(&phi, &t, &t).unwrap().agree());
        prop_assert!(weq_criterion(&Morphism::zero(Field::Rational, 0), &t, &t).unwrap().agree());
    }

    #[test]
    fn resolutions_are_certified_and_invertible(seed in any::<u64>(), k in any::<u8>(), p in any::<bool>()) {
        let nerve = nerve_for(k);
        let pc = gen::presheaf_complex(&mut gen::rng(seed), &nerve, field(p), 0, 2, 2, true);
        let r = twisted_resolution(&pc, &nerve).unwrap();
        prop_assert!(r.certified());
        let inv = invert_weak_equivalence(&r.comparison, &r.resolved, &r.target).unwrap();
        prop_assert!(inv.inverse.diff(&r.target.a, &r.resolved.a, &nerve).is_zero());
    }

    #[test]
    fn transfer_recovers_identity_up_to_homotopy(seed in any::<u64>(), k in any::<u8>()) {
        let nerve = nerve_for(k);
        let t = gen::twisted(&mut gen::rng(seed), &nerve, Field::Rational, 0, 1, 2);
        let (sa, sb) = common_sheafify(&t, &t).unwrap();
        let id = Morphism::identity(&t.family);
        let f = twistedcx::functors::sheafify_morphism(&id, &t, &t, &sa, &sb).unwrap();
        let tr = hom_transfer(&f, &t, &t, &sa, &sb, Some(&id)).unwrap();
        prop_assert!(tr.twisted_homotopy.is_some());
        prop_assert!(tr.presheaf_homotopy.is_some());
    }

    #[test]
    fn restriction_to_fiber_is_a_dg_functor(seed in any::<u64>(), deg in -1i32..2) {
        let nerve = gen::interval();
        let mut rng = gen::rng(seed);
        let e = gen::twisted(&mut rng, &nerve, Field::Rational, 0, 1, 2);
        let f = gen::twisted(&mut rng, &nerve, Field::Rational, 0, 1, 2);
        let (oe, of) = (restrict_to_fiber(&e).unwrap(), restrict_to_fiber(&f).unwrap());
        prop_assert!(verify_fiber_object(&oe) && verify_fiber_object(&of));
        let phi = gen::constant_morphism(&mut rng, &e.family, &f.family, deg, 1, 0.6);
        let lhs = fiber_differential(&restrict_morphism(&phi, &oe, &of, SIGMA), &oe, &of);
        let rhs = restrict_morphism(&phi.diff(&e.a, &f.a, &nerve), &oe, &of, SIGMA);
        prop_assert_eq!(lhs, rhs);
    }
}
