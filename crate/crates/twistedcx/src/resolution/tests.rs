use super::*;
use crate::cover_model::{CoverNerve, Face};
use crate::exact_linalg::Field;
use crate::functors::{gamma, sheafify, sheafify_with, twist};
use crate::gen;
use crate::twisted_core::{is_weak_equivalence, Morphism};

const Q: Field = Field::Rational;

fn nerves() -> Vec<CoverNerve> {
    vec![gen::interval(), CoverNerve::circle(), CoverNerve::simplex(3)]
}

#[test]
fn resolution_is_certified() {
    let mut nonzero = 0;
    let mut total = 0;
    for (seed, nerve) in (0..8u64).flat_map(|s| nerves().into_iter().map(move |n| (s, n))) {
        let mut rng = gen::rng(100 + seed);
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, -1, 2, 3, true);
        let r = twisted_resolution(&p, &nerve).unwrap();
        assert!(r.mc_valid, "MC at seed {seed}");
        assert!(r.nondegenerate, "nondegenerate at seed {seed}");
        assert!(r.weak_equivalence, "weq at seed {seed}: {:?}", is_weak_equivalence(&r.comparison, &r.resolved, &r.target));
        assert!(r.resolved.family.is_constant());
        total += 1;
        if r.resolved.a.comps().iter().any(|(t, m)| t.len() == 3 && m.values().any(|x| !x.is_zero())) {
            nonzero += 1;
        }
    }
    eprintln!("nonzero a^2: {nonzero}/{total}");
}

#[test]
fn resolution_rejects_imperfect() {
    let nerve = gen::interval();
    for seed in 0..20 {
        let mut rng = gen::rng(seed);
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, 0, 1, 2, false);
        if perfectness_violation(&p).is_some() {
            assert!(matches!(twisted_resolution(&p, &nerve), Err(ResolutionError::NotPerfect { .. })));
            return;
        }
    }
    panic!("no imperfect sample");
}

#[test]
fn factor_and_invert_certificates() {
    for (seed, nerve) in (0..4u64).flat_map(|s| nerves().into_iter().map(move |n| (s, n))) {
        let mut rng = gen::rng(200 + seed);
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, 0, 2, 2, true);
        let r = twisted_resolution(&p, &nerve).unwrap();
        let inv = invert_weak_equivalence(&r.comparison, &r.resolved, &r.target).unwrap();
        let n = &nerve;
        let (e, f) = (&r.resolved, &r.target);
        assert!(inv.inverse.diff(&f.a, &e.a, n).is_zero());
        assert_eq!(
            inv.left_homotopy.diff(&e.a, &e.a, n),
            inv.inverse.compose(&r.comparison).sub(&Morphism::identity(&e.family))
        );
        assert_eq!(
            inv.right_homotopy.diff(&f.a, &f.a, n),
            r.comparison.compose(&inv.inverse).sub(&Morphism::identity(&f.family))
        );
    }
}

#[test]
fn factor_rejects_non_equivalence() {
    let nerve = CoverNerve::circle();
    let mut rng = gen::rng(7);
    let t = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
    if t.family.is_zero() {
        return;
    }
    let z = Morphism::zero(Q, 0);
    let id = Morphism::identity(&t.family);
    assert!(!is_weak_equivalence(&z, &t, &t).holds());
    assert_eq!(factor_through(&id, &t, &t, &z, &t).unwrap_err(), ResolutionError::NotWeakEquivalence);
    assert_eq!(invert_weak_equivalence(&z, &t, &t).unwrap_err(), ResolutionError::NotWeakEquivalence);
}

#[test]
fn transfer_of_sheafified_map() {
    for (seed, nerve) in (0..3u64).flat_map(|s| nerves().into_iter().map(move |n| (s, n))) {
        let mut rng = gen::rng(300 + seed);
        let t = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
        let (sa, sb) = common_sheafify(&t, &t).unwrap();
        let id = Morphism::identity(&t.family);
        let f = crate::functors::sheafify_morphism(&id, &t, &t, &sa, &sb).unwrap();
        let tr = hom_transfer(&f, &t, &t, &sa, &sb, Some(&id)).unwrap();
        assert!(tr.theta.diff(&t.a, &t.a, &nerve).is_zero());
        assert!(tr.twisted_homotopy.is_some(), "θ ≃ φ at seed {seed}");
        assert!(tr.presheaf_homotopy.is_some(), "S(θ) ≃ f at seed {seed}");
    }
}

#[test]
fn gamma_factors_through_itself() {
    let nerve = CoverNerve::circle();
    let mut rng = gen::rng(11);
    let t = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
    let s = sheafify(&t).unwrap();
    let ts = twist(&s.complex, &nerve);
    let g = gamma(&t, &s);
    let fac = factor_through(&Morphism::identity(&t.family), &t, &t, &g, &ts).unwrap();
    assert!(fac.theta.diff(&t.a, &ts.a, &nerve).is_zero());
    let _ = sheafify_with(&t, s.hi).unwrap();
    let _ = Face::EMPTY;
}


#[test]
fn second_order_terms_appear_on_triangles() {
    let mut nonzero = 0;
    let t0 = std::time::Instant::now();
    for seed in 0..20u64 {
        let mut rng = gen::rng(500 + seed);
        let nerve = CoverNerve::simplex(3 + (seed % 2) as usize);
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, -1, 2, 2, true);
        let r = twisted_resolution(&p, &nerve).unwrap();
        assert!(r.certified(), "seed {seed}");
        let z = r.resolved.a.comps().iter().any(|(t, m)| t.len() == 3 && m.values().any(|x| !x.is_zero()));
        nonzero += usize::from(z);
    }
    eprintln!("nonzero a^2 on {nonzero}/20 in {:?}", t0.elapsed());
    assert!(nonzero >= 4);
}
