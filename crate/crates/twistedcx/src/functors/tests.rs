use super::*;
use crate::cover_model::{CoverNerve, Face, NaturalMap, Presheaf, PresheafComplex};
use crate::exact_linalg::{Field, GradedMap, GradedSpace, Matrix};
use crate::gen;
use crate::twisted_core::{check_mc, check_nondegenerate, Morphism, TwistedComplex};

const Q: Field = Field::Rational;

fn constant_complex(nerve: &CoverNerve, sp: &GradedSpace, d: &GradedMap) -> PresheafComplex {
    let sheaf = Presheaf::constant(Q, nerve.faces(), sp);
    let maps = nerve.faces().iter().map(|f| (*f, d.clone())).collect();
    PresheafComplex::new(sheaf, NaturalMap { deg: 1, maps }).unwrap()
}

fn all_checks(t: &TwistedComplex) {
    let s = sheafify(t).unwrap();
    assert!(s.complex.validate().is_ok());
    assert!(s.raw.validate().is_ok());
    for j in 0..t.family.len() {
        let le = local_equivalence(t, &s, j);
        assert!(le.f_chain && le.g_chain, "chain maps at {j}");
        assert!(le.fg_is_ajj, "f g = a_jj at {j}");
        assert!(le.homotopy, "homotopy identity at {j}");
    }
    assert!(verify_adjunction(t, &s).holds());
    let g = gamma(t, &s);
    let ts = twist(&s.complex, t.nerve());
    assert!(check_mc(&ts.family, &ts.a).is_valid());
    assert!(g.diff(&ts.a, &t.a, t.nerve()).is_zero(), "γ closed");
    assert!(crate::twisted_core::is_weak_equivalence(&g, &ts, t).holds());
}

#[test]
fn twist_datum_of_random_complex_is_valid() {
    let mut rng = gen::rng(1);
    let nerve = CoverNerve::circle();
    let p = gen::presheaf_complex(&mut rng, &nerve, Q, 0, 2, 3, true);
    let t = twist(&p, &nerve);
    assert!(check_mc(&t.family, &t.a).is_valid());
    let rep = check_nondegenerate(&t);
    assert!(rep.is_valid());
    assert!(rep.verdicts.iter().all(|v| v.witness.as_ref().unwrap().values().all(|h| h.is_zero())));
    let zero = PresheafComplex::with_zero_differential(Presheaf::constant(Q, nerve.faces(), &GradedSpace::zero()));
    assert!(twist(&zero, &nerve).a.is_zero());
}

#[test]
fn identities_on_twist_and_gauge_data() {
    let mut rng = gen::rng(2);
    for nerve in [gen::interval(), CoverNerve::circle(), CoverNerve::simplex(3)] {
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, 0, 1, 2, true);
        all_checks(&twist(&p, &nerve));
        all_checks(&gen::twisted(&mut rng, &nerve, Q, 0, 1, 2));
    }
}

#[test]
fn twist_then_local_equivalence_composes_to_identity() {
    let nerve = gen::interval();
    let (sp, d) = gen::complex(Q, &mut gen::rng(3), 0, 1, 2);
    let t = twist(&constant_complex(&nerve, &sp, &d), &nerve);
    let s = sheafify(&t).unwrap();
    let le = local_equivalence(&t, &s, 1);
    for f in nerve.star(Face::singleton(1)) {
        assert_eq!(le.f.at(f).compose(le.g.at(f)), GradedMap::identity(Q, &sp));
    }
}

#[test]
fn tau_is_quasi_iso_on_interval_and_circle() {
    let field = Q;
    for nerve in [gen::interval(), CoverNerve::circle(), CoverNerve::with_faces(1, &[])] {
        let sp = GradedSpace::concentrated(0, 1);
        let p = constant_complex(&nerve, &sp, &GradedMap::zero(field, &sp, &sp, 1));
        let t = twist(&p, &nerve);
        let s = sheafify(&t).unwrap();
        let tp = tau(&p, &s);
        assert!(tp.naturality_violation(&p.sheaf, &s.complex.sheaf).is_none());
        assert!(is_facewise_quasi_iso(&tp, &p, &s.complex));
    }
}

#[test]
fn circle_with_one_one_cohomology() {
    // constant rank one sheaf twisted around the circle by -1 on one overlap is still
    // locally a point; the global Čech cohomology of the untwisted one is (1,1)
    let nerve = CoverNerve::circle();
    let sp = GradedSpace::concentrated(0, 1);
    let t = gen::constant_twisted(&nerve, &sp, &GradedMap::zero(Q, &sp, &sp, 1));
    let s = sheafify(&t).unwrap();
    for (_, h) in sheaf_cohomology(&s, &nerve) {
        assert_eq!(h.get(&0), Some(&1));
        assert_eq!(h.values().sum::<usize>(), 1);
    }
}

#[test]
fn zero_datum_sheafifies_to_acyclic() {
    let nerve = CoverNerve::circle();
    let fam = crate::twisted_core::LocalFamily::constant(&nerve, Q, &vec![GradedSpace::from_dims([(0, 1), (1, 2)]); 3]);
    let t = TwistedComplex { family: fam, a: Morphism::zero(Q, 1), generalized: true };
    let s = sheafify(&t).unwrap();
    for (_, h) in sheaf_cohomology(&s, &nerve) {
        assert!(h.values().all(|d| *d == 0));
    }
    for j in 0..3 {
        let le = local_equivalence(&t, &s, j);
        assert!(le.holds());
        assert!(le.f.maps.values().zip(le.g.maps.values()).all(|(f, g)| f.compose(g).is_zero()));
    }
}

#[test]
fn sheafify_is_a_dg_functor_on_windows() {
    let mut rng = gen::rng(5);
    let nerve = CoverNerve::circle();
    let e = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
    let hi = default_top(&e) + 1;
    let se = sheafify_with(&e, hi).unwrap();
    for l in [-1, 0, 1] {
        let phi = gen::constant_morphism(&mut rng, &e.family, &e.family, l, 2, 0.5);
        let sphi = sheafify_morphism_raw(&phi, &e, &se, &se);
        let sdphi = sheafify_morphism_raw(&phi.diff(&e.a, &e.a, &nerve), &e, &se, &se);
        let sgn = crate::twisted_core::sign(Q, l as i64);
        for f in nerve.faces() {
            let d = se.raw.d.at(*f);
            for n in se.lo..=hi {
                if n + l + 1 > hi || n + l < se.lo {
                    continue;
                }
                let lhs = d.at(n + l).mul(&sphi.at(*f).at(n)).sub(&sphi.at(*f).at(n + 1).mul(&d.at(n)).scale(&sgn));
                assert_eq!(lhs, sdphi.at(*f).at(n), "l={l} n={n}");
            }
        }
        let psi = gen::constant_morphism(&mut rng, &e.family, &e.family, 0, 1, 0.5);
        let comp = sheafify_morphism_raw(&psi.compose(&phi), &e, &se, &se);
        let spsi = sheafify_morphism_raw(&psi, &e, &se, &se);
        for f in nerve.faces() {
            for n in se.lo..=hi {
                if n + l > hi + 1 || n + l < se.lo {
                    continue;
                }
                assert_eq!(comp.at(*f).at(n), spsi.at(*f).at(n + l).mul(&sphi.at(*f).at(n)));
            }
        }
    }
}

#[test]
fn weq_criterion_routes_agree() {
    let mut rng = gen::rng(6);
    let nerve = gen::interval();
    let e = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
    let id = Morphism::identity(&e.family);
    assert_eq!(weq_criterion(&id, &e, &e).unwrap(), WeqCriterion { twisted: true, sheafified: true });
    let s = sheafify(&e).unwrap();
    let ts = twist(&s.complex, &nerve);
    let g = gamma(&e, &s);
    assert_eq!(weq_criterion(&g, &ts, &e).unwrap(), WeqCriterion { twisted: true, sheafified: true });
    let sp = GradedSpace::concentrated(0, 1);
    let k = gen::constant_twisted(&nerve, &sp, &GradedMap::zero(Q, &sp, &sp, 1));
    let z = gen::constant_twisted(&nerve, &GradedSpace::zero(), &GradedMap::zero(Q, &GradedSpace::zero(), &GradedSpace::zero(), 1));
    assert_eq!(weq_criterion(&Morphism::zero(Q, 0), &k, &z).unwrap(), WeqCriterion { twisted: false, sheafified: false });
}

#[test]
fn single_open_sheafification_is_equivalent_to_the_local_object() {
    let nerve = CoverNerve::with_faces(1, &[]);
    let (sp, d) = gen::complex(Q, &mut gen::rng(8), 0, 2, 3);
    let t = gen::constant_twisted(&nerve, &sp, &d);
    let s = sheafify(&t).unwrap();
    let f = Face::singleton(0);
    let h = s.complex.cohomology_at(f).unwrap();
    let local = crate::exact_linalg::cohomology_dims(&sp, &d).unwrap();
    for n in s.lo..=s.hi {
        assert_eq!(h.get(&n).copied().unwrap_or(0), local.get(&n).copied().unwrap_or(0));
    }
    let le = local_equivalence(&t, &s, 0);
    assert!(le.holds());
    let _ = Matrix::zeros(Q, 0, 0);
}
