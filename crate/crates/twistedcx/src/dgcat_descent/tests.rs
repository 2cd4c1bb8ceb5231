use super::*;
use crate::cover_model::CoverNerve;
use crate::exact_linalg::{Field, GradedSpace};
use crate::functors::twist;
use crate::gen::{self, Rand};
use crate::resolution::twisted_resolution;
use crate::twisted_core::LocalFamily;

const Q: Field = Field::Rational;

fn random_map(rng: &mut Rand, src: &GradedSpace, tgt: &GradedSpace, shift: i32) -> GradedMap {
    let mut m = GradedMap::zero(Q, src, tgt, shift);
    for n in src.degrees() {
        let r = tgt.dim(n + shift);
        if r > 0 {
            m.set(n, gen::matrix(Q, rng, r, src.dim(n), 0.6));
        }
    }
    m
}

fn objects(rng: &mut Rand, k: usize) -> Vec<(TwistedComplex, FiberObject)> {
    let nerve = gen::interval();
    (0..k)
        .map(|_| {
            let t = gen::twisted(rng, &nerve, Q, 0, 1, 2);
            let o = restrict_to_fiber(&t).unwrap();
            (t, o)
        })
        .collect()
}

fn random_fiber_morphism(rng: &mut Rand, a: &(TwistedComplex, FiberObject), b: &(TwistedComplex, FiberObject), deg: i32) -> FiberMorphism {
    let phi = gen::constant_morphism(rng, &a.0.family, &b.0.family, deg, 1, 0.6);
    let mut m = restrict_morphism(&phi, &a.1, &b.1, SIGMA);
    let w = a.1.overlap;
    m.tau = m.tau.add(&random_map(rng, a.1.m.sheaf.space(w), b.1.n.sheaf.space(w), deg - 1));
    m
}

#[test]
fn twist_of_global_complex_glues_by_identity() {
    let nerve = gen::interval();
    let mut rng = gen::rng(3);
    let p = gen::presheaf_complex(&mut rng, &nerve, Q, 0, 2, 2, true);
    let t = twist(&p, &nerve);
    let o = restrict_to_fiber(&t).unwrap();
    assert_eq!(o.f, GradedMap::identity(Q, o.m.sheaf.space(o.overlap)));
    assert!(verify_fiber_object(&o));
}

#[test]
fn resolved_complexes_restrict_with_certificates() {
    let nerve = gen::interval();
    for seed in 0..10 {
        let mut rng = gen::rng(20 + seed);
        let p = gen::presheaf_complex(&mut rng, &nerve, Q, -1, 2, 2, true);
        let r = twisted_resolution(&p, &nerve).unwrap();
        let o = restrict_to_fiber(&r.resolved).unwrap();
        assert!(verify_fiber_object(&o), "seed {seed}");
        assert!(o.certificate.seeded, "seed {seed}");
    }
}

#[test]
fn degenerate_datum_is_rejected() {
    let nerve = gen::interval();
    let fam = LocalFamily::constant(&nerve, Q, &vec![GradedSpace::concentrated(0, 1); 2]);
    let t = TwistedComplex { family: fam, a: Morphism::zero(Q, 1), generalized: true };
    assert_eq!(restrict_to_fiber(&t), Err(FiberError::NotInvertible));
}

#[test]
fn wrong_cover_shape() {
    let mut rng = gen::rng(1);
    let t = gen::twisted(&mut rng, &CoverNerve::circle(), Q, 0, 1, 1);
    assert_eq!(restrict_to_fiber(&t), Err(FiberError::WrongCoverShape(3)));
    let nerve = CoverNerve::with_faces(2, &[&[0], &[1]]);
    let t = gen::twisted(&mut rng, &nerve, Q, 0, 1, 1);
    assert_eq!(restrict_to_fiber(&t), Err(FiberError::WrongCoverShape(2)));
}

#[test]
fn unit_associativity_and_square_zero() {
    let mut rng = gen::rng(8);
    for _ in 0..5 {
        let obs = objects(&mut rng, 4);
        let w = obs[0].1.overlap;
        let m1 = random_fiber_morphism(&mut rng, &obs[0], &obs[1], 1);
        let m2 = random_fiber_morphism(&mut rng, &obs[1], &obs[2], -1);
        let m3 = random_fiber_morphism(&mut rng, &obs[2], &obs[3], 0);
        assert_eq!(fiber_compose(&FiberMorphism::identity(&obs[1].1), &m1, w).unwrap(), m1);
        assert_eq!(fiber_compose(&m1, &FiberMorphism::identity(&obs[0].1), w).unwrap(), m1);
        let left = fiber_compose(&fiber_compose(&m3, &m2, w).unwrap(), &m1, w).unwrap();
        let right = fiber_compose(&m3, &fiber_compose(&m2, &m1, w).unwrap(), w).unwrap();
        assert_eq!(left, right);
        let d1 = fiber_differential(&m1, &obs[0].1, &obs[1].1);
        assert!(fiber_differential(&d1, &obs[0].1, &obs[1].1).is_zero());
        assert!(fiber_differential(&FiberMorphism::identity(&obs[0].1), &obs[0].1, &obs[0].1).is_zero());
        // Leibniz: d(m2 m1) = d(m2) m1 + (-1)^{|m2|} m2 d(m1)
        let lhs = fiber_differential(&fiber_compose(&m2, &m1, w).unwrap(), &obs[0].1, &obs[2].1);
        let d2 = fiber_differential(&m2, &obs[1].1, &obs[2].1);
        let a = fiber_compose(&d2, &m1, w).unwrap();
        let b = fiber_compose(&m2, &d1, w).unwrap();
        let b = FiberMorphism { deg: b.deg, mu: b.mu.scale(&sign(Q, -1)), nu: b.nu.scale(&sign(Q, -1)), tau: b.tau.neg() };
        assert_eq!(lhs, a.add(&b));
    }
}

#[test]
fn tau_only_morphism_has_minus_d_tau() {
    let mut rng = gen::rng(4);
    let obs = objects(&mut rng, 2);
    let w = obs[0].1.overlap;
    let tau = random_map(&mut rng, obs[0].1.m.sheaf.space(w), obs[1].1.n.sheaf.space(w), 0);
    let m = FiberMorphism {
        deg: 1,
        mu: NaturalMap::zero(Q, &obs[0].1.m.sheaf, &obs[1].1.m.sheaf, 1),
        nu: NaturalMap::zero(Q, &obs[0].1.n.sheaf, &obs[1].1.n.sheaf, 1),
        tau: tau.clone(),
    };
    let d = fiber_differential(&m, &obs[0].1, &obs[1].1);
    assert!(d.mu.is_zero() && d.nu.is_zero());
    let dt = obs[1].1.n_at_overlap().compose(&tau).sub(&tau.compose(obs[0].1.m_at_overlap()));
    assert_eq!(d.tau, dt.neg());
}

#[test]
fn literal_sign_pattern_is_not_a_differential() {
    // dτ + f₂μ - (-1)^k ν f₁ squares to a nonzero map on some sample
    let mut rng = gen::rng(12);
    let literal = |m: &FiberMorphism, s: &FiberObject, t: &FiberObject| {
        let w = s.overlap;
        let mut r = fiber_differential(m, s, t);
        let dtau = homotopy_like(&m.tau, s.m_at_overlap(), t.n_at_overlap());
        r.tau = dtau
            .add(&t.f.compose(m.mu.at(w)))
            .axpy(&sign(Q, m.deg as i64 + 1), &m.nu.at(w).compose(&s.f));
        r
    };
    let mut nonzero = false;
    for _ in 0..5 {
        let obs = objects(&mut rng, 2);
        let m = random_fiber_morphism(&mut rng, &obs[0], &obs[1], 0);
        nonzero |= !literal(&literal(&m, &obs[0].1, &obs[1].1), &obs[0].1, &obs[1].1).is_zero();
    }
    assert!(nonzero);
}

#[test]
fn sigma_is_determined_and_stable() {
    let mut rng = gen::rng(30);
    let mut samples = Vec::new();
    let nerve = gen::interval();
    for k in [-1, 0, 1] {
        let e = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
        let f = gen::twisted(&mut rng, &nerve, Q, 0, 1, 2);
        let phi = gen::constant_morphism(&mut rng, &e.family, &f.family, k, 1, 0.7);
        samples.push((phi, e, f));
    }
    assert_eq!(determine_sigma(&samples).unwrap(), vec![SIGMA]);
    assert_eq!(determine_sigma(&samples).unwrap(), vec![SIGMA]);
}

#[test]
fn restriction_respects_composition() {
    let mut rng = gen::rng(31);
    let nerve = gen::interval();
    let ts: Vec<TwistedComplex> = (0..3).map(|_| gen::twisted(&mut rng, &nerve, Q, 0, 1, 2)).collect();
    let os: Vec<FiberObject> = ts.iter().map(|t| restrict_to_fiber(t).unwrap()).collect();
    let p1 = gen::constant_morphism(&mut rng, &ts[0].family, &ts[1].family, 1, 1, 0.7);
    let p2 = gen::constant_morphism(&mut rng, &ts[1].family, &ts[2].family, -1, 1, 0.7);
    let lhs = restrict_morphism(&p2.compose(&p1), &os[0], &os[2], SIGMA);
    let rhs = fiber_compose(
        &restrict_morphism(&p2, &os[1], &os[2], SIGMA),
        &restrict_morphism(&p1, &os[0], &os[1], SIGMA),
        os[0].overlap,
    )
    .unwrap();
    assert_eq!(lhs, rhs);
}
