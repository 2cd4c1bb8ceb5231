use std::collections::BTreeMap;

use crate::cover_model::{Face, NaturalMap, Tuple};
use crate::exact_linalg::GradedMap;
use crate::functors::{gamma, sheafify_morphism, sheafify_with, twist, GlobalMorphism, Sheafified};
use crate::par;
use crate::twisted_core::{
    is_weak_equivalence, sign, solve_natural, twisted_null_homotopy, FaceMaps, Morphism, NatEquation, NatTerm,
    NatUnknown, TwistedComplex,
};

use super::ResolutionError;

/// `θ: E -> G` closed with `ψ·θ - φ = dμ`.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub theta: Morphism,
    pub homotopy: Morphism,
}

fn zero_at(field: crate::exact_linalg::Field, src: &crate::exact_linalg::GradedSpace, tgt: &crate::exact_linalg::GradedSpace, shift: i32) -> GradedMap {
    GradedMap::zero(field, src, tgt, shift)
}

fn local_d(t: &TwistedComplex, i: usize, f: Face) -> GradedMap {
    t.local_d(i, f)
}

/// Lifts `φ: E -> F` through the weak equivalence `ψ: G -> F`, Čech degree by degree.
pub fn factor_through(
    phi: &Morphism,
    e: &TwistedComplex,
    f: &TwistedComplex,
    psi: &Morphism,
    g: &TwistedComplex,
) -> Result<Factorization, ResolutionError> {
    let field = e.field();
    let nerve = e.nerve();
    if !is_weak_equivalence(psi, g, f).holds() {
        return Err(ResolutionError::NotWeakEquivalence);
    }
    if !phi.diff(&e.a, &f.a, nerve).is_zero() {
        return Err(ResolutionError::NotClosed);
    }
    let l = phi.deg();
    let (elo, ehi) = e.amplitude();
    let (glo, _) = g.amplitude();
    let (flo, _) = f.amplitude();
    let mut theta = Morphism::zero(field, l);
    let mut mu = Morphism::zero(field, l - 1);
    if elo > ehi {
        return Ok(Factorization { theta, homotopy: mu });
    }
    let bound = (l + ehi - glo.min(flo) + 1).max(phi.max_cech().map_or(0, |p| p as i32)) + 1;
    let sl = sign(field, l as i64);
    for p in 0..=bound.max(0) as usize {
        let tuples = nerve.tuples(p + 1, Face::EMPTY);
        let solved = par::map(&tuples, |t| {
            let (first, last) = (t[0], *t.last().unwrap());
            let ra = theta.diff_component(&e.a, &g.a, t);
            let mut rb = psi.compose_component(&theta, t);
            let dmu = mu.diff_component(&e.a, &f.a, t);
            let sp = sign(field, p as i64);
            let mut eqs = Vec::new();
            for fc in nerve.star(Face::of(t)) {
                let (es, gs, fs) = (e.family.space(last, fc), g.family.space(first, fc), f.family.space(first, fc));
                let mut r_b = rb.remove(&fc).unwrap_or_else(|| zero_at(field, es, fs, l - p as i32));
                if let Some(x) = phi.at(t, fc) {
                    r_b = r_b.sub(x);
                }
                if let Some(x) = dmu.get(&fc) {
                    r_b = r_b.sub(x);
                }
                let r_a = ra.get(&fc).cloned().unwrap_or_else(|| zero_at(field, es, gs, l + 1 - p as i32));
                let (c0, b0, a0) = (local_d(g, first, fc), local_d(f, first, fc), local_d(e, last, fc));
                let psi0 = psi
                    .at(&[first], fc)
                    .cloned()
                    .unwrap_or_else(|| zero_at(field, gs, fs, 0));
                // (A) (-1)^p c0 θ - (-1)^l θ a0 = -R_A
                eqs.push(NatEquation {
                    face: fc,
                    terms: vec![
                        NatTerm { unknown: 0, coeff: sp.clone(), left: Some(c0), right: None },
                        NatTerm { unknown: 0, coeff: -sl.clone(), left: None, right: Some(a0.clone()) },
                    ],
                    rhs: r_a.neg(),
                });
                // (B) ψ0 θ - (-1)^p b0 μ - (-1)^l μ a0 = -R_B
                eqs.push(NatEquation {
                    face: fc,
                    terms: vec![
                        NatTerm { unknown: 0, coeff: field.one(), left: Some(psi0), right: None },
                        NatTerm { unknown: 1, coeff: -sp.clone(), left: Some(b0), right: None },
                        NatTerm { unknown: 1, coeff: -sl.clone(), left: None, right: Some(a0) },
                    ],
                    rhs: r_b.neg(),
                });
            }
            let base = Face::of(t);
            let unknowns = [
                NatUnknown { base, src: e.family.get(last), tgt: g.family.get(first), shift: l - p as i32 },
                NatUnknown { base, src: e.family.get(last), tgt: f.family.get(first), shift: l - 1 - p as i32 },
            ];
            solve_natural(field, &unknowns, &eqs).ok_or_else(|| ResolutionError::LiftFailed(t.clone()))
        });
        for (t, r) in tuples.iter().zip(solved) {
            let mut v = r?;
            let m = v.pop().unwrap();
            let th = v.pop().unwrap();
            theta.add_faces(t, th);
            mu.add_faces(t, m);
        }
    }
    if !theta.diff(&e.a, &g.a, nerve).is_zero() {
        return Err(ResolutionError::Verification("lift is not closed".into()));
    }
    if psi.compose(&theta).sub(phi) != mu.diff(&e.a, &f.a, nerve) {
        return Err(ResolutionError::Verification("lift is not homotopic to the map".into()));
    }
    Ok(Factorization { theta, homotopy: mu })
}

/// Homotopy inverse `ψ` of `φ` with `φψ - id = dμ` and `ψφ - id = dλ`.
#[derive(Clone, Debug)]
pub struct HomotopyInverse {
    pub inverse: Morphism,
    pub right_homotopy: Morphism,
    pub left_homotopy: Morphism,
}

pub fn invert_weak_equivalence(phi: &Morphism, e: &TwistedComplex, f: &TwistedComplex) -> Result<HomotopyInverse, ResolutionError> {
    if !is_weak_equivalence(phi, e, f).holds() {
        return Err(ResolutionError::NotWeakEquivalence);
    }
    let nerve = e.nerve();
    let id_f = Morphism::identity(&f.family);
    let id_e = Morphism::identity(&e.family);
    let right = factor_through(&id_f, f, f, phi, e)?;
    let psi = right.theta;
    let mu = right.homotopy;
    let back = factor_through(&id_e, e, e, &psi, f)?;
    let (psi2, nu) = (back.theta, back.homotopy);
    // λ = ν - ψφν + ψμψ'
    let lambda = nu
        .sub(&psi.compose(phi).compose(&nu))
        .add(&psi.compose(&mu).compose(&psi2));
    if lambda.diff(&e.a, &e.a, nerve) != psi.compose(phi).sub(&id_e) {
        return Err(ResolutionError::Verification("left homotopy".into()));
    }
    if mu.diff(&f.a, &f.a, nerve) != phi.compose(&psi).sub(&id_f) {
        return Err(ResolutionError::Verification("right homotopy".into()));
    }
    Ok(HomotopyInverse {
        inverse: psi,
        right_homotopy: mu,
        left_homotopy: lambda,
    })
}

/// Twisted morphism realising a map of sheafifications, with certificates.
#[derive(Clone, Debug)]
pub struct Transfer {
    pub theta: Morphism,
    /// `H` natural with `d H + H d = S(θ) - f` on the truncated complexes, if one was found.
    pub presheaf_homotopy: Option<BTreeMap<Face, GradedMap>>,
    /// `ν` with `dν = θ - φ`, when `f = S(φ)` and `φ` was supplied.
    pub twisted_homotopy: Option<Morphism>,
}

/// `θ = γ_B · T(f) · ψ` with `ψ` a right inverse of `γ_A`.
pub fn hom_transfer(
    f: &GlobalMorphism,
    a: &TwistedComplex,
    b: &TwistedComplex,
    sa: &Sheafified,
    sb: &Sheafified,
    known: Option<&Morphism>,
) -> Result<Transfer, ResolutionError> {
    let field = a.field();
    let nerve = a.nerve();
    if f.deg != 0 {
        return Err(ResolutionError::NotClosed);
    }
    for fc in nerve.faces() {
        let (da, db) = (sa.complex.d.at(*fc), sb.complex.d.at(*fc));
        if db.compose(f.at(*fc)) != f.at(*fc).compose(da) {
            return Err(ResolutionError::NotClosed);
        }
    }
    let tsa = twist(&sa.complex, nerve);
    let tsb = twist(&sb.complex, nerve);
    let ga = gamma(a, sa);
    let gb = gamma(b, sb);
    let id_a = Morphism::identity(&a.family);
    let psi = factor_through(&id_a, a, a, &ga, &tsa)?.theta;
    let mut tf = Morphism::zero(field, 0);
    for i in 0..nerve.len() {
        for fc in nerve.star(Face::singleton(i)) {
            tf.add_at(&[i], fc, f.at(fc).clone());
        }
    }
    let theta = gb.compose(&tf).compose(&psi);
    if !theta.diff(&a.a, &b.a, nerve).is_zero() {
        return Err(ResolutionError::Verification("transferred map is not closed".into()));
    }
    let _ = &tsb;
    let presheaf_homotopy = presheaf_null_homotopy(&theta, f, a, b, sa, sb);
    let twisted_homotopy = known.and_then(|phi| twisted_null_homotopy(&theta.sub(phi), a, b));
    Ok(Transfer {
        theta,
        presheaf_homotopy,
        twisted_homotopy,
    })
}

/// Natural `H` of degree -1 with `d H + H d = S(θ) - f`.
pub fn presheaf_null_homotopy(
    theta: &Morphism,
    f: &GlobalMorphism,
    a: &TwistedComplex,
    b: &TwistedComplex,
    sa: &Sheafified,
    sb: &Sheafified,
) -> Option<BTreeMap<Face, GradedMap>> {
    let field = a.field();
    let s_theta = sheafify_morphism(theta, a, b, sa, sb).ok()?;
    let diff = NaturalMap {
        deg: 0,
        maps: f.maps.iter().map(|(fc, m)| (*fc, s_theta.at(*fc).sub(m))).collect(),
    };
    natural_null_homotopy(field, &diff, sa, sb)
}

pub fn natural_null_homotopy(
    field: crate::exact_linalg::Field,
    chi: &GlobalMorphism,
    sa: &Sheafified,
    sb: &Sheafified,
) -> Option<BTreeMap<Face, GradedMap>> {
    if chi.maps.values().all(|m| m.is_zero()) {
        return Some(
            chi.maps
                .keys()
                .map(|fc| (*fc, GradedMap::zero(field, sa.complex.sheaf.space(*fc), sb.complex.sheaf.space(*fc), -1)))
                .collect(),
        );
    }
    let unknowns = [NatUnknown {
        base: Face::EMPTY,
        src: &sa.complex.sheaf,
        tgt: &sb.complex.sheaf,
        shift: -1,
    }];
    let eqs: Vec<NatEquation> = chi
        .maps
        .iter()
        .map(|(fc, m)| NatEquation {
            face: *fc,
            terms: vec![
                NatTerm { unknown: 0, coeff: field.one(), left: Some(sb.complex.d.at(*fc).clone()), right: None },
                NatTerm { unknown: 0, coeff: field.one(), left: None, right: Some(sa.complex.d.at(*fc).clone()) },
            ],
            rhs: m.clone(),
        })
        .collect();
    solve_natural(field, &unknowns, &eqs).map(|mut v| v.remove(0))
}

/// Sheafifies both objects with a common truncation degree.
pub fn common_sheafify(a: &TwistedComplex, b: &TwistedComplex) -> Result<(Sheafified, Sheafified), ResolutionError> {
    let hi = crate::functors::default_top(a).max(crate::functors::default_top(b));
    let sa = sheafify_with(a, hi).map_err(|e| ResolutionError::Internal(e.to_string()))?;
    let sb = sheafify_with(b, hi).map_err(|e| ResolutionError::Internal(e.to_string()))?;
    Ok((sa, sb))
}

pub type Lift = (Tuple, FaceMaps);
