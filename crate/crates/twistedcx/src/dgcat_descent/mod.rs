//! Homotopy fiber product for a two-open cover and the restriction functor into it.
//!
//! Objects are `(M, N, f)` with `M` a complex on the star of the first open, `N` one on the
//! star of the second and `f: M(W) -> N(W)` a closed degree-0 map at the overlap `W`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cover_model::{Face, NaturalMap, PresheafComplex};
use crate::exact_linalg::{homotopy_boundary, minimize_complex, null_homotopy, GradedMap};
use crate::twisted_core::{nondegenerate_at, sign, Morphism, TwistedComplex};

#[cfg(test)]
mod tests;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("cover must have exactly two opens with nonempty overlap, got {0} opens")]
    WrongCoverShape(usize),
    #[error("gluing map is not closed")]
    NotClosed,
    #[error("gluing map is not invertible up to homotopy")]
    NotInvertible,
    #[error("morphisms are not composable")]
    Mismatch,
}

/// `g` with `d p + p d = g f - id` on `M(W)` and `d q + q d = f g - id` on `N(W)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseCertificate {
    pub inverse: GradedMap,
    pub left: GradedMap,
    pub right: GradedMap,
    /// Whether the second-order terms of the datum gave the homotopies directly.
    pub seeded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberObject {
    pub overlap: Face,
    pub m: PresheafComplex,
    pub n: PresheafComplex,
    pub f: GradedMap,
    pub certificate: InverseCertificate,
}

impl FiberObject {
    pub fn m_at_overlap(&self) -> &GradedMap {
        self.m.d.at(self.overlap)
    }

    pub fn n_at_overlap(&self) -> &GradedMap {
        self.n.d.at(self.overlap)
    }
}

/// `(μ, ν, τ)` of degree `deg`; `τ` has degree `deg - 1` and lives at the overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberMorphism {
    pub deg: i32,
    pub mu: NaturalMap,
    pub nu: NaturalMap,
    pub tau: GradedMap,
}

impl FiberMorphism {
    pub fn identity(obj: &FiberObject) -> FiberMorphism {
        let field = obj.f.field();
        FiberMorphism {
            deg: 0,
            mu: NaturalMap::identity(&obj.m.sheaf),
            nu: NaturalMap::identity(&obj.n.sheaf),
            tau: GradedMap::zero(field, obj.m.sheaf.space(obj.overlap), obj.n.sheaf.space(obj.overlap), -1),
        }
    }

    pub fn add(&self, o: &FiberMorphism) -> FiberMorphism {
        FiberMorphism {
            deg: self.deg,
            mu: self.mu.add(&o.mu),
            nu: self.nu.add(&o.nu),
            tau: self.tau.add(&o.tau),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mu.is_zero() && self.nu.is_zero() && self.tau.is_zero()
    }
}

/// `d μ = d₂ μ - (-1)^k μ d₁` facewise.
pub fn natural_diff(mu: &NaturalMap, d1: &NaturalMap, d2: &NaturalMap) -> NaturalMap {
    let maps = mu
        .maps
        .iter()
        .map(|(f, m)| (*f, homotopy_like(m, d1.at(*f), d2.at(*f))))
        .collect();
    NaturalMap { deg: mu.deg + 1, maps }
}

/// `(μ'μ, ν'ν, τ'μ + (-1)^{k'} ν'τ)` with `k'` the degree of `m2`.
pub fn fiber_compose(m2: &FiberMorphism, m1: &FiberMorphism, w: Face) -> Result<FiberMorphism, FiberError> {
    let composable = |a: &NaturalMap, b: &NaturalMap| {
        a.maps.len() == b.maps.len() && a.maps.iter().all(|(f, x)| b.maps.get(f).is_some_and(|y| x.src() == y.tgt()))
    };
    if !composable(&m2.mu, &m1.mu) || !composable(&m2.nu, &m1.nu) || m2.tau.src() != m1.mu.at(w).tgt() {
        return Err(FiberError::Mismatch);
    }
    let field = m1.tau.field();
    let s = sign(field, m2.deg as i64);
    let tau = m2.tau.compose(m1.mu.at(w)).axpy(&s, &m2.nu.at(w).compose(&m1.tau));
    Ok(FiberMorphism {
        deg: m1.deg + m2.deg,
        mu: m2.mu.compose(&m1.mu),
        nu: m2.nu.compose(&m1.nu),
        tau,
    })
}

/// `d(μ, ν, τ) = (dμ, dν, -dτ + f₂ μ - ν f₁)`.
pub fn fiber_differential(m: &FiberMorphism, src: &FiberObject, tgt: &FiberObject) -> FiberMorphism {
    let w = src.overlap;
    let dtau = homotopy_like(&m.tau, src.m_at_overlap(), tgt.n_at_overlap());
    let tau = dtau
        .neg()
        .add(&tgt.f.compose(m.mu.at(w)))
        .sub(&m.nu.at(w).compose(&src.f));
    FiberMorphism {
        deg: m.deg + 1,
        mu: natural_diff(&m.mu, &src.m.d, &tgt.m.d),
        nu: natural_diff(&m.nu, &src.n.d, &tgt.n.d),
        tau,
    }
}

/// `d₂ x - (-1)^{|x|} x d₁` for a single graded map.
fn homotopy_like(x: &GradedMap, d1: &GradedMap, d2: &GradedMap) -> GradedMap {
    let s = sign(x.field(), x.shift() as i64 + 1);
    d2.compose(x).axpy(&s, &x.compose(d1))
}

fn local_complex(t: &TwistedComplex, i: usize) -> PresheafComplex {
    let sheaf = t.family.get(i).clone();
    let maps: BTreeMap<Face, GradedMap> = sheaf.domain().iter().map(|f| (*f, t.local_d(i, *f))).collect();
    PresheafComplex { sheaf, d: NaturalMap { deg: 1, maps } }
}

/// `(E_U, a_U)`, `(E_V, a_V)` and `f = a^{1,0}_{VU}` at the overlap, with an inverse certificate.
pub fn restrict_to_fiber(t: &TwistedComplex) -> Result<FiberObject, FiberError> {
    let nerve = t.nerve();
    let w = Face::of(&[0, 1]);
    if nerve.len() != 2 || !nerve.is_face(w) {
        return Err(FiberError::WrongCoverShape(nerve.len()));
    }
    let field = t.field();
    let m = local_complex(t, 0);
    let n = local_complex(t, 1);
    let (dm, dn) = (m.d.at(w).clone(), n.d.at(w).clone());
    let f = t.a_at(&[1, 0], w);
    if dn.compose(&f) != f.compose(&dm) {
        return Err(FiberError::NotClosed);
    }
    let id_m = GradedMap::identity(field, m.sheaf.space(w));
    let id_n = GradedMap::identity(field, n.sheaf.space(w));

    // seeds: g = a_{UV}, homotopies -(w_i + a^{2,-1}_{i j i}) from the Čech-2 MC equation
    let seed = || -> Option<InverseCertificate> {
        let g = t.a_at(&[0, 1], w);
        let wu = nondegenerate_at(t, 0).witness?.remove(&w)?;
        let wv = nondegenerate_at(t, 1).witness?.remove(&w)?;
        let left = wu.add(&t.a_at(&[0, 1, 0], w)).neg();
        let right = wv.add(&t.a_at(&[1, 0, 1], w)).neg();
        let ok = dm.compose(&g) == g.compose(&dn)
            && homotopy_boundary(&left, &dm, &dm) == g.compose(&f).sub(&id_m)
            && homotopy_boundary(&right, &dn, &dn) == f.compose(&g).sub(&id_n);
        ok.then_some(InverseCertificate { inverse: g, left, right, seeded: true })
    };
    let certificate = match seed() {
        Some(c) => c,
        None => {
            let mm = minimize_complex(m.sheaf.space(w), &dm).map_err(|_| FiberError::NotClosed)?;
            let mn = minimize_complex(n.sheaf.space(w), &dn).map_err(|_| FiberError::NotClosed)?;
            let hf = mn.proj.compose(&f).compose(&mm.incl);
            let mut hinv = GradedMap::zero(field, &mn.space, &mm.space, 0);
            for k in mm.space.degrees().chain(mn.space.degrees()) {
                let x = hf.at(k);
                if x.rows() != x.cols() {
                    return Err(FiberError::NotInvertible);
                }
                if x.rows() > 0 {
                    hinv.set(k, x.inverse().ok_or(FiberError::NotInvertible)?);
                }
            }
            let g = mm.incl.compose(&hinv).compose(&mn.proj);
            let left = null_homotopy(&g.compose(&f).sub(&id_m), &dm, &dm).ok_or(FiberError::NotInvertible)?;
            let right = null_homotopy(&f.compose(&g).sub(&id_n), &dn, &dn).ok_or(FiberError::NotInvertible)?;
            InverseCertificate { inverse: g, left, right, seeded: false }
        }
    };
    Ok(FiberObject { overlap: w, m, n, f, certificate })
}

/// Re-checks the certificate of a fiber object.
pub fn verify_fiber_object(obj: &FiberObject) -> bool {
    let (dm, dn) = (obj.m_at_overlap(), obj.n_at_overlap());
    let field = obj.f.field();
    let c = &obj.certificate;
    let id_m = GradedMap::identity(field, obj.m.sheaf.space(obj.overlap));
    let id_n = GradedMap::identity(field, obj.n.sheaf.space(obj.overlap));
    obj.f.shift() == 0
        && dn.compose(&obj.f) == obj.f.compose(dm)
        && dm.compose(&c.inverse) == c.inverse.compose(dn)
        && homotopy_boundary(&c.left, dm, dm) == c.inverse.compose(&obj.f).sub(&id_m)
        && homotopy_boundary(&c.right, dn, dn) == obj.f.compose(&c.inverse).sub(&id_n)
}

/// Sign on the `τ` slot of the restriction functor on morphisms.
pub const SIGMA: i64 = 1;

fn component(phi: &Morphism, i: usize, obj_src: &PresheafComplex, obj_tgt: &PresheafComplex) -> NaturalMap {
    let field = phi.field();
    let maps = obj_src
        .sheaf
        .domain()
        .iter()
        .map(|f| {
            let m = phi
                .at(&[i], *f)
                .cloned()
                .unwrap_or_else(|| GradedMap::zero(field, obj_src.sheaf.space(*f), obj_tgt.sheaf.space(*f), phi.deg()));
            (*f, m)
        })
        .collect();
    NaturalMap { deg: phi.deg(), maps }
}

/// `(φ^{0}_U, φ^{0}_V, σ φ^{1}_{VU})`.
pub fn restrict_morphism(phi: &Morphism, src: &FiberObject, tgt: &FiberObject, sigma: i64) -> FiberMorphism {
    let field = phi.field();
    let w = src.overlap;
    let tau = phi
        .at(&[1, 0], w)
        .cloned()
        .unwrap_or_else(|| GradedMap::zero(field, src.m.sheaf.space(w), tgt.n.sheaf.space(w), phi.deg() - 1))
        .scale(&sign(field, if sigma < 0 { 1 } else { 0 }));
    FiberMorphism {
        deg: phi.deg(),
        mu: component(phi, 0, &src.m, &tgt.m),
        nu: component(phi, 1, &src.n, &tgt.n),
        tau,
    }
}

/// The signs in `{+1, -1}` for which `d R(φ) = R(dφ)` on every sample.
pub fn determine_sigma(samples: &[(Morphism, TwistedComplex, TwistedComplex)]) -> Result<Vec<i64>, FiberError> {
    let mut ok = vec![true, true];
    for (phi, e, f) in samples {
        let (se, sf) = (restrict_to_fiber(e)?, restrict_to_fiber(f)?);
        let dphi = phi.diff(&e.a, &f.a, e.nerve());
        for (k, s) in [1i64, -1].iter().enumerate() {
            let lhs = fiber_differential(&restrict_morphism(phi, &se, &sf, *s), &se, &sf);
            ok[k] &= lhs == restrict_morphism(&dphi, &se, &sf, *s);
        }
    }
    Ok([1, -1].into_iter().zip(ok).filter(|(_, o)| *o).map(|(s, _)| s).collect())
}
