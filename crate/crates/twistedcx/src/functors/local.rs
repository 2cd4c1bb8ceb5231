use std::collections::BTreeMap;

use crate::cover_model::{CoverNerve, Face, NaturalMap};
use crate::exact_linalg::{is_quasi_iso, GradedMap, Matrix};
use crate::par;
use crate::twisted_core::{is_weak_equivalence, sign, Cochain, Morphism, TwistedComplex};

use super::sheafify::{
    sheafify_morphism, sheafify_with, twist, FunctorError, GlobalComplex, GlobalMorphism, Sheafified,
};

/// `τ: P -> S T(P)`, the Čech-degree-0 embedding by restriction to `σ ∪ {i0}`.
pub fn tau(p: &GlobalComplex, stp: &Sheafified) -> GlobalMorphism {
    let field = p.field();
    let faces: Vec<Face> = p.sheaf.domain().to_vec();
    let maps = par::map(&faces, |f| {
        let (src, tgt) = (p.sheaf.space(*f), stp.complex.sheaf.space(*f));
        let mut m = GradedMap::zero(field, src, tgt, 0);
        for n in src.degrees() {
            if tgt.dim(n) == 0 {
                continue;
            }
            let mut trip = Vec::new();
            for b in stp.blocks(*f, n).iter().filter(|b| b.tuple.len() == 1) {
                let r = p.sheaf.restriction(*f, f.with(b.tuple[0])).at(n);
                trip.extend(r.entries().map(|(i, j, v)| (b.offset + i, j, v.clone())));
            }
            let raw = Matrix::from_triplets(field, stp.raw_dim(*f, n), src.dim(n), trip);
            m.set(n, stp.from_raw(*f, n, &raw).expect("image of τ consists of cycles"));
        }
        m
    });
    NaturalMap {
        deg: 0,
        maps: faces.into_iter().zip(maps).collect(),
    }
}

/// Whether a natural map of complexes is a quasi-isomorphism at every face.
pub fn is_facewise_quasi_iso(m: &GlobalMorphism, src: &GlobalComplex, tgt: &GlobalComplex) -> bool {
    src.sheaf
        .domain()
        .iter()
        .all(|f| is_quasi_iso(m.at(*f), src.d.at(*f), tgt.d.at(*f)).unwrap_or(false))
}

/// Row selection of block `t` from the truncated coordinates of `S^n(f)`.
fn project(s: &Sheafified, f: Face, n: i32, t: &[usize]) -> Option<Matrix> {
    let b = s.block(f, n, t)?;
    let rows: Vec<usize> = (b.offset..b.offset + b.dim).collect();
    let all: Vec<usize> = (0..s.raw_dim(f, n)).collect();
    let sel = Matrix::identity(s.field(), s.raw_dim(f, n)).select(&rows, &all);
    Some(if n == s.hi { sel.mul(&s.cycles[&f]) } else { sel })
}

/// `γ: T S(E) -> E`: the component at `(i0..ip)` projects onto that tuple's block.
pub fn gamma(t: &TwistedComplex, s: &Sheafified) -> Morphism {
    let field = t.field();
    let nerve = t.nerve();
    let mut g = Morphism::zero(field, 0);
    for p in 0..=(s.hi - s.lo).max(0) as usize {
        for tu in nerve.tuples(p + 1, Face::EMPTY) {
            for f in nerve.star(Face::of(&tu)) {
                let (src, tgt) = (s.complex.sheaf.space(f), t.family.space(tu[0], f));
                let mut m = GradedMap::zero(field, src, tgt, -(p as i32));
                for n in src.degrees() {
                    if tgt.dim(n - p as i32) == 0 {
                        continue;
                    }
                    if let Some(x) = project(s, f, n, &tu) {
                        m.set(n, x);
                    }
                }
                if !m.is_zero() {
                    g.add_at(&tu, f, m);
                }
            }
        }
    }
    g
}

/// The homotopy equivalence between `S(E)` and `E_j` on the star of `j`.
#[derive(Clone, Debug)]
pub struct LocalEquivalence {
    pub index: usize,
    pub f: GlobalMorphism,
    pub g: GlobalMorphism,
    pub h: GlobalMorphism,
    pub f_chain: bool,
    pub g_chain: bool,
    /// `f∘g = a^{1,0}_{jj}`
    pub fg_is_ajj: bool,
    /// `d h + h d = -id + g∘f`
    pub homotopy: bool,
}

impl LocalEquivalence {
    pub fn holds(&self) -> bool {
        self.f_chain && self.g_chain && self.fg_is_ajj && self.homotopy
    }
}

pub fn local_equivalence(t: &TwistedComplex, s: &Sheafified, j: usize) -> LocalEquivalence {
    let field = t.field();
    let star = t.nerve().star(Face::singleton(j));
    let ej = t.family.get(j);
    let parts = par::map(&star, |sg| {
        let sp = s.complex.sheaf.space(*sg);
        let es = ej.space(*sg);
        let mut f = GradedMap::zero(field, sp, es, 0);
        let mut g = GradedMap::zero(field, es, sp, 0);
        let mut h = GradedMap::zero(field, sp, sp, -1);
        for n in sp.degrees() {
            if es.dim(n) > 0 {
                if let Some(x) = project(s, *sg, n, &[j]) {
                    f.set(n, x);
                }
                // (g e)_t = (-1)^p a_{t j}(e|F)
                let mut trip = Vec::new();
                for b in s.blocks(*sg, n) {
                    let mut tj = b.tuple.clone();
                    tj.push(j);
                    let p = b.tuple.len() as i64 - 1;
                    let big = Face::of(&b.tuple).union(*sg);
                    let Some(a) = t.a.at(&tj, big) else {
                        continue;
                    };
                    let x = a.at(n).mul(&ej.restriction(*sg, big).at(n)).scale(&sign(field, p));
                    trip.extend(x.entries().map(|(r, c, v)| (b.offset + r, c, v.clone())));
                }
                let raw = Matrix::from_triplets(field, s.raw_dim(*sg, n), es.dim(n), trip);
                g.set(n, s.from_raw(*sg, n, &raw).expect("g lands below the truncation"));
            }
            // (h c)_t = (-1)^k c_{t j}
            if sp.dim(n - 1) > 0 {
                let mut trip = Vec::new();
                for b in s.blocks(*sg, n - 1) {
                    let mut tj = b.tuple.clone();
                    tj.push(j);
                    if let Some(src) = s.block(*sg, n, &tj) {
                        let sgn = sign(field, b.tuple.len() as i64 - 1);
                        trip.extend((0..b.dim).map(|k| (b.offset + k, src.offset + k, sgn.clone())));
                    }
                }
                let raw = Matrix::from_triplets(field, s.raw_dim(*sg, n - 1), s.raw_dim(*sg, n), trip);
                let x = s.to_raw_right(*sg, n, &raw);
                h.set(n, s.from_raw(*sg, n - 1, &x).expect("h lands below the truncation"));
            }
        }
        (f, g, h)
    });
    let mut fm = BTreeMap::new();
    let mut gm = BTreeMap::new();
    let mut hm = BTreeMap::new();
    let (mut f_chain, mut g_chain, mut fg_is_ajj, mut homotopy) = (true, true, true, true);
    for (sg, (f, g, h)) in star.iter().zip(parts) {
        let ds = s.complex.d.at(*sg);
        let de = t.local_d(j, *sg);
        f_chain &= f.compose(ds) == de.compose(&f);
        g_chain &= ds.compose(&g) == g.compose(&de);
        fg_is_ajj &= f.compose(&g) == t.a_at(&[j, j], *sg);
        let lhs = ds.compose(&h).add(&h.compose(ds));
        let rhs = g.compose(&f).sub(&GradedMap::identity(field, s.complex.sheaf.space(*sg)));
        homotopy &= lhs == rhs;
        fm.insert(*sg, f);
        gm.insert(*sg, g);
        hm.insert(*sg, h);
    }
    LocalEquivalence {
        index: j,
        f: NaturalMap { deg: 0, maps: fm },
        g: NaturalMap { deg: 0, maps: gm },
        h: NaturalMap { deg: -1, maps: hm },
        f_chain,
        g_chain,
        fg_is_ajj,
        homotopy,
    }
}

impl Sheafified {
    /// Precomposes a raw-source matrix with the cycle basis when the source degree is the top.
    pub fn to_raw_right(&self, f: Face, n: i32, m: &Matrix) -> Matrix {
        if n == self.hi {
            m.mul(&self.cycles[&f])
        } else {
            m.clone()
        }
    }
}

/// Outcome of `S(γ)∘τ = id`, listing (face, degree) where it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjunctionReport {
    pub checked: usize,
    pub failures: Vec<(Face, i32)>,
}

impl AdjunctionReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates `S(γ_E)(τ_{S(E)}(c))` on every basis vector `c` of `S(E)` and compares with `c`.
pub fn verify_adjunction(t: &TwistedComplex, s: &Sheafified) -> AdjunctionReport {
    let field = t.field();
    let nerve = t.nerve();
    let ts = twist(&s.complex, nerve);
    let g = gamma(t, s);
    let mut jobs = Vec::new();
    for f in nerve.faces() {
        for n in s.complex.sheaf.space(*f).degrees() {
            jobs.push((*f, n));
        }
    }
    let results = par::map(&jobs, |(f, n)| {
        let dim = s.dim(*f, *n);
        let mut c = Cochain::zero(field, *f, *n, dim);
        for i in 0..nerve.len() {
            let big = f.with(i);
            if nerve.is_face(big) && s.dim(big, *n) > 0 {
                c.add_at(&[i], s.complex.sheaf.restriction(*f, big).at(*n));
            }
        }
        let out = Cochain::act(&g, &c, &ts.family);
        let got = s.from_cochain(*f, *n, &out);
        got == s.to_raw(*f, *n, &Matrix::identity(field, dim))
    });
    AdjunctionReport {
        checked: jobs.len(),
        failures: jobs.into_iter().zip(results).filter(|(_, ok)| !ok).map(|(j, _)| j).collect(),
    }
}

/// Both routes of the weak-equivalence test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeqCriterion {
    pub twisted: bool,
    pub sheafified: bool,
}

impl WeqCriterion {
    pub fn agree(&self) -> bool {
        self.twisted == self.sheafified
    }
}

/// `is_weak_equivalence(φ)` against facewise acyclicity of the cone of `S(φ)`.
pub fn weq_criterion(phi: &Morphism, e: &TwistedComplex, f: &TwistedComplex) -> Result<WeqCriterion, FunctorError> {
    let twisted = is_weak_equivalence(phi, e, f).holds();
    if phi.deg() != 0 {
        return Err(FunctorError::WrongDegree {
            expected: 0,
            got: phi.deg(),
        });
    }
    let hi = super::sheafify::default_top(e).max(super::sheafify::default_top(f));
    let se = sheafify_with(e, hi)?;
    let sf = sheafify_with(f, hi)?;
    let sheafified = match sheafify_morphism(phi, e, f, &se, &sf) {
        Ok(m) => is_facewise_quasi_iso(&m, &se.complex, &sf.complex),
        Err(FunctorError::NotClosed) => false,
        Err(e) => return Err(e),
    };
    Ok(WeqCriterion { twisted, sheafified })
}

/// Cohomology of `S(E)` at every face.
pub fn sheaf_cohomology(s: &Sheafified, nerve: &CoverNerve) -> BTreeMap<Face, BTreeMap<i32, usize>> {
    nerve
        .faces()
        .iter()
        .map(|f| (*f, s.complex.cohomology_at(*f).expect("d² = 0")))
        .collect()
}

