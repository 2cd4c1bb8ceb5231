use std::collections::BTreeMap;

use crate::cover_model::{CoverNerve, Face, Tuple};
use crate::exact_linalg::{Field, GradedMap, Scalar};
use crate::par;

use super::family::LocalFamily;

/// `(-1)^e` in the field.
pub fn sign(field: Field, e: i64) -> Scalar {
    field.sign(e.rem_euclid(2) == 1)
}

pub type FaceMaps = BTreeMap<Face, GradedMap>;

/// Bigraded morphism of total degree `deg`. The component at a tuple of length p+1
/// has sheaf degree `deg - p`, maps the local object at the last index to the one at
/// the first index, and is stored at the faces containing the tuple's set.
/// Zero maps are never stored, so equality is semantic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    field: Field,
    deg: i32,
    comps: BTreeMap<Tuple, FaceMaps>,
}

fn add_into(acc: &mut FaceMaps, f: Face, m: GradedMap) {
    match acc.remove(&f) {
        Some(cur) => {
            let s = cur.add(&m);
            if !s.is_zero() {
                acc.insert(f, s);
            }
        }
        None => {
            if !m.is_zero() {
                acc.insert(f, m);
            }
        }
    }
}

impl Morphism {
    pub fn zero(field: Field, deg: i32) -> Morphism {
        Morphism {
            field,
            deg,
            comps: BTreeMap::new(),
        }
    }

    /// Identity: `id` at every singleton tuple.
    pub fn identity(fam: &LocalFamily) -> Morphism {
        let mut m = Morphism::zero(fam.field(), 0);
        for i in 0..fam.len() {
            let p = fam.get(i);
            for f in p.domain() {
                m.add_at(&[i], *f, GradedMap::identity(fam.field(), p.space(*f)));
            }
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn deg(&self) -> i32 {
        self.deg
    }

    pub fn comps(&self) -> &BTreeMap<Tuple, FaceMaps> {
        &self.comps
    }

    pub fn get(&self, t: &[usize]) -> Option<&FaceMaps> {
        self.comps.get(t)
    }

    pub fn at(&self, t: &[usize], f: Face) -> Option<&GradedMap> {
        self.comps.get(t).and_then(|m| m.get(&f))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Adds `m` to the component at `(t, f)`.
    pub fn add_at(&mut self, t: &[usize], f: Face, m: GradedMap) {
        assert_eq!(m.shift(), self.deg - (t.len() as i32 - 1), "component degree at {t:?}");
        let e = self.comps.entry(t.to_vec()).or_default();
        add_into(e, f, m);
        if e.is_empty() {
            self.comps.remove(t);
        }
    }

    pub fn add_faces(&mut self, t: &[usize], maps: FaceMaps) {
        for (f, m) in maps {
            self.add_at(t, f, m);
        }
    }

    /// Replaces a whole component.
    pub fn set_component(&mut self, t: &[usize], maps: FaceMaps) {
        self.comps.remove(t);
        self.add_faces(t, maps);
    }

    /// Largest Čech degree with a nonzero component.
    pub fn max_cech(&self) -> Option<usize> {
        self.comps.keys().map(|t| t.len() - 1).max()
    }

    /// Components of one Čech degree.
    pub fn cech_part(&self, p: usize) -> Morphism {
        Morphism {
            field: self.field,
            deg: self.deg,
            comps: self
                .comps
                .iter()
                .filter(|(t, _)| t.len() == p + 1)
                .map(|(t, m)| (t.clone(), m.clone()))
                .collect(),
        }
    }

    pub fn axpy(&self, x: &Scalar, o: &Morphism) -> Morphism {
        assert_eq!(self.deg, o.deg, "sum of morphisms of different degree");
        let mut r = self.clone();
        for (t, maps) in &o.comps {
            for (f, m) in maps {
                r.add_at(t, *f, m.scale(x));
            }
        }
        r
    }

    pub fn add(&self, o: &Morphism) -> Morphism {
        self.axpy(&self.field.one(), o)
    }

    pub fn sub(&self, o: &Morphism) -> Morphism {
        self.axpy(&self.field.from_i64(-1), o)
    }

    pub fn scale(&self, x: &Scalar) -> Morphism {
        Morphism::zero(self.field, self.deg).axpy(x, self)
    }

    pub fn neg(&self) -> Morphism {
        self.scale(&self.field.from_i64(-1))
    }

    /// Componentwise map, keeping the tuple. `f` receives the tuple and must preserve shift.
    pub fn map_components(&self, deg: i32, f: impl Fn(&[usize], Face, &GradedMap) -> GradedMap) -> Morphism {
        let mut r = Morphism::zero(self.field, deg);
        for (t, maps) in &self.comps {
            for (face, m) in maps {
                r.add_at(t, *face, f(t, *face, m));
            }
        }
        r
    }

    /// `(u·v)_{i0..i_{p+r}} = (-1)^{qr} u_{i0..ip} ∘ v_{ip..i_{p+r}}`, evaluated on common faces.
    pub fn compose(&self, v: &Morphism) -> Morphism {
        let mut by_first: BTreeMap<usize, Vec<(&Tuple, &FaceMaps)>> = BTreeMap::new();
        for (t, m) in &v.comps {
            by_first.entry(t[0]).or_default().push((t, m));
        }
        let items: Vec<(&Tuple, &FaceMaps)> = self.comps.iter().collect();
        let field = self.field;
        let udeg = self.deg;
        let parts = par::map(&items, |(t1, m1)| {
            let mut out: Vec<(Tuple, Face, GradedMap)> = Vec::new();
            let q = udeg as i64 - (t1.len() as i64 - 1);
            if let Some(list) = by_first.get(t1.last().unwrap()) {
                for (t2, m2) in list {
                    let r = t2.len() as i64 - 1;
                    let s = sign(field, q * r);
                    let mut t = (*t1).clone();
                    t.extend_from_slice(&t2[1..]);
                    for (f, a) in m1.iter() {
                        if let Some(b) = m2.get(f) {
                            out.push((t.clone(), *f, a.compose(b).scale(&s)));
                        }
                    }
                }
            }
            out
        });
        let mut r = Morphism::zero(field, self.deg + v.deg);
        for part in parts {
            for (t, f, m) in part {
                r.add_at(&t, f, m);
            }
        }
        r
    }

    /// Single component of `u·v` at `t`, on the faces where some term is defined.
    pub fn compose_component(&self, v: &Morphism, t: &[usize]) -> FaceMaps {
        let mut acc = FaceMaps::new();
        let p = t.len() - 1;
        for l in 0..=p {
            let (t1, t2) = (&t[..=l], &t[l..]);
            let (Some(m1), Some(m2)) = (self.comps.get(t1), v.comps.get(t2)) else {
                continue;
            };
            let q = self.deg as i64 - l as i64;
            let s = sign(self.field, q * (p - l) as i64);
            for (f, a) in m1 {
                if let Some(b) = m2.get(f) {
                    add_into(&mut acc, *f, a.compose(b).scale(&s));
                }
            }
        }
        acc
    }

    /// `(δu)_{i0..i_{p+1}} = Σ_{k=1}^{p} (-1)^k u_{i0..î_k..i_{p+1}}`.
    pub fn delta(&self, nerve: &CoverNerve) -> Morphism {
        let items: Vec<(&Tuple, &FaceMaps)> = self.comps.iter().collect();
        let field = self.field;
        let parts = par::map(&items, |(s, maps)| {
            let mut out = Vec::new();
            let p = s.len() - 1;
            let base = Face::of(s);
            for k in 1..=p {
                let sg = sign(field, k as i64);
                for x in 0..nerve.len() {
                    let big = base.with(x);
                    if !nerve.is_face(big) {
                        continue;
                    }
                    let mut t = s[..k].to_vec();
                    t.push(x);
                    t.extend_from_slice(&s[k..]);
                    for (f, m) in maps.iter() {
                        if big.is_subset(*f) {
                            out.push((t.clone(), *f, m.scale(&sg)));
                        }
                    }
                }
            }
            out
        });
        let mut r = Morphism::zero(field, self.deg + 1);
        for part in parts {
            for (t, f, m) in part {
                r.add_at(&t, f, m);
            }
        }
        r
    }

    /// Single component of `δu` at `t`.
    pub fn delta_component(&self, t: &[usize]) -> FaceMaps {
        let mut acc = FaceMaps::new();
        let p1 = t.len() - 1;
        if p1 < 2 {
            return acc;
        }
        let big = Face::of(t);
        for k in 1..p1 {
            let mut s = t.to_vec();
            s.remove(k);
            if let Some(maps) = self.comps.get(&s) {
                let sg = sign(self.field, k as i64);
                for (f, m) in maps {
                    if big.is_subset(*f) {
                        add_into(&mut acc, *f, m.scale(&sg));
                    }
                }
            }
        }
        acc
    }

    /// `dφ = δφ + b·φ - (-1)^{|φ|} φ·a`.
    pub fn diff(&self, a: &Morphism, b: &Morphism, nerve: &CoverNerve) -> Morphism {
        let s = sign(self.field, self.deg as i64 + 1);
        self.delta(nerve).add(&b.compose(self)).axpy(&s, &self.compose(a))
    }

    /// Single component of `dφ` at `t`.
    pub fn diff_component(&self, a: &Morphism, b: &Morphism, t: &[usize]) -> FaceMaps {
        let mut acc = self.delta_component(t);
        for (f, m) in b.compose_component(self, t) {
            add_into(&mut acc, f, m);
        }
        let s = sign(self.field, self.deg as i64 + 1);
        for (f, m) in self.compose_component(a, t) {
            add_into(&mut acc, f, m.scale(&s));
        }
        acc
    }

    /// First `(tuple, σ, τ)` where a component fails to commute with restrictions.
    pub fn naturality_violation(&self, src: &LocalFamily, tgt: &LocalFamily) -> Option<(Tuple, Face, Face)> {
        for (t, maps) in &self.comps {
            let (e, f) = (src.get(*t.last().unwrap()), tgt.get(t[0]));
            let star: Vec<Face> = src.nerve().star(Face::of(t));
            for s in &star {
                for u in &star {
                    if s == u || !s.is_subset(*u) {
                        continue;
                    }
                    let zs = GradedMap::zero(self.field, e.space(*s), f.space(*s), self.deg - (t.len() as i32 - 1));
                    let zu = GradedMap::zero(self.field, e.space(*u), f.space(*u), zs.shift());
                    let ms = maps.get(s).unwrap_or(&zs);
                    let mu = maps.get(u).unwrap_or(&zu);
                    if f.restriction(*s, *u).compose(ms) != mu.compose(e.restriction(*s, *u)) {
                        return Some((t.clone(), *s, *u));
                    }
                }
            }
        }
        None
    }

    /// Checks that every stored map has the shapes dictated by the families.
    pub fn shape_violation(&self, src: &LocalFamily, tgt: &LocalFamily) -> Option<(Tuple, Face)> {
        for (t, maps) in &self.comps {
            let nerve = src.nerve();
            if !nerve.is_face_tuple(t) {
                return Some((t.clone(), Face::of(t)));
            }
            for (f, m) in maps {
                let ok = Face::of(t).is_subset(*f)
                    && nerve.is_face(*f)
                    && m.src() == src.space(*t.last().unwrap(), *f)
                    && m.tgt() == tgt.space(t[0], *f);
                if !ok {
                    return Some((t.clone(), *f));
                }
            }
        }
        None
    }
}
