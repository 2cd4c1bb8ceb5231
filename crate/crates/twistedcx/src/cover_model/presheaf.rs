use std::collections::BTreeMap;

use thiserror::Error;

use super::nerve::{face_order, CoverError, CoverNerve, Face};
use crate::exact_linalg::{cohomology_dims, Field, GradedMap, GradedSpace, LinalgError, Matrix};

/// Graded spaces on a set of faces with restriction maps for every inclusion.
/// Restrictions are stored for all pairs `σ ⊆ τ` in the domain, identities included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    field: Field,
    domain: Vec<Face>,
    spaces: BTreeMap<Face, GradedSpace>,
    restr: BTreeMap<(Face, Face), GradedMap>,
    empty: GradedSpace,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("restriction {0:?} -> {1:?} is missing")]
    MissingRestriction(Face, Face),
    #[error("restriction {0:?} -> {1:?} has the wrong shape")]
    BadRestriction(Face, Face),
    #[error("functoriality fails for {0:?} ⊆ {1:?} ⊆ {2:?}")]
    NotFunctorial(Face, Face, Face),
    #[error("differential at {0:?} does not square to zero")]
    NotAComplex(Face),
    #[error("differential does not commute with restriction {0:?} -> {1:?}")]
    NotNatural(Face, Face),
    #[error("face {0:?} is outside the domain")]
    OutsideDomain(Face),
}

/// Outcome of `validate_presheaf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafReport {
    pub identity_violation: Option<Face>,
    pub functoriality_violation: Option<(Face, Face, Face)>,
}

impl PresheafReport {
    pub fn is_valid(&self) -> bool {
        self.identity_violation.is_none() && self.functoriality_violation.is_none()
    }
}

impl Presheaf {
    /// The same space everywhere, identity restrictions.
    pub fn constant(field: Field, domain: &[Face], space: &GradedSpace) -> Presheaf {
        let spaces = domain.iter().map(|f| (*f, space.clone())).collect();
        let mut restr = BTreeMap::new();
        for s in domain {
            for t in domain {
                if s.is_subset(*t) {
                    restr.insert((*s, *t), GradedMap::identity(field, space));
                }
            }
        }
        Presheaf::raw(field, domain, spaces, restr)
    }

    fn raw(
        field: Field,
        domain: &[Face],
        spaces: BTreeMap<Face, GradedSpace>,
        restr: BTreeMap<(Face, Face), GradedMap>,
    ) -> Presheaf {
        let mut domain = domain.to_vec();
        domain.sort_by(face_order);
        domain.dedup();
        Presheaf {
            field,
            domain,
            spaces,
            restr,
            empty: GradedSpace::zero(),
        }
    }

    /// Unchecked: every pair `σ ⊊ τ` of the domain must be supplied. Identities are added.
    pub fn from_parts(
        field: Field,
        domain: &[Face],
        spaces: BTreeMap<Face, GradedSpace>,
        mut restr: BTreeMap<(Face, Face), GradedMap>,
    ) -> Result<Presheaf, PresheafError> {
        for s in domain {
            restr.insert((*s, *s), GradedMap::identity(field, &spaces[s]));
            for t in domain {
                if s != t && s.is_subset(*t) {
                    let m = restr.get(&(*s, *t)).ok_or(PresheafError::MissingRestriction(*s, *t))?;
                    if m.src() != &spaces[s] || m.tgt() != &spaces[t] || m.shift() != 0 {
                        return Err(PresheafError::BadRestriction(*s, *t));
                    }
                }
            }
        }
        Ok(Presheaf::raw(field, domain, spaces, restr))
    }

    /// Builds all restrictions from those along single-index inclusions, composing
    /// along the chain that adds missing indices in increasing order, then validates.
    pub fn from_elementary(
        field: Field,
        domain: &[Face],
        spaces: BTreeMap<Face, GradedSpace>,
        elem: &BTreeMap<(Face, Face), GradedMap>,
    ) -> Result<Presheaf, PresheafError> {
        let mut restr = BTreeMap::new();
        for s in domain {
            for t in domain {
                if s == t || !s.is_subset(*t) {
                    continue;
                }
                let mut cur = *s;
                let mut acc = GradedMap::identity(field, &spaces[s]);
                for i in Face(t.0 & !s.0).indices() {
                    let next = cur.with(i);
                    if !spaces.contains_key(&next) {
                        return Err(PresheafError::OutsideDomain(next));
                    }
                    let m = elem.get(&(cur, next)).ok_or(PresheafError::MissingRestriction(cur, next))?;
                    if m.src() != &spaces[&cur] || m.tgt() != &spaces[&next] || m.shift() != 0 {
                        return Err(PresheafError::BadRestriction(cur, next));
                    }
                    acc = m.compose(&acc);
                    cur = next;
                }
                restr.insert((*s, *t), acc);
            }
        }
        let p = Presheaf::from_parts(field, domain, spaces, restr)?;
        if let Some((a, b, c)) = validate_presheaf(&p).functoriality_violation {
            return Err(PresheafError::NotFunctorial(a, b, c));
        }
        for ((s, t), m) in elem {
            if p.restriction(*s, *t) != m {
                return Err(PresheafError::NotFunctorial(*s, *s, *t));
            }
        }
        Ok(p)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn domain(&self) -> &[Face] {
        &self.domain
    }

    pub fn in_domain(&self, f: Face) -> bool {
        self.spaces.contains_key(&f)
    }

    /// Value at a face; zero outside the domain.
    pub fn space(&self, f: Face) -> &GradedSpace {
        self.spaces.get(&f).unwrap_or(&self.empty)
    }

    pub fn restriction(&self, s: Face, t: Face) -> &GradedMap {
        self.restr
            .get(&(s, t))
            .unwrap_or_else(|| panic!("no restriction {s:?} -> {t:?}"))
    }

    pub fn restrictions(&self) -> &BTreeMap<(Face, Face), GradedMap> {
        &self.restr
    }

    /// Restriction to the faces containing `base`.
    pub fn restrict_to_star(&self, base: Face) -> Presheaf {
        let domain: Vec<Face> = self.domain.iter().copied().filter(|f| base.is_subset(*f)).collect();
        let spaces = domain.iter().map(|f| (*f, self.spaces[f].clone())).collect();
        let restr = self
            .restr
            .iter()
            .filter(|((s, t), _)| base.is_subset(*s) && base.is_subset(*t))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        Presheaf::raw(self.field, &domain, spaces, restr)
    }

    /// All restrictions are identities.
    pub fn is_constant(&self) -> bool {
        self.restr.iter().all(|((s, t), m)| {
            self.spaces[s] == self.spaces[t] && *m == GradedMap::identity(self.field, &self.spaces[s])
        })
    }

    /// Union of degree supports.
    pub fn amplitude(&self) -> Option<(i32, i32)> {
        let lo = self.spaces.values().filter_map(|s| s.min_deg()).min()?;
        let hi = self.spaces.values().filter_map(|s| s.max_deg()).max()?;
        Some((lo, hi))
    }

    /// Degree shift `P[k]`; restriction matrices unchanged.
    pub fn shifted(&self, k: i32) -> Presheaf {
        let spaces = self.spaces.iter().map(|(f, s)| (*f, s.shifted(k))).collect();
        let restr = self.restr.iter().map(|(key, m)| (*key, m.reindexed(k, k))).collect();
        Presheaf::raw(self.field, &self.domain, spaces, restr)
    }

    /// Degreewise direct sum on a common domain.
    pub fn direct_sum(&self, o: &Presheaf) -> Presheaf {
        assert_eq!(self.domain, o.domain, "direct sum: domains differ");
        let spaces = self
            .domain
            .iter()
            .map(|f| (*f, self.spaces[f].direct_sum(&o.spaces[f])))
            .collect::<BTreeMap<_, _>>();
        let restr = self
            .restr
            .iter()
            .map(|((s, t), m)| ((*s, *t), block_diag(m, &o.restr[&(*s, *t)], &spaces[s], &spaces[t])))
            .collect();
        Presheaf::raw(self.field, &self.domain, spaces, restr)
    }
}

/// Block diagonal sum of two degree-0 maps.
pub fn block_diag(a: &GradedMap, b: &GradedMap, src: &GradedSpace, tgt: &GradedSpace) -> GradedMap {
    let field = a.field();
    let mut m = GradedMap::zero(field, src, tgt, a.shift());
    for n in src.degrees() {
        let k = n + a.shift();
        if tgt.dim(k) == 0 {
            continue;
        }
        let blk = Matrix::assemble(
            field,
            &[a.tgt().dim(k), b.tgt().dim(k)],
            &[a.src().dim(n), b.src().dim(n)],
            &[(0, 0, a.at(n)), (1, 1, b.at(n))],
        );
        m.set(n, blk);
    }
    m
}

/// Identity and functoriality checks; reports the first violation in face order.
pub fn validate_presheaf(p: &Presheaf) -> PresheafReport {
    let mut report = PresheafReport {
        identity_violation: None,
        functoriality_violation: None,
    };
    for s in &p.domain {
        if p.restr.get(&(*s, *s)) != Some(&GradedMap::identity(p.field, p.space(*s))) {
            report.identity_violation = Some(*s);
            break;
        }
    }
    'outer: for s in &p.domain {
        for t in &p.domain {
            if s == t || !s.is_subset(*t) {
                continue;
            }
            for u in &p.domain {
                if u == t || !t.is_subset(*u) {
                    continue;
                }
                let direct = &p.restr[&(*s, *u)];
                let via = p.restr[&(*t, *u)].compose(&p.restr[&(*s, *t)]);
                if *direct != via {
                    report.functoriality_violation = Some((*s, *t, *u));
                    break 'outer;
                }
            }
        }
    }
    report
}

/// Value of `P` at `σ` in degree n. Non-faces give zero by convention; subsets
/// that are empty or mention unknown indices are rejected.
pub fn section_space(p: &Presheaf, nerve: &CoverNerve, sigma: Face, n: i32) -> Result<usize, CoverError> {
    if sigma.is_empty() || sigma.indices().iter().any(|&i| i >= nerve.len()) {
        return Err(CoverError::NotAFace(sigma));
    }
    if !nerve.is_face(sigma) {
        return Ok(0);
    }
    Ok(p.space(sigma).dim(n))
}

/// A natural family of graded maps of fixed degree, one per face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaturalMap {
    pub deg: i32,
    pub maps: BTreeMap<Face, GradedMap>,
}

impl NaturalMap {
    pub fn zero(field: Field, src: &Presheaf, tgt: &Presheaf, deg: i32) -> NaturalMap {
        NaturalMap {
            deg,
            maps: src
                .domain()
                .iter()
                .map(|f| (*f, GradedMap::zero(field, src.space(*f), tgt.space(*f), deg)))
                .collect(),
        }
    }

    pub fn identity(p: &Presheaf) -> NaturalMap {
        NaturalMap {
            deg: 0,
            maps: p
                .domain()
                .iter()
                .map(|f| (*f, GradedMap::identity(p.field(), p.space(*f))))
                .collect(),
        }
    }

    pub fn at(&self, f: Face) -> &GradedMap {
        &self.maps[&f]
    }

    /// `self ∘ o` facewise.
    pub fn compose(&self, o: &NaturalMap) -> NaturalMap {
        NaturalMap {
            deg: self.deg + o.deg,
            maps: o
                .maps
                .iter()
                .filter_map(|(f, m)| self.maps.get(f).map(|l| (*f, l.compose(m))))
                .collect(),
        }
    }

    pub fn axpy(&self, x: &crate::exact_linalg::Scalar, o: &NaturalMap) -> NaturalMap {
        assert_eq!(self.deg, o.deg);
        NaturalMap {
            deg: self.deg,
            maps: self.maps.iter().map(|(f, m)| (*f, m.axpy(x, &o.maps[f]))).collect(),
        }
    }

    pub fn add(&self, o: &NaturalMap) -> NaturalMap {
        NaturalMap {
            deg: self.deg,
            maps: self.maps.iter().map(|(f, m)| (*f, m.add(&o.maps[f]))).collect(),
        }
    }

    pub fn sub(&self, o: &NaturalMap) -> NaturalMap {
        NaturalMap {
            deg: self.deg,
            maps: self.maps.iter().map(|(f, m)| (*f, m.sub(&o.maps[f]))).collect(),
        }
    }

    pub fn scale(&self, x: &crate::exact_linalg::Scalar) -> NaturalMap {
        NaturalMap {
            deg: self.deg,
            maps: self.maps.iter().map(|(f, m)| (*f, m.scale(x))).collect(),
        }
    }

    pub fn restrict_to_star(&self, base: Face) -> NaturalMap {
        NaturalMap {
            deg: self.deg,
            maps: self
                .maps
                .iter()
                .filter(|(f, _)| base.is_subset(**f))
                .map(|(f, m)| (*f, m.clone()))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.maps.values().all(|m| m.is_zero())
    }

    /// First inclusion where `r_F ∘ m(σ) ≠ m(τ) ∘ r_E`.
    pub fn naturality_violation(&self, src: &Presheaf, tgt: &Presheaf) -> Option<(Face, Face)> {
        for ((s, t), rs) in src.restrictions() {
            if s == t {
                continue;
            }
            let (Some(ms), Some(mt)) = (self.maps.get(s), self.maps.get(t)) else {
                continue;
            };
            if tgt.restriction(*s, *t).compose(ms) != mt.compose(rs) {
                return Some((*s, *t));
            }
        }
        None
    }
}

/// A presheaf with a natural square-zero differential of degree +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafComplex {
    pub sheaf: Presheaf,
    pub d: NaturalMap,
}

impl PresheafComplex {
    pub fn new(sheaf: Presheaf, d: NaturalMap) -> Result<PresheafComplex, PresheafError> {
        let c = PresheafComplex { sheaf, d };
        c.validate()?;
        Ok(c)
    }

    /// Zero differential.
    pub fn with_zero_differential(sheaf: Presheaf) -> PresheafComplex {
        let d = NaturalMap::zero(sheaf.field(), &sheaf, &sheaf, 1);
        PresheafComplex { sheaf, d }
    }

    pub fn field(&self) -> Field {
        self.sheaf.field()
    }

    pub fn validate(&self) -> Result<(), PresheafError> {
        for f in self.sheaf.domain() {
            let d = self.d.maps.get(f).ok_or(PresheafError::OutsideDomain(*f))?;
            if d.src() != self.sheaf.space(*f) || d.tgt() != self.sheaf.space(*f) || d.shift() != 1 {
                return Err(PresheafError::NotAComplex(*f));
            }
            if !d.compose(d).is_zero() {
                return Err(PresheafError::NotAComplex(*f));
            }
        }
        if let Some((s, t)) = self.d.naturality_violation(&self.sheaf, &self.sheaf) {
            return Err(PresheafError::NotNatural(s, t));
        }
        Ok(())
    }

    pub fn cohomology_at(&self, f: Face) -> Result<BTreeMap<i32, usize>, LinalgError> {
        cohomology_dims(self.sheaf.space(f), self.d.at(f))
    }

    pub fn restrict_to_star(&self, base: Face) -> PresheafComplex {
        PresheafComplex {
            sheaf: self.sheaf.restrict_to_star(base),
            d: self.d.restrict_to_star(base),
        }
    }

    /// Cohomology of the alternating Čech total complex over the whole cover:
    /// `⊕ P(σ)^{n-p}` with `p = |σ| - 1` and `D = δ + (-1)^p d`.
    pub fn cech_cohomology(&self, nerve: &CoverNerve) -> BTreeMap<i32, usize> {
        let field = self.field();
        let faces: Vec<Face> = nerve.faces().iter().copied().filter(|f| self.sheaf.in_domain(*f)).collect();
        let blocks = |n: i32| -> Vec<(Face, i32, usize)> {
            faces
                .iter()
                .filter_map(|f| {
                    let q = n - (f.len() as i32 - 1);
                    let d = self.sheaf.space(*f).dim(q);
                    (d > 0).then_some((*f, q, d))
                })
                .collect()
        };
        let mut space = GradedSpace::zero();
        for f in &faces {
            for q in self.sheaf.space(*f).degrees() {
                let n = q + f.len() as i32 - 1;
                space.set(n, blocks(n).iter().map(|b| b.2).sum());
            }
        }
        let mut d = GradedMap::zero(field, &space, &space, 1);
        for n in space.degrees() {
            let (src, tgt) = (blocks(n), blocks(n + 1));
            let mut parts = Vec::new();
            for (j, (s, q, _)) in src.iter().enumerate() {
                for (i, (t, q2, _)) in tgt.iter().enumerate() {
                    if t == s {
                        let sg = field.sign((s.len() - 1) % 2 == 1);
                        parts.push((i, j, self.d.at(*s).at(*q).scale(&sg)));
                    } else if q2 == q && s.is_subset(*t) && t.len() == s.len() + 1 {
                        let pos = t.indices().iter().position(|k| !s.contains(*k)).unwrap();
                        parts.push((i, j, self.sheaf.restriction(*s, *t).at(*q).scale(&field.sign(pos % 2 == 1))));
                    }
                }
            }
            let rows: Vec<usize> = tgt.iter().map(|b| b.2).collect();
            let cols: Vec<usize> = src.iter().map(|b| b.2).collect();
            d.set(n, Matrix::assemble(field, &rows, &cols, &parts));
        }
        cohomology_dims(&space, &d).expect("total differential squares to zero")
    }

    /// All restriction maps are quasi-isomorphisms.
    pub fn is_locally_constant(&self) -> bool {
        self.sheaf.restrictions().iter().all(|((s, t), r)| {
            s == t || crate::exact_linalg::is_quasi_iso(r, self.d.at(*s), self.d.at(*t)).unwrap_or(false)
        })
    }
}
