use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;
use twistedcx::cover_model::{build_nerve, CoverNerve, Face, NaturalMap, Presheaf, PresheafComplex, PresheafError};
use twistedcx::exact_linalg::{Field, GradedMap, GradedSpace, Matrix};
use twistedcx::twisted_core::{LocalFamily, Morphism, TwistedComplex};

use crate::document::{ComponentDoc, Document, GradedDoc, MorphismDoc, PresheafDoc, RestrictionDoc, TwistedDoc};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InputError {
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("invalid {object}: {reason}")]
    Validation { object: String, reason: String },
}

fn invalid(object: impl Into<String>, reason: impl Into<String>) -> InputError {
    InputError::Validation {
        object: object.into(),
        reason: reason.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedEntry {
    /// Presheaf name per open.
    pub locals: Vec<String>,
    pub complex: TwistedComplex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismEntry {
    pub source: String,
    pub target: String,
    pub morphism: Morphism,
}

/// A validated input: structure, functoriality and naturality hold. The
/// Maurer-Cartan equation and non-degeneracy are left to the commands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workspace {
    pub field: Field,
    pub nerve: CoverNerve,
    pub presheaves: BTreeMap<String, PresheafComplex>,
    pub twisted: BTreeMap<String, TwistedEntry>,
    pub morphisms: BTreeMap<String, MorphismEntry>,
}

#[derive(Clone, Debug)]
pub struct Parsed {
    pub workspace: Workspace,
    pub warnings: Vec<String>,
}

/// Parses and validates. `field` overrides the document's field.
pub fn parse_input(text: &str, field: Option<Field>) -> Result<Parsed, InputError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| InputError::Parse {
        line: e.line(),
        col: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    from_document(&doc, field)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

pub fn serialize(ws: &Workspace) -> String {
    let mut s = serde_json::to_string_pretty(&to_document(ws)).expect("document serializes");
    s.push('\n');
    s
}

struct Ctx<'a> {
    field: Field,
    nerve: &'a CoverNerve,
}

impl Ctx<'_> {
    fn open(&self, label: &str, object: &str) -> Result<usize, InputError> {
        self.nerve
            .index_of(label.trim())
            .ok_or_else(|| invalid(object, format!("unknown open {label:?}")))
    }

    fn face(&self, key: &str, object: &str) -> Result<Face, InputError> {
        let idx = key
            .split(',')
            .map(|l| self.open(l, object))
            .collect::<Result<Vec<_>, _>>()?;
        let f = Face::of(&idx);
        if idx.is_empty() || !self.nerve.is_face(f) {
            return Err(invalid(object, format!("{key:?} is not a face of the nerve")));
        }
        Ok(f)
    }

    fn tuple(&self, labels: &[String], object: &str) -> Result<Vec<usize>, InputError> {
        let t = labels.iter().map(|l| self.open(l, object)).collect::<Result<Vec<_>, _>>()?;
        if !self.nerve.is_face_tuple(&t) {
            return Err(invalid(object, format!("tuple ({}) does not span a face", labels.join(","))));
        }
        Ok(t)
    }

    fn matrix(&self, rows: &[Vec<String>], r: usize, c: usize, object: &str) -> Result<Matrix, InputError> {
        if rows.len() != r || rows.iter().any(|row| row.len() != c) {
            return Err(invalid(object, format!("expected a {r}x{c} matrix")));
        }
        let data = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| self.field.parse_scalar(x).map_err(|e| invalid(object, e.to_string())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_rows(self.field, data, c))
    }

    fn graded(&self, doc: &GradedDoc, src: &GradedSpace, tgt: &GradedSpace, shift: i32, object: &str) -> Result<GradedMap, InputError> {
        let mut m = GradedMap::zero(self.field, src, tgt, shift);
        for (k, rows) in doc {
            let n = degree(k, object)?;
            let mat = self.matrix(rows, tgt.dim(n + shift), src.dim(n), &format!("{object} degree {n}"))?;
            m.set(n, mat);
        }
        Ok(m)
    }
}

fn degree(key: &str, object: &str) -> Result<i32, InputError> {
    key.trim()
        .parse()
        .map_err(|_| invalid(object, format!("degree key {key:?} is not an integer")))
}

fn describe_presheaf_error(e: &PresheafError, nerve: &CoverNerve) -> String {
    let n = |f: &Face| nerve.face_name(*f);
    match e {
        PresheafError::MissingRestriction(s, t) => format!("restriction {} -> {} is missing", n(s), n(t)),
        PresheafError::BadRestriction(s, t) => format!("restriction {} -> {} has the wrong shape", n(s), n(t)),
        PresheafError::NotFunctorial(a, b, c) => {
            format!("restrictions are not functorial along {} -> {} -> {}", n(a), n(b), n(c))
        }
        PresheafError::NotAComplex(f) => format!("differential at {} does not square to zero", n(f)),
        PresheafError::NotNatural(s, t) => format!("differential does not commute with restriction {} -> {}", n(s), n(t)),
        PresheafError::OutsideDomain(f) => format!("face {} is outside the domain", n(f)),
    }
}

pub fn from_document(doc: &Document, field: Option<Field>) -> Result<Parsed, InputError> {
    let field = match (field, &doc.field) {
        (Some(f), _) => f,
        (None, Some(s)) => Field::parse(s).map_err(|e| invalid("field", e.to_string()))?,
        (None, None) => Field::Rational,
    };
    for l in &doc.opens {
        if l.trim().is_empty() || l.contains(',') || l.trim() != l {
            return Err(invalid("opens", format!("label {l:?} must be nonempty, without commas or padding")));
        }
    }
    let mut declared = Vec::new();
    for f in &doc.faces {
        let mut idx = Vec::new();
        for l in f {
            idx.push(
                doc.opens
                    .iter()
                    .position(|o| o == l)
                    .ok_or_else(|| invalid("faces", format!("unknown open {l:?}")))?,
            );
        }
        declared.push(idx);
    }
    let (nerve, _) = build_nerve(&doc.opens, &declared).map_err(|e| invalid("cover", e.to_string()))?;
    let mut warnings = Vec::new();
    let given: BTreeSet<Face> = declared.iter().map(|f| Face::of(f)).collect();
    let added: Vec<String> = nerve
        .faces()
        .iter()
        .filter(|f| f.len() > 1 && !given.contains(f))
        .map(|f| nerve.face_name(*f))
        .collect();
    if !added.is_empty() {
        warnings.push(format!("faces not closed under subsets; added {}", added.join(" ")));
    }

    let mut seen = BTreeSet::new();
    let names = doc.presheaves.keys().chain(doc.twisted.keys()).chain(doc.morphisms.keys());
    for name in names {
        if !seen.insert(name.clone()) {
            return Err(invalid(name.as_str(), "name is used twice"));
        }
    }

    let ctx = Ctx { field, nerve: &nerve };
    let mut presheaves = BTreeMap::new();
    for (name, p) in &doc.presheaves {
        presheaves.insert(name.clone(), presheaf(&ctx, name, p)?);
    }
    let mut twisted = BTreeMap::new();
    for (name, t) in &doc.twisted {
        twisted.insert(name.clone(), twisted_complex(&ctx, name, t, &presheaves)?);
    }
    let mut morphisms = BTreeMap::new();
    for (name, m) in &doc.morphisms {
        morphisms.insert(name.clone(), morphism(&ctx, name, m, &twisted)?);
    }
    Ok(Parsed {
        workspace: Workspace {
            field,
            nerve,
            presheaves,
            twisted,
            morphisms,
        },
        warnings,
    })
}

fn presheaf(ctx: &Ctx, name: &str, doc: &PresheafDoc) -> Result<PresheafComplex, InputError> {
    let object = format!("presheaf {name}");
    let nerve = ctx.nerve;
    let mut spaces: BTreeMap<Face, GradedSpace> = nerve.faces().iter().map(|f| (*f, GradedSpace::zero())).collect();
    for (key, dims) in &doc.spaces {
        let f = ctx.face(key, &object)?;
        let mut g = GradedSpace::zero();
        for (k, d) in dims {
            g.set(degree(k, &object)?, *d);
        }
        spaces.insert(f, g);
    }
    let mut elem = BTreeMap::new();
    for s in nerve.faces() {
        for i in 0..nerve.len() {
            let t = s.with(i);
            if t != *s && nerve.is_face(t) {
                elem.insert((*s, t), GradedMap::zero(ctx.field, &spaces[s], &spaces[&t], 0));
            }
        }
    }
    let mut given = BTreeSet::new();
    for r in &doc.restrictions {
        let (s, t) = (ctx.face(&r.from, &object)?, ctx.face(&r.to, &object)?);
        let what = format!("{object} restriction {} -> {}", r.from, r.to);
        if !s.is_subset(t) || t.len() != s.len() + 1 {
            return Err(invalid(what, "restrictions must add exactly one open"));
        }
        if !given.insert((s, t)) {
            return Err(invalid(what, "given twice"));
        }
        let m = ctx.graded(&r.maps, &spaces[&s], &spaces[&t], 0, &what)?;
        elem.insert((s, t), m);
    }
    let sheaf = Presheaf::from_elementary(ctx.field, nerve.faces(), spaces, &elem)
        .map_err(|e| invalid(&object, describe_presheaf_error(&e, nerve)))?;
    let mut d = NaturalMap::zero(ctx.field, &sheaf, &sheaf, 1);
    for (key, maps) in &doc.differential {
        let f = ctx.face(key, &object)?;
        let what = format!("{object} differential at {key}");
        let sp = sheaf.space(f);
        d.maps.insert(f, ctx.graded(maps, sp, sp, 1, &what)?);
    }
    PresheafComplex::new(sheaf, d).map_err(|e| invalid(&object, describe_presheaf_error(&e, nerve)))
}

fn components(
    ctx: &Ctx,
    object: &str,
    comps: &[ComponentDoc],
    deg: i32,
    src: &LocalFamily,
    tgt: &LocalFamily,
) -> Result<Morphism, InputError> {
    let mut m = Morphism::zero(ctx.field, deg);
    let mut seen = BTreeSet::new();
    for c in comps {
        let t = ctx.tuple(&c.tuple, object)?;
        let f = ctx.face(&c.face, object)?;
        let what = format!("{object} component ({}) at {}", c.tuple.join(","), c.face);
        if !Face::of(&t).is_subset(f) {
            return Err(invalid(what, "face does not contain the tuple"));
        }
        if !seen.insert((t.clone(), f)) {
            return Err(invalid(what, "given twice"));
        }
        let shift = deg - (t.len() as i32 - 1);
        let g = ctx.graded(&c.maps, src.space(*t.last().unwrap(), f), tgt.space(t[0], f), shift, &what)?;
        m.add_at(&t, f, g);
    }
    if let Some((t, s, u)) = m.naturality_violation(src, tgt) {
        let n = ctx.nerve;
        return Err(invalid(
            format!("{object} component {}", n.tuple_name(&t)),
            format!("does not commute with restriction {} -> {}", n.face_name(s), n.face_name(u)),
        ));
    }
    Ok(m)
}

fn twisted_complex(
    ctx: &Ctx,
    name: &str,
    doc: &TwistedDoc,
    presheaves: &BTreeMap<String, PresheafComplex>,
) -> Result<TwistedEntry, InputError> {
    let object = format!("twisted complex {name}");
    let nerve = ctx.nerve;
    let mut locals = vec![None; nerve.len()];
    for (label, p) in &doc.locals {
        let i = ctx.open(label, &object)?;
        if !presheaves.contains_key(p) {
            return Err(invalid(&object, format!("local at {label} names undefined presheaf {p:?}")));
        }
        locals[i] = Some(p.clone());
    }
    let locals = locals
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| invalid(&object, format!("no local object at {}", nerve.label(i)))))
        .collect::<Result<Vec<_>, _>>()?;
    let objs = locals
        .iter()
        .enumerate()
        .map(|(i, p)| presheaves[p].sheaf.restrict_to_star(Face::singleton(i)))
        .collect();
    let family = LocalFamily::new(nerve, objs);
    let a = components(ctx, &object, &doc.components, 1, &family, &family)?;
    Ok(TwistedEntry {
        locals,
        complex: TwistedComplex {
            family,
            a,
            generalized: doc.generalized,
        },
    })
}

fn morphism(ctx: &Ctx, name: &str, doc: &MorphismDoc, twisted: &BTreeMap<String, TwistedEntry>) -> Result<MorphismEntry, InputError> {
    let object = format!("morphism {name}");
    let look = |n: &str| {
        twisted
            .get(n)
            .ok_or_else(|| invalid(&object, format!("undefined twisted complex {n:?}")))
    };
    let (e, f) = (look(&doc.source)?, look(&doc.target)?);
    let m = components(ctx, &object, &doc.components, doc.degree, &e.complex.family, &f.complex.family)?;
    Ok(MorphismEntry {
        source: doc.source.clone(),
        target: doc.target.clone(),
        morphism: m,
    })
}

fn graded_doc(m: &GradedMap) -> GradedDoc {
    m.comps()
        .iter()
        .map(|(n, mat)| {
            let rows = mat
                .to_dense()
                .iter()
                .map(|r| r.iter().map(|x| x.to_text()).collect())
                .collect();
            (n.to_string(), rows)
        })
        .collect()
}

fn dims_doc(g: &GradedSpace) -> BTreeMap<String, usize> {
    g.dims().iter().map(|(n, d)| (n.to_string(), *d)).collect()
}

/// Any presheaf, on all faces or on a star; faces outside its domain read as zero.
fn presheaf_doc(p: &Presheaf, d: Option<&NaturalMap>, nerve: &CoverNerve) -> PresheafDoc {
    let mut doc = PresheafDoc::default();
    for f in p.domain() {
        if !p.space(*f).is_zero() {
            doc.spaces.insert(nerve.face_name(*f), dims_doc(p.space(*f)));
        }
        for i in 0..nerve.len() {
            let t = f.with(i);
            if t != *f && p.in_domain(t) && !p.restriction(*f, t).is_zero() {
                doc.restrictions.push(RestrictionDoc {
                    from: nerve.face_name(*f),
                    to: nerve.face_name(t),
                    maps: graded_doc(p.restriction(*f, t)),
                });
            }
        }
        if let Some(m) = d.and_then(|d| d.maps.get(f)).filter(|m| !m.is_zero()) {
            doc.differential.insert(nerve.face_name(*f), graded_doc(m));
        }
    }
    doc
}

fn components_doc(m: &Morphism, nerve: &CoverNerve) -> Vec<ComponentDoc> {
    let mut out = Vec::new();
    for (t, maps) in m.comps() {
        for (f, g) in maps {
            if !g.is_zero() {
                out.push(ComponentDoc {
                    tuple: t.iter().map(|&i| nerve.label(i).to_string()).collect(),
                    face: nerve.face_name(*f),
                    maps: graded_doc(g),
                });
            }
        }
    }
    out
}

pub fn to_document(ws: &Workspace) -> Document {
    let nerve = &ws.nerve;
    Document {
        field: Some(ws.field.spec()),
        opens: nerve.labels().to_vec(),
        faces: nerve
            .faces()
            .iter()
            .filter(|f| f.len() > 1)
            .map(|f| f.indices().iter().map(|&i| nerve.label(i).to_string()).collect())
            .collect(),
        presheaves: ws
            .presheaves
            .iter()
            .map(|(n, p)| (n.clone(), presheaf_doc(&p.sheaf, Some(&p.d), nerve)))
            .collect(),
        twisted: ws
            .twisted
            .iter()
            .map(|(n, t)| {
                let locals = t
                    .locals
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (nerve.label(i).to_string(), p.clone()))
                    .collect();
                let doc = TwistedDoc {
                    locals,
                    components: components_doc(&t.complex.a, nerve),
                    generalized: t.complex.generalized,
                };
                (n.clone(), doc)
            })
            .collect(),
        morphisms: ws
            .morphisms
            .iter()
            .map(|(n, m)| {
                let doc = MorphismDoc {
                    source: m.source.clone(),
                    target: m.target.clone(),
                    degree: m.morphism.deg(),
                    components: components_doc(&m.morphism, nerve),
                };
                (n.clone(), doc)
            })
            .collect(),
    }
}

impl Workspace {
    fn fresh(&self, base: &str) -> String {
        let taken = |n: &str| self.presheaves.contains_key(n) || self.twisted.contains_key(n) || self.morphisms.contains_key(n);
        if !taken(base) {
            return base.to_string();
        }
        (2..).map(|k| format!("{base}~{k}")).find(|n| !taken(n)).unwrap()
    }

    pub fn add_presheaf(&mut self, base: &str, p: PresheafComplex) -> String {
        let name = self.fresh(base);
        self.presheaves.insert(name.clone(), p);
        name
    }

    /// Stores the locals as presheaves extended by zero off their stars.
    pub fn add_twisted(&mut self, base: &str, t: &TwistedComplex) -> String {
        let name = self.fresh(base);
        let mut locals = Vec::new();
        for i in 0..self.nerve.len() {
            let local = extend_by_zero(t.family.get(i), &self.nerve);
            let lname = self.fresh(&format!("{name}@{}", self.nerve.label(i)));
            self.presheaves.insert(lname.clone(), PresheafComplex::with_zero_differential(local));
            locals.push(lname);
        }
        self.twisted.insert(
            name.clone(),
            TwistedEntry {
                locals,
                complex: t.clone(),
            },
        );
        name
    }

    pub fn add_morphism(&mut self, base: &str, source: &str, target: &str, m: Morphism) -> String {
        let name = self.fresh(base);
        self.morphisms.insert(
            name.clone(),
            MorphismEntry {
                source: source.to_string(),
                target: target.to_string(),
                morphism: m,
            },
        );
        name
    }
}

fn extend_by_zero(p: &Presheaf, nerve: &CoverNerve) -> Presheaf {
    let field = p.field();
    let faces = nerve.faces();
    let spaces: BTreeMap<Face, GradedSpace> = faces.iter().map(|f| (*f, p.space(*f).clone())).collect();
    let mut restr = BTreeMap::new();
    for s in faces {
        for t in faces {
            if s != t && s.is_subset(*t) {
                let m = if p.in_domain(*s) {
                    p.restriction(*s, *t).clone()
                } else {
                    GradedMap::zero(field, &spaces[s], &spaces[t], 0)
                };
                restr.insert((*s, *t), m);
            }
        }
    }
    Presheaf::from_parts(field, faces, spaces, restr).expect("extension by zero has all restrictions")
}
