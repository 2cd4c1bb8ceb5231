use std::collections::BTreeMap;

use thiserror::Error;

use crate::cover_model::{Face, NaturalMap, Presheaf, PresheafComplex, Tuple};
use crate::exact_linalg::{Field, GradedMap, GradedSpace, Matrix};
use crate::par;
use crate::twisted_core::{check_mc, Cochain, LocalFamily, Morphism, TwistedComplex};

pub type GlobalComplex = PresheafComplex;
pub type GlobalMorphism = NaturalMap;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctorError {
    #[error("Maurer-Cartan equation fails")]
    McInvalid,
    #[error("morphism is not closed")]
    NotClosed,
    #[error("expected degree {expected}, got {got}")]
    WrongDegree { expected: i32, got: i32 },
    #[error("truncation degree {0} is below the top local degree plus one")]
    BadTruncation(i32),
}

/// Position of a tuple's component inside the raw value space at one face and degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub tuple: Tuple,
    pub offset: usize,
    pub dim: usize,
}

/// Sheafification of a twisted complex.
///
/// `raw` is the window of degrees `lo..=hi+1` with the differential cut after `hi`.
/// `complex` is its good truncation at `hi`: degree `hi` is replaced by the cycles,
/// whose raw coordinates are the columns of `cycles[σ]`. For `hi` above the top local
/// degree this loses no cohomology.
#[derive(Clone, Debug)]
pub struct Sheafified {
    pub complex: GlobalComplex,
    pub raw: GlobalComplex,
    pub lo: i32,
    pub hi: i32,
    pub blocks: BTreeMap<(Face, i32), Vec<Block>>,
    pub cycles: BTreeMap<Face, Matrix>,
    field: Field,
}

impl Sheafified {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn blocks(&self, f: Face, n: i32) -> &[Block] {
        self.blocks.get(&(f, n)).map_or(&[], |v| v.as_slice())
    }

    pub fn block(&self, f: Face, n: i32, t: &[usize]) -> Option<&Block> {
        self.blocks(f, n).iter().find(|b| b.tuple == t)
    }

    pub fn raw_dim(&self, f: Face, n: i32) -> usize {
        self.blocks(f, n).last().map_or(0, |b| b.offset + b.dim)
    }

    pub fn dim(&self, f: Face, n: i32) -> usize {
        self.complex.sheaf.space(f).dim(n)
    }

    /// Splits rows of a raw matrix into a cochain over `f`.
    pub fn to_cochain(&self, f: Face, n: i32, m: &Matrix) -> Cochain {
        let mut c = Cochain::zero(self.field, f, n, m.cols());
        for b in self.blocks(f, n) {
            c.add_at(&b.tuple, m.block(b.offset, b.dim, 0, m.cols()));
        }
        c
    }

    /// Stacks a cochain over `f` into raw coordinates. Components outside the layout
    /// can only be zero-dimensional, so they are skipped.
    pub fn from_cochain(&self, f: Face, n: i32, c: &Cochain) -> Matrix {
        let mut rows = vec![Vec::new(); self.raw_dim(f, n)];
        for b in self.blocks(f, n) {
            if let Some(m) = c.get(&b.tuple) {
                assert_eq!(m.rows(), b.dim, "cochain block size");
                for i in 0..b.dim {
                    rows[b.offset + i] = m.row(i).to_vec();
                }
            }
        }
        Matrix::from_sparse_rows(self.field, c.cols, rows)
    }

    /// Truncated coordinates to raw coordinates.
    pub fn to_raw(&self, f: Face, n: i32, m: &Matrix) -> Matrix {
        if n == self.hi {
            self.cycles[&f].mul(m)
        } else {
            m.clone()
        }
    }

    /// Raw coordinates to truncated ones; `None` if a top-degree vector is not a cycle.
    pub fn from_raw(&self, f: Face, n: i32, m: &Matrix) -> Option<Matrix> {
        if n == self.hi {
            self.cycles[&f].solve_matrix(m)
        } else if n > self.hi {
            None
        } else {
            Some(m.clone())
        }
    }
}

/// `E_i = P|star(i)`, `a^{0,1} = d`, `a^{1,0} = id`, higher components zero.
pub fn twist(p: &GlobalComplex, nerve: &crate::cover_model::CoverNerve) -> TwistedComplex {
    let field = p.field();
    let family = LocalFamily::from_global(nerve, &p.sheaf);
    let mut a = Morphism::zero(field, 1);
    for i in 0..nerve.len() {
        for f in nerve.star(Face::singleton(i)) {
            a.add_at(&[i], f, p.d.at(f).clone());
        }
    }
    for t in nerve.tuples(2, Face::EMPTY) {
        for f in nerve.star(Face::of(&t)) {
            a.add_at(&t, f, GradedMap::identity(field, p.sheaf.space(f)));
        }
    }
    TwistedComplex {
        family,
        a,
        generalized: false,
    }
}

/// Default truncation degree: one above the top local degree.
pub fn default_top(t: &TwistedComplex) -> i32 {
    t.amplitude().1 + 1
}

pub fn sheafify(t: &TwistedComplex) -> Result<Sheafified, FunctorError> {
    sheafify_with(t, default_top(t))
}

/// Sheafification truncated at `hi` (at least the top local degree plus one).
pub fn sheafify_with(t: &TwistedComplex, hi: i32) -> Result<Sheafified, FunctorError> {
    if !check_mc(&t.family, &t.a).is_valid() {
        return Err(FunctorError::McInvalid);
    }
    if hi < default_top(t) {
        return Err(FunctorError::BadTruncation(hi));
    }
    Ok(build(t, hi))
}

fn layout(t: &TwistedComplex, f: Face, n: i32, lo: i32) -> Vec<Block> {
    let nerve = t.nerve();
    let mut out = Vec::new();
    let mut off = 0;
    for p in 0..=(n - lo).max(-1) {
        for tu in nerve.tuples(p as usize + 1, f) {
            let dim = t.family.space(tu[0], Face::of(&tu).union(f)).dim(n - p);
            if dim > 0 {
                out.push(Block {
                    tuple: tu,
                    offset: off,
                    dim,
                });
                off += dim;
            }
        }
    }
    out
}

fn build(t: &TwistedComplex, hi: i32) -> Sheafified {
    let field = t.field();
    let nerve = t.nerve();
    let lo = t.amplitude().0.min(hi);
    let faces = nerve.faces().to_vec();
    let per_face: Vec<Vec<(i32, Vec<Block>)>> =
        par::map(&faces, |f| (lo..=hi + 1).map(|n| (n, layout(t, *f, n, lo))).collect());
    let mut blocks = BTreeMap::new();
    for (f, v) in faces.iter().zip(per_face) {
        for (n, b) in v {
            blocks.insert((*f, n), b);
        }
    }
    let mut s = Sheafified {
        complex: PresheafComplex::with_zero_differential(Presheaf::constant(field, &[], &GradedSpace::zero())),
        raw: PresheafComplex::with_zero_differential(Presheaf::constant(field, &[], &GradedSpace::zero())),
        lo,
        hi,
        blocks,
        cycles: BTreeMap::new(),
        field,
    };
    let raw_space = |f: Face| -> GradedSpace {
        GradedSpace::from_dims((lo..=hi + 1).map(|n| (n, s.blocks(f, n).iter().map(|b| b.dim).sum())))
    };
    let spaces: BTreeMap<Face, GradedSpace> = faces.iter().map(|f| (*f, raw_space(*f))).collect();

    // raw differential, through δ_a on identity columns
    let dmaps: Vec<GradedMap> = par::map(&faces, |f| {
        let sp = &spaces[f];
        let mut d = GradedMap::zero(field, sp, sp, 1);
        for n in lo..=hi {
            let dim = sp.dim(n);
            if dim == 0 || sp.dim(n + 1) == 0 {
                continue;
            }
            let c = s.to_cochain(*f, n, &Matrix::identity(field, dim));
            let dc = c.delta_a(&t.a, &t.family);
            d.set(n, s.from_cochain(*f, n + 1, &dc));
        }
        d
    });
    let dmap: BTreeMap<Face, GradedMap> = faces.iter().copied().zip(dmaps).collect();

    // raw restrictions: blockwise restriction of each tuple's component
    let mut restr = BTreeMap::new();
    for sg in &faces {
        for tf in &faces {
            if sg == tf || !sg.is_subset(*tf) {
                continue;
            }
            let mut r = GradedMap::zero(field, &spaces[sg], &spaces[tf], 0);
            for n in lo..=hi + 1 {
                let mut trip = Vec::new();
                for bt in s.blocks(*tf, n) {
                    let Some(bs) = s.block(*sg, n, &bt.tuple) else {
                        continue;
                    };
                    let p = bt.tuple.len() as i32 - 1;
                    let base = Face::of(&bt.tuple);
                    let m = t.family.get(bt.tuple[0]).restriction(base.union(*sg), base.union(*tf)).at(n - p);
                    for (i, j, v) in m.entries() {
                        trip.push((bt.offset + i, bs.offset + j, v.clone()));
                    }
                }
                if !trip.is_empty() {
                    r.set(n, Matrix::from_triplets(field, spaces[tf].dim(n), spaces[sg].dim(n), trip));
                }
            }
            restr.insert((*sg, *tf), r);
        }
    }
    let raw_sheaf = Presheaf::from_parts(field, &faces, spaces.clone(), restr).expect("raw layout");
    s.raw = PresheafComplex {
        sheaf: raw_sheaf,
        d: NaturalMap { deg: 1, maps: dmap },
    };

    // good truncation at hi
    let cycles: BTreeMap<Face, Matrix> = faces
        .iter()
        .map(|f| {
            let dim = spaces[f].dim(hi);
            let z = if spaces[f].dim(hi + 1) == 0 {
                Matrix::identity(field, dim)
            } else {
                s.raw.d.at(*f).at(hi).nullspace()
            };
            (*f, z)
        })
        .collect();
    s.cycles = cycles;
    let tspaces: BTreeMap<Face, GradedSpace> = faces
        .iter()
        .map(|f| {
            let mut g = GradedSpace::from_dims((lo..hi).map(|n| (n, spaces[f].dim(n))));
            g.set(hi, s.cycles[f].cols());
            (*f, g)
        })
        .collect();
    let mut tmaps = BTreeMap::new();
    for f in &faces {
        let raw = s.raw.d.at(*f);
        let mut d = GradedMap::zero(field, &tspaces[f], &tspaces[f], 1);
        for n in lo..hi {
            if let Some(m) = raw.get(n) {
                let m = if n + 1 == hi {
                    s.cycles[f].solve_matrix(m).expect("boundaries are cycles")
                } else {
                    m.clone()
                };
                d.set(n, m);
            }
        }
        tmaps.insert(*f, d);
    }
    let mut trestr = BTreeMap::new();
    for ((sg, tf), r) in s.raw.sheaf.restrictions() {
        if sg == tf {
            continue;
        }
        let mut m = GradedMap::zero(field, &tspaces[sg], &tspaces[tf], 0);
        for n in lo..=hi {
            let x = if n == hi {
                s.cycles[tf].solve_matrix(&r.at(hi).mul(&s.cycles[sg])).expect("restriction preserves cycles")
            } else {
                r.at(n)
            };
            m.set(n, x);
        }
        trestr.insert((*sg, *tf), m);
    }
    let tsheaf = Presheaf::from_parts(field, &faces, tspaces, trestr).expect("truncated layout");
    s.complex = PresheafComplex {
        sheaf: tsheaf,
        d: NaturalMap { deg: 1, maps: tmaps },
    };
    s
}

/// Applies `φ·` to raw coordinates at a face: `S^n(E)(f) -> S^{n+l}(F)(f)`.
fn act_raw(phi: &Morphism, e: &TwistedComplex, se: &Sheafified, sf: &Sheafified, f: Face, n: i32, m: &Matrix) -> Matrix {
    let c = se.to_cochain(f, n, m);
    let out = Cochain::act(phi, &c, &e.family);
    sf.from_cochain(f, n + phi.deg(), &out)
}

/// `S(φ)` on the raw windows: defined at source degrees `n` with `n` and `n + |φ|` in both windows.
pub fn sheafify_morphism_raw(
    phi: &Morphism,
    e: &TwistedComplex,
    se: &Sheafified,
    sf: &Sheafified,
) -> GlobalMorphism {
    let field = se.field();
    let l = phi.deg();
    let faces: Vec<Face> = se.raw.sheaf.domain().to_vec();
    let maps = par::map(&faces, |f| {
        let (s, g) = (se.raw.sheaf.space(*f), sf.raw.sheaf.space(*f));
        let mut m = GradedMap::zero(field, s, g, l);
        for n in s.degrees() {
            if g.dim(n + l) > 0 && n <= se.hi + 1 && n + l <= sf.hi + 1 {
                m.set(n, act_raw(phi, e, se, sf, *f, n, &Matrix::identity(field, s.dim(n))));
            }
        }
        m
    });
    NaturalMap {
        deg: l,
        maps: faces.into_iter().zip(maps).collect(),
    }
}

/// `S(φ)` between truncations with a common top degree, for closed degree-0 `φ`.
pub fn sheafify_morphism(
    phi: &Morphism,
    e: &TwistedComplex,
    f: &TwistedComplex,
    se: &Sheafified,
    sf: &Sheafified,
) -> Result<GlobalMorphism, FunctorError> {
    if phi.deg() != 0 {
        return Err(FunctorError::WrongDegree {
            expected: 0,
            got: phi.deg(),
        });
    }
    if se.hi != sf.hi {
        return Err(FunctorError::BadTruncation(sf.hi));
    }
    if !phi.diff(&e.a, &f.a, e.nerve()).is_zero() {
        return Err(FunctorError::NotClosed);
    }
    let field = se.field();
    let faces: Vec<Face> = se.complex.sheaf.domain().to_vec();
    let maps = par::map(&faces, |fc| {
        let (s, g) = (se.complex.sheaf.space(*fc), sf.complex.sheaf.space(*fc));
        let mut m = GradedMap::zero(field, s, g, 0);
        for n in s.degrees() {
            if g.dim(n) == 0 {
                continue;
            }
            let src = se.to_raw(*fc, n, &Matrix::identity(field, s.dim(n)));
            let img = act_raw(phi, e, se, sf, *fc, n, &src);
            m.set(n, sf.from_raw(*fc, n, &img).expect("closed maps preserve cycles"));
        }
        m
    });
    Ok(NaturalMap {
        deg: 0,
        maps: faces.into_iter().zip(maps).collect(),
    })
}
