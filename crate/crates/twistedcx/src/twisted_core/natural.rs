use std::collections::BTreeMap;

use crate::cover_model::{Face, Presheaf};
use crate::exact_linalg::{BlockEquation, BlockSystem, Field, GradedMap, Matrix, Scalar, Term};

use super::morphism::FaceMaps;

/// An unknown natural family `X(F): src(F) -> tgt(F)` of degree `shift` over the faces
/// containing `base`. When `src` is constant there, only `X(base)` is solved for and
/// `X(F) = r_tgt(base -> F) ∘ X(base)`.
pub struct NatUnknown<'a> {
    pub base: Face,
    pub src: &'a Presheaf,
    pub tgt: &'a Presheaf,
    pub shift: i32,
}

/// `coeff * left ∘ X_unknown(face) ∘ right`
pub struct NatTerm {
    pub unknown: usize,
    pub coeff: Scalar,
    pub left: Option<GradedMap>,
    pub right: Option<GradedMap>,
}

/// `Σ terms = rhs` at one face.
pub struct NatEquation {
    pub face: Face,
    pub terms: Vec<NatTerm>,
    pub rhs: GradedMap,
}

struct Slot {
    faces: Vec<Face>,
    constant: bool,
    blocks: BTreeMap<(Face, i32), usize>,
}

fn constant_on_star(p: &Presheaf, faces: &[Face]) -> bool {
    let f = p.field();
    faces.iter().all(|s| {
        faces.iter().all(|t| {
            !s.is_subset(*t)
                || (p.space(*s) == p.space(*t) && *p.restriction(*s, *t) == GradedMap::identity(f, p.space(*s)))
        })
    })
}

fn mat_or_id(m: Option<Matrix>) -> Option<Matrix> {
    m
}

/// Solves the equations jointly; `None` if inconsistent.
pub fn solve_natural(field: Field, unknowns: &[NatUnknown], eqs: &[NatEquation]) -> Option<Vec<FaceMaps>> {
    let mut sys = BlockSystem::new(field);
    let mut slots = Vec::with_capacity(unknowns.len());
    for u in unknowns {
        let faces: Vec<Face> = u
            .src
            .domain()
            .iter()
            .copied()
            .filter(|f| u.base.is_subset(*f) && u.tgt.in_domain(*f))
            .collect();
        let constant = constant_on_star(u.src, &faces);
        let solve_faces: Vec<Face> = if constant { vec![u.base] } else { faces.clone() };
        let mut blocks = BTreeMap::new();
        for f in &solve_faces {
            for n in u.src.space(*f).degrees() {
                let r = u.tgt.space(*f).dim(n + u.shift);
                if r > 0 {
                    blocks.insert((*f, n), sys.add_unknown(r, u.src.space(*f).dim(n)));
                }
            }
        }
        slots.push(Slot {
            faces,
            constant,
            blocks,
        });
    }

    // Block index and left factor for X_u(face)^m.
    let lookup = |u: usize, face: Face, m: i32| -> Option<(usize, Option<Matrix>)> {
        let slot = &slots[u];
        let un = &unknowns[u];
        if slot.constant {
            let b = *slot.blocks.get(&(un.base, m))?;
            if face == un.base {
                Some((b, None))
            } else {
                Some((b, Some(un.tgt.restriction(un.base, face).at(m + un.shift))))
            }
        } else {
            slot.blocks.get(&(face, m)).map(|b| (*b, None))
        }
    };

    for eq in eqs {
        let src = eq.rhs.src();
        let tgt = eq.rhs.tgt();
        let s_eq = eq.rhs.shift();
        for n in src.degrees() {
            if tgt.dim(n + s_eq) == 0 {
                continue;
            }
            let mut terms = Vec::new();
            for t in &eq.terms {
                let sr = t.right.as_ref().map_or(0, |r| r.shift());
                let m = n + sr;
                let Some((blk, restr)) = lookup(t.unknown, eq.face, m) else {
                    continue;
                };
                let su = unknowns[t.unknown].shift;
                let left = match (&t.left, restr) {
                    (None, r) => mat_or_id(r),
                    (Some(l), None) => Some(l.at(m + su)),
                    (Some(l), Some(r)) => Some(l.at(m + su).mul(&r)),
                };
                let right = t.right.as_ref().map(|r| r.at(n));
                if left.as_ref().is_some_and(|l| l.is_zero()) || right.as_ref().is_some_and(|r| r.is_zero()) {
                    continue;
                }
                terms.push(Term {
                    unknown: blk,
                    coeff: t.coeff.clone(),
                    left,
                    right,
                });
            }
            sys.add_equation(BlockEquation { terms, rhs: eq.rhs.at(n) });
        }
    }

    // naturality along single-index inclusions
    let minus = field.from_i64(-1);
    for (u, slot) in slots.iter().enumerate() {
        if slot.constant {
            continue;
        }
        let un = &unknowns[u];
        for s in &slot.faces {
            for t in &slot.faces {
                if !(s.is_subset(*t) && t.len() == s.len() + 1) {
                    continue;
                }
                for n in un.src.space(*s).degrees() {
                    let rows = un.tgt.space(*t).dim(n + un.shift);
                    if rows == 0 {
                        continue;
                    }
                    let mut terms = Vec::new();
                    if let Some(b) = slot.blocks.get(&(*s, n)) {
                        terms.push(Term {
                            unknown: *b,
                            coeff: field.one(),
                            left: Some(un.tgt.restriction(*s, *t).at(n + un.shift)),
                            right: None,
                        });
                    }
                    if let Some(b) = slot.blocks.get(&(*t, n)) {
                        terms.push(Term {
                            unknown: *b,
                            coeff: minus.clone(),
                            left: None,
                            right: Some(un.src.restriction(*s, *t).at(n)),
                        });
                    }
                    let cols = un.src.space(*s).dim(n);
                    sys.add_equation(BlockEquation {
                        terms,
                        rhs: Matrix::zeros(field, rows, cols),
                    });
                }
            }
        }
    }

    let sol = sys.solve()?;
    let mut out = Vec::with_capacity(unknowns.len());
    for (u, slot) in slots.iter().enumerate() {
        let un = &unknowns[u];
        let mut maps = FaceMaps::new();
        for f in &slot.faces {
            let mut g = GradedMap::zero(field, un.src.space(*f), un.tgt.space(*f), un.shift);
            for n in un.src.space(*f).degrees() {
                if let Some((b, left)) = lookup(u, *f, n) {
                    let m = match left {
                        Some(l) => l.mul(&sol[b]),
                        None => sol[b].clone(),
                    };
                    g.set(n, m);
                }
            }
            maps.insert(*f, g);
        }
        out.push(maps);
    }
    Some(out)
}
