use std::collections::BTreeMap;

use thiserror::Error;

use super::graded::{GradedMap, GradedSpace};
use super::matrix::Matrix;
use super::scalar::{Field, Scalar};
use super::system::{BlockEquation, BlockSystem, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("d∘d ≠ 0 at degree {0}")]
    NotAComplex(i32),
}

fn check_square_zero(d: &GradedMap) -> Result<(), LinalgError> {
    for n in d.comps().keys() {
        if !d.at(n + 1).mul(&d.at(*n)).is_zero() {
            return Err(LinalgError::NotAComplex(*n));
        }
    }
    Ok(())
}

/// `dim ker d^n - rank d^{n-1}` for each degree with nonzero cohomology.
pub fn cohomology_dims(space: &GradedSpace, d: &GradedMap) -> Result<BTreeMap<i32, usize>, LinalgError> {
    assert_eq!(d.shift(), 1, "differential must have degree +1");
    check_square_zero(d)?;
    let mut out = BTreeMap::new();
    for n in space.degrees() {
        let ker = space.dim(n) - d.at(n).rank();
        let im = d.get(n - 1).map_or(0, |m| m.rank());
        if ker > im {
            out.insert(n, ker - im);
        }
    }
    Ok(out)
}

pub fn is_acyclic(space: &GradedSpace, d: &GradedMap) -> Result<bool, LinalgError> {
    Ok(cohomology_dims(space, d)?.is_empty())
}

/// Mapping cone of a degree-0 chain map `phi: C -> D`:
/// `G^n = C^{n+1} ⊕ D^n`, `d = [[-d_C, 0], [phi, d_D]]`.
pub fn mapping_cone(phi: &GradedMap, dc: &GradedMap, dd: &GradedMap) -> (GradedSpace, GradedMap) {
    assert_eq!(phi.shift(), 0);
    let field = phi.field();
    let c = phi.src();
    let dsp = phi.tgt();
    let g = c.shifted(1).direct_sum(dsp);
    let mut d = GradedMap::zero(field, &g, &g, 1);
    let lo = g.min_deg().unwrap_or(0);
    let hi = g.max_deg().unwrap_or(-1);
    for n in lo..=hi {
        let (c1, d0) = (c.dim(n + 1), dsp.dim(n));
        let (c2, d1) = (c.dim(n + 2), dsp.dim(n + 1));
        let m = Matrix::assemble(
            field,
            &[c2, d1],
            &[c1, d0],
            &[(0, 0, dc.at(n + 1).neg()), (1, 0, phi.at(n + 1)), (1, 1, dd.at(n))],
        );
        if g.dim(n) > 0 && g.dim(n + 1) > 0 {
            d.set(n, m);
        }
    }
    (g, d)
}

/// Quasi-isomorphism test through acyclicity of the cone.
pub fn is_quasi_iso(phi: &GradedMap, dc: &GradedMap, dd: &GradedMap) -> Result<bool, LinalgError> {
    let (g, d) = mapping_cone(phi, dc, dd);
    is_acyclic(&g, &d)
}

/// Solves `d_D h + eps * h d_C = phi` for `h` of degree `shift(phi) - 1`.
pub fn homotopy_equation(phi: &GradedMap, dc: &GradedMap, dd: &GradedMap, eps: &Scalar) -> Option<GradedMap> {
    let field = phi.field();
    let s = phi.shift();
    let (c, d) = (phi.src(), phi.tgt());
    let mut sys = BlockSystem::new(field);
    let mut unk: BTreeMap<i32, usize> = BTreeMap::new();
    for n in c.degrees() {
        if d.dim(n + s - 1) > 0 {
            unk.insert(n, sys.add_unknown(d.dim(n + s - 1), c.dim(n)));
        }
    }
    for n in c.degrees() {
        if d.dim(n + s) == 0 {
            continue;
        }
        let mut terms = Vec::new();
        if let Some(&u) = unk.get(&n) {
            terms.push(Term { unknown: u, coeff: field.one(), left: Some(dd.at(n + s - 1)), right: None });
        }
        if let Some(&u) = unk.get(&(n + 1)) {
            terms.push(Term { unknown: u, coeff: eps.clone(), left: None, right: Some(dc.at(n)) });
        }
        sys.add_equation(BlockEquation { terms, rhs: phi.at(n) });
    }
    let sol = sys.solve()?;
    let mut h = GradedMap::zero(field, c, d, s - 1);
    for (n, u) in unk {
        h.set(n, sol[u].clone());
    }
    Some(h)
}

/// Some `h` with `d_D h + h d_C = phi`, or `None` when `phi` is not null-homotopic.
pub fn null_homotopy(phi: &GradedMap, dc: &GradedMap, dd: &GradedMap) -> Option<GradedMap> {
    homotopy_equation(phi, dc, dd, &phi.field().one())
}

/// Minimal model `(M, 0)` with `p i = id` and `i p - id = d h + h d`.
#[derive(Clone, Debug)]
pub struct MinimalModel {
    pub space: GradedSpace,
    pub incl: GradedMap,
    pub proj: GradedMap,
    pub homotopy: GradedMap,
}

/// Columns of `e_f` for the non-pivot columns of `rows` (a complement of its row space).
fn complement_of_rowspace(field: Field, rows: &Matrix) -> Matrix {
    let ech = rows.echelon();
    let mut piv = vec![false; rows.cols()];
    for (c, _) in &ech.pivots {
        piv[*c] = true;
    }
    let free: Vec<usize> = (0..rows.cols()).filter(|&c| !piv[c]).collect();
    Matrix::from_triplets(
        field,
        rows.cols(),
        free.len(),
        free.iter().enumerate().map(|(k, &f)| (f, k, field.one())),
    )
}

/// Splits each `C^n = B^n ⊕ H^n ⊕ L^n` (boundaries, harmonic complement, complement of cycles)
/// and reads off inclusion, projection and contraction in the adapted basis.
pub fn minimize_complex(space: &GradedSpace, d: &GradedMap) -> Result<MinimalModel, LinalgError> {
    check_square_zero(d)?;
    let field = d.field();
    let mut m = GradedSpace::zero();
    let mut parts: BTreeMap<i32, (Matrix, Matrix, Matrix)> = BTreeMap::new();
    let (lo, hi) = match (space.min_deg(), space.max_deg()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let z = GradedSpace::zero();
            return Ok(MinimalModel {
                space: z.clone(),
                incl: GradedMap::zero(field, &z, space, 0),
                proj: GradedMap::zero(field, space, &z, 0),
                homotopy: GradedMap::zero(field, space, space, -1),
            });
        }
    };
    let mut prev_l = Matrix::zeros(field, 0, 0);
    for n in lo..=hi {
        let dim = space.dim(n);
        let dn = d.at(n);
        let kern = dn.nullspace();
        let l = complement_of_rowspace(field, &kern.transpose());
        let b = if n > lo { d.at(n - 1).mul(&prev_l) } else { Matrix::zeros(field, dim, 0) };
        let y = kern.solve_matrix(&b).expect("boundaries are cycles");
        let h = kern.mul(&complement_of_rowspace(field, &y.transpose()));
        m.set(n, h.cols());
        parts.insert(n, (b, h, l.clone()));
        prev_l = l;
    }
    let mut incl = GradedMap::zero(field, &m, space, 0);
    let mut proj = GradedMap::zero(field, space, &m, 0);
    let mut hom = GradedMap::zero(field, space, space, -1);
    let mut prev_l: Option<Matrix> = None;
    for n in lo..=hi {
        let (b, h, l) = &parts[&n];
        let q = b.hstack(h).hstack(l);
        let qinv = q.inverse().expect("adapted basis is a basis");
        let (nb, nh) = (b.cols(), h.cols());
        if nh > 0 {
            incl.set(n, h.clone());
            proj.set(n, qinv.block(nb, nh, 0, q.cols()));
        }
        if let Some(pl) = &prev_l {
            if nb > 0 {
                let hm = pl.mul(&qinv.block(0, nb, 0, q.cols())).neg();
                hom.set(n, hm);
            }
        }
        prev_l = Some(l.clone());
    }
    Ok(MinimalModel {
        space: m,
        incl,
        proj,
        homotopy: hom,
    })
}

/// `d h + h d` for a degree `s` map `h` between complexes.
pub fn homotopy_boundary(h: &GradedMap, dc: &GradedMap, dd: &GradedMap) -> GradedMap {
    dd.compose(h).add(&h.compose(dc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    fn complex(f: Field, dims: &[(i32, usize)], ds: &[(i32, Matrix)]) -> (GradedSpace, GradedMap) {
        let s = GradedSpace::from_dims(dims.iter().copied());
        let mut d = GradedMap::zero(f, &s, &s, 1);
        for (n, m) in ds {
            d.set(*n, m.clone());
        }
        (s, d)
    }

    #[test]
    fn cohomology_two_term() {
        let (s, d) = complex(q(), &[(0, 1), (1, 1)], &[(0, Matrix::identity(q(), 1))]);
        assert!(cohomology_dims(&s, &d).unwrap().is_empty());
        let (s, d) = complex(q(), &[(0, 1), (1, 1)], &[]);
        let h = cohomology_dims(&s, &d).unwrap();
        assert_eq!(h, BTreeMap::from([(0, 1), (1, 1)]));
    }

    #[test]
    fn not_a_complex_is_rejected() {
        let (s, d) = complex(
            q(),
            &[(0, 1), (1, 1), (2, 1)],
            &[(0, Matrix::identity(q(), 1)), (1, Matrix::identity(q(), 1))],
        );
        assert_eq!(cohomology_dims(&s, &d), Err(LinalgError::NotAComplex(0)));
    }

    #[test]
    fn null_homotopy_examples() {
        let (s, d) = complex(q(), &[(0, 1), (1, 1)], &[(0, Matrix::identity(q(), 1))]);
        let zero = GradedMap::zero(q(), &s, &s, 0);
        assert!(null_homotopy(&zero, &d, &d).unwrap().is_zero());
        let id = GradedMap::identity(q(), &s);
        let h = null_homotopy(&id, &d, &d).unwrap();
        assert_eq!(homotopy_boundary(&h, &d, &d), id);
        assert_eq!(h.at(1), Matrix::identity(q(), 1));
        let (s, d) = complex(q(), &[(0, 2)], &[]);
        assert!(null_homotopy(&GradedMap::identity(q(), &s), &d, &d).is_none());
    }

    fn check_minimal(s: &GradedSpace, d: &GradedMap) -> MinimalModel {
        let mm = minimize_complex(s, d).unwrap();
        let f = d.field();
        assert_eq!(mm.proj.compose(&mm.incl), GradedMap::identity(f, &mm.space));
        let lhs = mm.incl.compose(&mm.proj).sub(&GradedMap::identity(f, s));
        assert_eq!(lhs, homotopy_boundary(&mm.homotopy, d, d));
        assert_eq!(*mm.space.dims(), cohomology_dims(s, d).unwrap());
        mm
    }

    #[test]
    fn minimize_examples() {
        let (s, d) = complex(q(), &[(0, 2), (1, 1)], &[]);
        let mm = check_minimal(&s, &d);
        assert_eq!(mm.space, s);
        assert!(mm.homotopy.is_zero());
        let (s, d) = complex(q(), &[(0, 1), (1, 1)], &[(0, Matrix::identity(q(), 1))]);
        assert!(check_minimal(&s, &d).space.is_zero());
        let (s, d) = complex(q(), &[(0, 2), (1, 2)], &[(0, Matrix::from_i64(q(), &[&[1, 0], &[0, 0]]))]);
        let mm = check_minimal(&s, &d);
        assert_eq!(mm.space, GradedSpace::from_dims([(0, 1), (1, 1)]));
    }

    #[test]
    fn minimize_over_prime_field() {
        let f = Field::Prime(101);
        let d0 = Matrix::from_i64(f, &[&[1, 2, 0], &[2, 4, 0]]);
        let d1 = Matrix::from_i64(f, &[&[2, -1]]);
        let (s, d) = complex(f, &[(-1, 3), (0, 2), (1, 1)], &[(-1, d0), (0, d1)]);
        check_minimal(&s, &d);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let (s, d) = complex(q(), &[(0, 2), (1, 1)], &[(0, Matrix::from_i64(q(), &[&[1, 1]]))]);
        let id = GradedMap::identity(q(), &s);
        assert!(is_quasi_iso(&id, &d, &d).unwrap());
        let zero = GradedMap::zero(q(), &s, &s, 0);
        assert!(!is_quasi_iso(&zero, &d, &d).unwrap());
    }
}
