//! Seeded random instances for tests, benches and the acceptance sweep.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover_model::{CoverNerve, Face, NaturalMap, Presheaf, PresheafComplex, Tuple};
use crate::exact_linalg::{Field, GradedMap, GradedSpace, Matrix, Scalar};
use crate::twisted_core::{sign, Cochain, LocalFamily, Morphism, TwistedComplex};

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scalar(field: Field, rng: &mut Rand) -> Scalar {
    let v = rng.gen_range(-3i64..=3);
    match field {
        Field::Rational if rng.gen_bool(0.15) => {
            let den = field.from_i64(rng.gen_range(2..=3));
            &field.from_i64(v) * &den.inv().unwrap()
        }
        _ => field.from_i64(v),
    }
}

/// Random matrix; each entry is nonzero with probability `density`.
pub fn matrix(field: Field, rng: &mut Rand, rows: usize, cols: usize, density: f64) -> Matrix {
    let mut trip = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if rng.gen_bool(density) {
                let s = scalar(field, rng);
                if !s.is_zero() {
                    trip.push((r, c, s));
                }
            }
        }
    }
    Matrix::from_triplets(field, rows, cols, trip)
}

/// Random invertible matrix: lower unitriangular times upper triangular with unit-ish diagonal.
pub fn invertible(field: Field, rng: &mut Rand, n: usize) -> Matrix {
    let mut lo = Vec::new();
    let mut up = Vec::new();
    for r in 0..n {
        lo.push((r, r, field.one()));
        let d = if rng.gen_bool(0.5) { 1 } else { -1 };
        up.push((r, r, field.from_i64(d)));
        for c in 0..n {
            if c < r && rng.gen_bool(0.4) {
                lo.push((r, c, scalar(field, rng)));
            }
            if c > r && rng.gen_bool(0.4) {
                up.push((r, c, scalar(field, rng)));
            }
        }
    }
    let l = Matrix::from_triplets(field, n, n, lo.into_iter().filter(|t| !t.2.is_zero()));
    let u = Matrix::from_triplets(field, n, n, up.into_iter().filter(|t| !t.2.is_zero()));
    l.mul(&u)
}

pub fn space(rng: &mut Rand, lo: i32, hi: i32, maxdim: usize) -> GradedSpace {
    GradedSpace::from_dims((lo..=hi).map(|n| (n, rng.gen_range(0..=maxdim))))
}

/// Interval: two opens meeting in one face.
pub fn interval() -> CoverNerve {
    CoverNerve::with_faces(2, &[&[0, 1]])
}

/// Random nerve with between 1 and `max_opens` opens.
pub fn nerve(rng: &mut Rand, max_opens: usize) -> CoverNerve {
    let n = rng.gen_range(1..=max_opens);
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() >= 2 && rng.gen_bool(0.45) {
            faces.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    let refs: Vec<&[usize]> = faces.iter().map(|f| f.as_slice()).collect();
    CoverNerve::with_faces(n, &refs)
}

/// Complex in standard form `b ⊕ h ⊕ c` per degree (`c_n ≅ b_{n+1}`), then conjugated.
pub fn complex(field: Field, rng: &mut Rand, lo: i32, hi: i32, maxdim: usize) -> (GradedSpace, GradedMap) {
    let mut pairs = BTreeMap::new();
    let mut homs = BTreeMap::new();
    for n in lo..=hi {
        homs.insert(n, rng.gen_range(0..=maxdim / 2 + 1).min(maxdim));
        if n < hi {
            pairs.insert(n, rng.gen_range(0..=maxdim / 3 + 1));
        }
    }
    let (sp, d) = standard_complex(field, &homs, &pairs);
    let g: BTreeMap<i32, Matrix> = sp.degrees().map(|n| (n, invertible(field, rng, sp.dim(n)))).collect();
    (sp, conjugate(&d, &g))
}

/// Coordinates per degree: `[pairs(n-1) targets | homology | pairs(n) sources]`.
pub fn standard_complex(field: Field, homs: &BTreeMap<i32, usize>, pairs: &BTreeMap<i32, usize>) -> (GradedSpace, GradedMap) {
    let degs: Vec<i32> = homs.keys().chain(pairs.keys()).copied().chain(pairs.keys().map(|n| n + 1)).collect();
    let mut sp = GradedSpace::zero();
    for &n in &degs {
        let d = pairs.get(&(n - 1)).copied().unwrap_or(0) + homs.get(&n).copied().unwrap_or(0) + pairs.get(&n).copied().unwrap_or(0);
        sp.set(n, d);
    }
    let mut d = GradedMap::zero(field, &sp, &sp, 1);
    for (&n, &k) in pairs {
        let src_off = pairs.get(&(n - 1)).copied().unwrap_or(0) + homs.get(&n).copied().unwrap_or(0);
        let trip = (0..k).map(|j| (j, src_off + j, field.one()));
        d.set(n, Matrix::from_triplets(field, sp.dim(n + 1), sp.dim(n), trip));
    }
    (sp, d)
}

/// `g d g^{-1}` degreewise.
pub fn conjugate(d: &GradedMap, g: &BTreeMap<i32, Matrix>) -> GradedMap {
    let mut out = GradedMap::zero(d.field(), d.src(), d.tgt(), d.shift());
    for (n, m) in d.comps() {
        let gi = g[n].inverse().unwrap();
        out.set(*n, g[&(n + d.shift())].mul(m).mul(&gi));
    }
    out
}

/// Locals constant with a common complex, `a^{0,1} = d`, `a^{1,0}_{ij} = id`.
pub fn constant_twisted(nerve: &CoverNerve, space: &GradedSpace, d: &GradedMap) -> TwistedComplex {
    let field = d.field();
    let fam = LocalFamily::constant(nerve, field, &vec![space.clone(); nerve.len()]);
    let mut a = Morphism::zero(field, 1);
    for t in nerve.tuples(1, Face::EMPTY) {
        for f in nerve.star(Face::of(&t)) {
            a.add_at(&t, f, d.clone());
        }
    }
    for t in nerve.tuples(2, Face::EMPTY) {
        for f in nerve.star(Face::of(&t)) {
            a.add_at(&t, f, GradedMap::identity(field, space));
        }
    }
    TwistedComplex {
        family: fam,
        a,
        generalized: false,
    }
}

/// Random morphism between constant families: same matrix on every face of a tuple's star.
pub fn constant_morphism(
    rng: &mut Rand,
    src: &LocalFamily,
    tgt: &LocalFamily,
    deg: i32,
    max_cech: usize,
    density: f64,
) -> Morphism {
    let field = src.field();
    let nerve = src.nerve();
    let mut m = Morphism::zero(field, deg);
    for p in 0..=max_cech {
        for t in nerve.tuples(p + 1, Face::EMPTY) {
            let base = Face::of(&t);
            let (s, g) = (src.space(*t.last().unwrap(), base), tgt.space(t[0], base));
            let shift = deg - p as i32;
            let mut map = GradedMap::zero(field, s, g, shift);
            for n in s.degrees() {
                let r = g.dim(n + shift);
                if r > 0 {
                    map.set(n, matrix(field, rng, r, s.dim(n), density));
                }
            }
            for f in nerve.star(base) {
                m.add_at(&t, f, map.clone());
            }
        }
    }
    m
}

/// Random cochain over `base` for a constant family.
pub fn constant_cochain(rng: &mut Rand, fam: &LocalFamily, base: Face, deg: i32, max_cech: usize) -> Cochain {
    let field = fam.field();
    let mut c = Cochain::zero(field, base, deg, 1);
    for p in 0..=max_cech {
        for t in fam.nerve().tuples(p + 1, base) {
            let f = Face::of(&t).union(base);
            let dim = fam.space(t[0], f).dim(deg - p as i32);
            if dim > 0 {
                c.add_at(&t, matrix(field, rng, dim, 1, 0.7));
            }
        }
    }
    c
}

/// Two-sided inverse under `·` of a degree-0 morphism whose singleton components are invertible.
pub fn compose_inverse(g: &Morphism, fam: &LocalFamily) -> Morphism {
    let field = g.field();
    let nerve = fam.nerve();
    let maxp = g.max_cech().unwrap_or(0);
    let mut h = Morphism::zero(field, 0);
    let mut inv0 = BTreeMap::new();
    for i in 0..fam.len() {
        for f in fam.get(i).domain() {
            let sp = fam.space(i, *f);
            let zero = GradedMap::zero(field, sp, sp, 0);
            let gi = g.at(&[i], *f).unwrap_or(&zero);
            let mut m = GradedMap::zero(field, gi.tgt(), gi.src(), 0);
            for (n, x) in gi.comps() {
                m.set(*n, x.inverse().expect("invertible diagonal"));
            }
            inv0.insert((i, *f), m);
        }
    }
    // tuples of length up to (maxp) * (amplitude span + 1) may be nonzero; bound by nerve depth
    let (lo, hi) = fam.amplitude().unwrap_or((0, 0));
    let pmax = if maxp == 0 { 0 } else { (hi - lo) as usize + maxp + 1 };
    for p in 0..=pmax {
        for t in nerve.tuples(p + 1, Face::EMPTY) {
            for f in nerve.star(Face::of(&t)) {
                let mut acc = if p == 0 {
                    GradedMap::identity(field, fam.space(t[0], f))
                } else {
                    GradedMap::zero(field, fam.space(t[p], f), fam.space(t[0], f), -(p as i32))
                };
                for l in 1..=p {
                    let (Some(gl), Some(hr)) = (g.at(&t[..=l], f), h.at(&t[l..], f)) else {
                        continue;
                    };
                    let s = sign(field, -(l as i64) * (p - l) as i64);
                    acc = acc.axpy(&-s, &gl.compose(hr));
                }
                let v = inv0[&(t[0], f)].compose(&acc);
                if !v.is_zero() {
                    h.add_at(&t, f, v);
                }
            }
        }
    }
    h
}

/// Transports `a` along `g`: `a' = (g·a - δg)·g^{-1}`, making `g: (E,a) -> (E,a')` closed.
pub fn gauge(t: &TwistedComplex, g: &Morphism) -> TwistedComplex {
    let nerve = t.nerve();
    let gi = compose_inverse(g, &t.family);
    let a = g.compose(&t.a).sub(&g.delta(nerve)).compose(&gi);
    TwistedComplex {
        family: t.family.clone(),
        a,
        generalized: t.generalized,
    }
}

/// Random degree-0 gauge morphism with invertible diagonal, over constant locals.
pub fn gauge_morphism(rng: &mut Rand, fam: &LocalFamily, max_cech: usize, density: f64) -> Morphism {
    let field = fam.field();
    let nerve = fam.nerve();
    let mut g = constant_morphism(rng, fam, fam, 0, max_cech, density);
    for i in 0..fam.len() {
        let base = Face::singleton(i);
        let s = fam.space(i, base);
        let cur = g.get(&[i]).cloned().unwrap_or_default();
        let mut inv = GradedMap::zero(field, s, s, 0);
        for n in s.degrees() {
            inv.set(n, invertible(field, rng, s.dim(n)));
        }
        for f in nerve.star(base) {
            if let Some(m) = cur.get(&f) {
                g.add_at(&[i], f, m.neg());
            }
            g.add_at(&[i], f, inv.clone());
        }
    }
    g
}

/// Random gauge-twisted constant twisted complex with nonzero higher components.
pub fn twisted(rng: &mut Rand, nerve: &CoverNerve, field: Field, lo: i32, hi: i32, maxdim: usize) -> TwistedComplex {
    let (sp, d) = complex(field, rng, lo, hi, maxdim);
    let base = constant_twisted(nerve, &sp, &d);
    let g = gauge_morphism(rng, &base.family, 2, 0.4);
    gauge(&base, &g)
}

/// Perfect presheaf complex on all faces: a fixed complex with contractible pairs
/// dropped as faces grow, then a random basis change per face. With `perfect = false`
/// some homology classes are dropped too.
pub fn presheaf_complex(
    rng: &mut Rand,
    nerve: &CoverNerve,
    field: Field,
    lo: i32,
    hi: i32,
    maxdim: usize,
    perfect: bool,
) -> PresheafComplex {
    let mut homs = BTreeMap::new();
    let mut pairs = BTreeMap::new();
    for n in lo..=hi {
        homs.insert(n, rng.gen_range(0..=2usize.min(maxdim)));
        if n < hi {
            pairs.insert(n, rng.gen_range(0..=2usize));
        }
    }
    let (sp, d) = standard_complex(field, &homs, &pairs);
    // coordinate groups: each pair is (deg n, src idx, deg n+1, tgt idx); each class is (deg, idx)
    let mut groups: Vec<Vec<(i32, usize)>> = Vec::new();
    for (&n, &k) in &pairs {
        let src_off = pairs.get(&(n - 1)).copied().unwrap_or(0) + homs[&n];
        for j in 0..k {
            groups.push(vec![(n, src_off + j), (n + 1, j)]);
        }
    }
    let npairs = groups.len();
    if !perfect {
        for (&n, &k) in &homs {
            let off = pairs.get(&(n - 1)).copied().unwrap_or(0);
            for j in 0..k {
                groups.push(vec![(n, off + j)]);
            }
        }
    }
    // a group is dropped at faces meeting its trigger set
    let triggers: Vec<u32> = (0..groups.len())
        .map(|gi| {
            let mut m = 0u32;
            for i in 0..nerve.len() {
                if rng.gen_bool(if gi < npairs { 0.4 } else { 0.3 }) {
                    m |= 1 << i;
                }
            }
            m
        })
        .collect();
    let kept = |f: Face| -> BTreeMap<i32, Vec<usize>> {
        let mut drop: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (gi, g) in groups.iter().enumerate() {
            if f.0 & triggers[gi] != 0 {
                for (n, c) in g {
                    drop.entry(*n).or_default().push(*c);
                }
            }
        }
        sp.degrees()
            .map(|n| {
                let dr = drop.get(&n).cloned().unwrap_or_default();
                (n, (0..sp.dim(n)).filter(|c| !dr.contains(c)).collect())
            })
            .collect()
    };
    let faces = nerve.faces().to_vec();
    let keep: BTreeMap<Face, BTreeMap<i32, Vec<usize>>> = faces.iter().map(|f| (*f, kept(*f))).collect();
    let basis: BTreeMap<Face, BTreeMap<i32, Matrix>> = faces
        .iter()
        .map(|f| (*f, keep[f].iter().map(|(n, c)| (*n, invertible(field, rng, c.len()))).collect()))
        .collect();
    let spaces: BTreeMap<Face, GradedSpace> = faces
        .iter()
        .map(|f| (*f, GradedSpace::from_dims(keep[f].iter().map(|(n, c)| (*n, c.len())))))
        .collect();
    let mut restr = BTreeMap::new();
    for s in &faces {
        for t in &faces {
            if s == t || !s.is_subset(*t) {
                continue;
            }
            let mut r = GradedMap::zero(field, &spaces[s], &spaces[t], 0);
            for (n, kt) in &keep[t] {
                let ks = &keep[s][n];
                let trip = kt.iter().enumerate().map(|(row, c)| (row, ks.iter().position(|x| x == c).unwrap(), field.one()));
                let proj = Matrix::from_triplets(field, kt.len(), ks.len(), trip);
                r.set(*n, basis[t][n].mul(&proj).mul(&basis[s][n].inverse().unwrap()));
            }
            restr.insert((*s, *t), r);
        }
    }
    let sheaf = Presheaf::from_parts(field, &faces, spaces.clone(), restr).expect("generated presheaf");
    let mut dmaps = BTreeMap::new();
    for f in &faces {
        let mut df = GradedMap::zero(field, &spaces[f], &spaces[f], 1);
        for (n, m) in d.comps() {
            let (kn, kn1) = (&keep[f][n], &keep[f][&(n + 1)]);
            let sub = m.select(kn1, kn);
            df.set(*n, basis[f][&(n + 1)].mul(&sub).mul(&basis[f][n].inverse().unwrap()));
        }
        dmaps.insert(*f, df);
    }
    PresheafComplex::new(sheaf, NaturalMap { deg: 1, maps: dmaps }).expect("generated complex")
}

/// All tuples of the nerve up to the given Čech degree.
pub fn tuples_upto(nerve: &CoverNerve, max_cech: usize) -> Vec<Tuple> {
    (0..=max_cech).flat_map(|p| nerve.tuples(p + 1, Face::EMPTY)).collect()
}
