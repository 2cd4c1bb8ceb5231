use std::collections::BTreeMap;

use super::matrix::Matrix;
use super::scalar::{Field, Scalar};

/// Finitely supported degree -> dimension. Zero dimensions are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedSpace {
    dims: BTreeMap<i32, usize>,
}

impl GradedSpace {
    pub fn zero() -> GradedSpace {
        GradedSpace::default()
    }

    pub fn from_dims(dims: impl IntoIterator<Item = (i32, usize)>) -> GradedSpace {
        let mut g = GradedSpace::zero();
        for (n, d) in dims {
            g.set(n, d);
        }
        g
    }

    /// Single degree.
    pub fn concentrated(n: i32, d: usize) -> GradedSpace {
        GradedSpace::from_dims([(n, d)])
    }

    pub fn set(&mut self, n: i32, d: usize) {
        if d == 0 {
            self.dims.remove(&n);
        } else {
            self.dims.insert(n, d);
        }
    }

    pub fn dim(&self, n: i32) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i32> + '_ {
        self.dims.keys().copied()
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn min_deg(&self) -> Option<i32> {
        self.dims.keys().next().copied()
    }

    pub fn max_deg(&self) -> Option<i32> {
        self.dims.keys().next_back().copied()
    }

    /// `E[k]^n = E^{n+k}`
    pub fn shifted(&self, k: i32) -> GradedSpace {
        GradedSpace {
            dims: self.dims.iter().map(|(n, d)| (n - k, *d)).collect(),
        }
    }

    pub fn direct_sum(&self, o: &GradedSpace) -> GradedSpace {
        let mut g = self.clone();
        for (n, d) in &o.dims {
            g.set(*n, g.dim(*n) + d);
        }
        g
    }
}

/// A homogeneous map of degree `shift`: component n goes from `src^n` to `tgt^{n+shift}`.
/// Zero components are omitted so equality is semantic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedMap {
    field: Field,
    shift: i32,
    src: GradedSpace,
    tgt: GradedSpace,
    comps: BTreeMap<i32, Matrix>,
}

impl GradedMap {
    pub fn zero(field: Field, src: &GradedSpace, tgt: &GradedSpace, shift: i32) -> GradedMap {
        GradedMap {
            field,
            shift,
            src: src.clone(),
            tgt: tgt.clone(),
            comps: BTreeMap::new(),
        }
    }

    pub fn identity(field: Field, space: &GradedSpace) -> GradedMap {
        GradedMap::scalar(field, space, &field.one())
    }

    pub fn scalar(field: Field, space: &GradedSpace, s: &Scalar) -> GradedMap {
        let mut m = GradedMap::zero(field, space, space, 0);
        for n in space.degrees() {
            m.set(n, Matrix::scalar(field, space.dim(n), s));
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn shift(&self) -> i32 {
        self.shift
    }
    pub fn src(&self) -> &GradedSpace {
        &self.src
    }
    pub fn tgt(&self) -> &GradedSpace {
        &self.tgt
    }
    pub fn comps(&self) -> &BTreeMap<i32, Matrix> {
        &self.comps
    }

    pub fn set(&mut self, n: i32, m: Matrix) {
        assert_eq!(
            (m.rows(), m.cols()),
            (self.tgt.dim(n + self.shift), self.src.dim(n)),
            "graded component shape mismatch at degree {n}"
        );
        if m.is_zero() {
            self.comps.remove(&n);
        } else {
            self.comps.insert(n, m);
        }
    }

    pub fn add_at(&mut self, n: i32, m: &Matrix) {
        let cur = self.at(n);
        self.set(n, cur.add(m));
    }

    /// Component at source degree n (a zero matrix when not stored).
    pub fn at(&self, n: i32) -> Matrix {
        match self.comps.get(&n) {
            Some(m) => m.clone(),
            None => Matrix::zeros(self.field, self.tgt.dim(n + self.shift), self.src.dim(n)),
        }
    }

    pub fn get(&self, n: i32) -> Option<&Matrix> {
        self.comps.get(&n)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// `self ∘ o`
    pub fn compose(&self, o: &GradedMap) -> GradedMap {
        assert_eq!(o.tgt, self.src, "graded composition: spaces differ");
        let mut r = GradedMap::zero(self.field, &o.src, &self.tgt, self.shift + o.shift);
        for (n, m) in &o.comps {
            if let Some(l) = self.comps.get(&(n + o.shift)) {
                r.set(*n, l.mul(m));
            }
        }
        r
    }

    pub fn axpy(&self, x: &Scalar, o: &GradedMap) -> GradedMap {
        assert_eq!(self.shift, o.shift, "graded sum: shifts differ");
        assert_eq!((&self.src, &self.tgt), (&o.src, &o.tgt), "graded sum: spaces differ");
        let mut r = self.clone();
        for (n, m) in &o.comps {
            let cur = r.at(*n);
            r.set(*n, cur.axpy(x, m));
        }
        r
    }

    pub fn add(&self, o: &GradedMap) -> GradedMap {
        self.axpy(&self.field.one(), o)
    }

    pub fn sub(&self, o: &GradedMap) -> GradedMap {
        self.axpy(&self.field.from_i64(-1), o)
    }

    pub fn scale(&self, x: &Scalar) -> GradedMap {
        let mut r = GradedMap::zero(self.field, &self.src, &self.tgt, self.shift);
        for (n, m) in &self.comps {
            r.set(*n, m.scale(x));
        }
        r
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&self.field.from_i64(-1))
    }

    /// Map between direct sums given by blocks `(target part, source part, map)`.
    pub fn from_blocks(
        field: Field,
        src_parts: &[&GradedSpace],
        tgt_parts: &[&GradedSpace],
        shift: i32,
        blocks: &[(usize, usize, &GradedMap)],
    ) -> GradedMap {
        let src = src_parts.iter().fold(GradedSpace::zero(), |a, b| a.direct_sum(b));
        let tgt = tgt_parts.iter().fold(GradedSpace::zero(), |a, b| a.direct_sum(b));
        let mut r = GradedMap::zero(field, &src, &tgt, shift);
        for n in src.degrees() {
            let k = n + shift;
            if tgt.dim(k) == 0 {
                continue;
            }
            let rs: Vec<usize> = tgt_parts.iter().map(|p| p.dim(k)).collect();
            let cs: Vec<usize> = src_parts.iter().map(|p| p.dim(n)).collect();
            let bl: Vec<(usize, usize, Matrix)> = blocks
                .iter()
                .filter(|(i, j, _)| rs[*i] > 0 && cs[*j] > 0)
                .map(|(i, j, m)| {
                    assert_eq!(m.shift(), shift, "block shift");
                    (*i, *j, m.at(n))
                })
                .collect();
            r.set(n, Matrix::assemble(field, &rs, &cs, &bl));
        }
        r
    }

    /// Block `(i, j)` of a map between direct sums.
    pub fn block(&self, src_parts: &[&GradedSpace], tgt_parts: &[&GradedSpace], i: usize, j: usize) -> GradedMap {
        let mut r = GradedMap::zero(self.field, src_parts[j], tgt_parts[i], self.shift);
        for (n, m) in &self.comps {
            let k = n + self.shift;
            let r0: usize = tgt_parts[..i].iter().map(|p| p.dim(k)).sum();
            let c0: usize = src_parts[..j].iter().map(|p| p.dim(*n)).sum();
            let (nr, nc) = (tgt_parts[i].dim(k), src_parts[j].dim(*n));
            if nr > 0 && nc > 0 {
                r.set(*n, m.block(r0, nr, c0, nc));
            }
        }
        r
    }

    /// Reinterprets the same matrices between shifted spaces:
    /// source `src[ks]`, target `tgt[kt]`.
    pub fn reindexed(&self, ks: i32, kt: i32) -> GradedMap {
        let src = self.src.shifted(ks);
        let tgt = self.tgt.shifted(kt);
        let shift = self.shift + ks - kt;
        let mut r = GradedMap::zero(self.field, &src, &tgt, shift);
        for (n, m) in &self.comps {
            r.set(n - ks, m.clone());
        }
        r
    }
}
