use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use super::scalar::{Field, Scalar};

/// Below this size elimination runs on a dense copy.
pub const DENSE_CUTOFF: usize = 32;

pub type SparseRow = Vec<(usize, Scalar)>;

/// Sparse row-major matrix. Rows are sorted by column and hold no explicit zeros,
/// so derived equality is semantic equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<SparseRow>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `v + x * w` for sorted sparse rows.
fn axpy(v: &[(usize, Scalar)], x: &Scalar, w: &[(usize, Scalar)]) -> SparseRow {
    let mut out = Vec::with_capacity(v.len() + w.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < w.len() {
        if j == w.len() || (i < v.len() && v[i].0 < w[j].0) {
            out.push(v[i].clone());
            i += 1;
        } else if i == v.len() || w[j].0 < v[i].0 {
            let t = x * &w[j].1;
            if !t.is_zero() {
                out.push((w[j].0, t));
            }
            j += 1;
        } else {
            let t = &v[i].1 + &(x * &w[j].1);
            if !t.is_zero() {
                out.push((v[i].0, t));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Forward row echelon form produced by processing rows in order and pivoting
/// on the leftmost surviving entry. Pivot rows are normalized to a leading 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub ncols: usize,
    /// (pivot column, row) in creation order
    pub pivots: Vec<(usize, SparseRow)>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn by_col_desc(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.pivots.len()).collect();
        idx.sort_by(|&a, &b| self.pivots[b].0.cmp(&self.pivots[a].0));
        idx
    }

    /// Back substitution for the columns `< n`, reading right-hand sides from
    /// columns `>= n` (or from free columns when `free` is given).
    fn back_substitute(&self, n: usize, rhs: impl Fn(&SparseRow) -> SparseRow) -> Vec<Option<SparseRow>> {
        let mut x: Vec<Option<SparseRow>> = vec![None; n];
        for pi in self.by_col_desc() {
            let (c, row) = &self.pivots[pi];
            let mut val = rhs(row);
            for (e, coef) in row.iter() {
                if *e <= *c || *e >= n {
                    continue;
                }
                if let Some(xe) = &x[*e] {
                    val = axpy(&val, &-coef, xe);
                }
            }
            x[*c] = Some(val);
        }
        x
    }
}

/// Reduces one row against the pivots in increasing column order, using a dense
/// accumulator and a heap of touched columns.
struct Reducer {
    zero: Scalar,
    acc: Vec<Scalar>,
    touched: Vec<bool>,
    heap: BinaryHeap<Reverse<usize>>,
}

impl Reducer {
    fn new(field: Field, ncols: usize) -> Reducer {
        Reducer {
            zero: field.zero(),
            acc: vec![field.zero(); ncols],
            touched: vec![false; ncols],
            heap: BinaryHeap::new(),
        }
    }

    fn reduce(&mut self, pivots: &[(usize, SparseRow)], lookup: &[usize], v: &[(usize, Scalar)]) -> SparseRow {
        for (c, s) in v {
            self.acc[*c] = s.clone();
            self.touched[*c] = true;
            self.heap.push(Reverse(*c));
        }
        let mut out = Vec::new();
        while let Some(Reverse(c)) = self.heap.pop() {
            self.touched[c] = false;
            let x = std::mem::replace(&mut self.acc[c], self.zero.clone());
            if x.is_zero() {
                continue;
            }
            let p = lookup[c];
            if p == usize::MAX {
                out.push((c, x));
                continue;
            }
            for (j, s) in pivots[p].1.iter().skip(1) {
                if !self.touched[*j] {
                    self.touched[*j] = true;
                    self.heap.push(Reverse(*j));
                }
                self.acc[*j] = &self.acc[*j] - &(&x * s);
            }
        }
        out
    }
}

/// Sparse forward elimination; also returns the input rows that produced pivots.
fn echelon_sparse_rows(field: Field, ncols: usize, rows: &[SparseRow]) -> (Echelon, Vec<usize>) {
    let mut pivots: Vec<(usize, SparseRow)> = Vec::new();
    let mut lookup = vec![usize::MAX; ncols];
    let mut red = Reducer::new(field, ncols);
    let mut used = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let v = red.reduce(&pivots, &lookup, r);
        if let Some((c, lead)) = v.first() {
            let inv = lead.inv().expect("nonzero leading entry");
            let row: SparseRow = v.iter().map(|(j, s)| (*j, &inv * s)).collect();
            lookup[*c] = pivots.len();
            pivots.push((*c, row));
            used.push(i);
        }
    }
    (Echelon { ncols, pivots }, used)
}

fn echelon_sparse(field: Field, ncols: usize, rows: &[SparseRow]) -> Echelon {
    echelon_sparse_rows(field, ncols, rows).0
}

fn echelon_dense(field: Field, ncols: usize, rows: &[SparseRow]) -> Echelon {
    let zero = field.zero();
    let mut piv: Vec<(usize, Vec<Scalar>)> = Vec::new();
    let mut lookup = vec![usize::MAX; ncols];
    for r in rows {
        let mut v = vec![zero.clone(); ncols];
        for (c, s) in r {
            v[*c] = s.clone();
        }
        for c in 0..ncols {
            if v[c].is_zero() || lookup[c] == usize::MAX {
                continue;
            }
            let x = v[c].clone();
            let p = &piv[lookup[c]].1;
            for j in c..ncols {
                if !p[j].is_zero() {
                    v[j] = &v[j] - &(&x * &p[j]);
                }
            }
        }
        if let Some(c) = (0..ncols).find(|&c| !v[c].is_zero()) {
            let inv = v[c].inv().unwrap();
            for s in v.iter_mut().skip(c) {
                *s = &inv * s;
            }
            lookup[c] = piv.len();
            piv.push((c, v));
        }
    }
    Echelon {
        ncols,
        pivots: piv
            .into_iter()
            .map(|(c, v)| {
                let row = v
                    .into_iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero())
                    .collect();
                (c, row)
            })
            .collect(),
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        Matrix::scalar(field, n, &field.one())
    }

    pub fn scalar(field: Field, n: usize, s: &Scalar) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        if !s.is_zero() {
            for i in 0..n {
                m.data[i].push((i, s.clone()));
            }
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>, cols: usize) -> Matrix {
        let n = rows.len();
        let data = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged matrix rows");
                r.into_iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero())
                    .collect()
            })
            .collect();
        Matrix {
            field,
            rows: n,
            cols,
            data,
        }
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(
            field,
            rows.iter()
                .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
                .collect(),
            cols,
        )
    }

    /// Sums duplicate entries.
    pub fn from_triplets(
        field: Field,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Matrix {
        let mut buckets: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); rows];
        for (r, c, s) in entries {
            assert!(r < rows && c < cols, "triplet out of range");
            buckets[r].push((c, s));
        }
        let data = buckets
            .into_iter()
            .map(|mut b| {
                b.sort_by_key(|e| e.0);
                let mut out: SparseRow = Vec::with_capacity(b.len());
                for (c, s) in b {
                    match out.last_mut() {
                        Some(last) if last.0 == c => last.1 = &last.1 + &s,
                        _ => out.push((c, s)),
                    }
                }
                out.retain(|e| !e.1.is_zero());
                out
            })
            .collect();
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn from_sparse_rows(field: Field, cols: usize, data: Vec<SparseRow>) -> Matrix {
        Matrix {
            field,
            rows: data.len(),
            cols,
            data,
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn row(&self, r: usize) -> &[(usize, Scalar)] {
        &self.data[r]
    }
    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        match self.data[r].binary_search_by_key(&c, |e| e.0) {
            Ok(i) => self.data[r][i].1.clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, s)| (r, *c, s)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c)).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut data: Vec<SparseRow> = vec![Vec::new(); self.cols];
        for (r, row) in self.data.iter().enumerate() {
            for (c, s) in row {
                data[*c].push((r, s.clone()));
            }
        }
        Matrix {
            field: self.field,
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "matrix product shape mismatch");
        let data = self
            .data
            .iter()
            .map(|row| {
                let mut acc: SparseRow = Vec::new();
                for (k, s) in row {
                    if !o.data[*k].is_empty() {
                        acc = axpy(&acc, s, &o.data[*k]);
                    }
                }
                acc
            })
            .collect();
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: o.cols,
            data,
        }
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        self.axpy(&self.field.one(), o)
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        self.axpy(&self.field.from_i64(-1), o)
    }

    /// `self + x * o`
    pub fn axpy(&self, x: &Scalar, o: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (o.rows, o.cols),
            "matrix sum shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| axpy(a, x, b))
            .collect();
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, x: &Scalar) -> Matrix {
        if x.is_zero() {
            return Matrix::zeros(self.field, self.rows, self.cols);
        }
        let data = self
            .data
            .iter()
            .map(|r| r.iter().map(|(c, s)| (*c, x * s)).collect())
            .collect();
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&self.field.from_i64(-1))
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols);
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .fold(self.field.zero(), |acc, (c, s)| &acc + &(s * &v[*c]))
            })
            .collect()
    }

    /// Row and column subsets, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut colmap = vec![usize::MAX; self.cols];
        for (new, &old) in cols.iter().enumerate() {
            colmap[old] = new;
        }
        let data = rows
            .iter()
            .map(|&r| {
                let mut v: SparseRow = self.data[r]
                    .iter()
                    .filter(|(c, _)| colmap[*c] != usize::MAX)
                    .map(|(c, s)| (colmap[*c], s.clone()))
                    .collect();
                v.sort_by_key(|e| e.0);
                v
            })
            .collect();
        Matrix {
            field: self.field,
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn block(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Matrix {
        let rows: Vec<usize> = (r0..r0 + nr).collect();
        let cols: Vec<usize> = (c0..c0 + nc).collect();
        self.select(&rows, &cols)
    }

    /// Block matrix from `(block row, block col, matrix)` entries.
    pub fn assemble(field: Field, row_sizes: &[usize], col_sizes: &[usize], blocks: &[(usize, usize, Matrix)]) -> Matrix {
        let roff = offsets(row_sizes);
        let coff = offsets(col_sizes);
        let total_r = roff[row_sizes.len()];
        let total_c = coff[col_sizes.len()];
        let mut trip = Vec::new();
        for (bi, bj, m) in blocks {
            assert_eq!((m.rows, m.cols), (row_sizes[*bi], col_sizes[*bj]), "block shape mismatch");
            for (r, c, s) in m.entries() {
                trip.push((roff[*bi] + r, coff[*bj] + c, s.clone()));
            }
        }
        Matrix::from_triplets(field, total_r, total_c, trip)
    }

    pub fn hstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.rows, o.rows);
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| {
                let mut v = a.clone();
                v.extend(b.iter().map(|(c, s)| (c + self.cols, s.clone())));
                v
            })
            .collect();
        Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols + o.cols,
            data,
        }
    }

    pub fn vstack(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.cols);
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix {
            field: self.field,
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn echelon(&self) -> Echelon {
        if self.rows <= DENSE_CUTOFF && self.cols <= DENSE_CUTOFF {
            echelon_dense(self.field, self.cols, &self.data)
        } else {
            echelon_sparse(self.field, self.cols, &self.data)
        }
    }

    /// Echelon form forced onto one storage path; used to cross-check the two.
    pub fn echelon_with(&self, dense: bool) -> Echelon {
        if dense {
            echelon_dense(self.field, self.cols, &self.data)
        } else {
            echelon_sparse(self.field, self.cols, &self.data)
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Columns span the kernel; one basis vector per free column.
    pub fn nullspace(&self) -> Matrix {
        if self.field == Field::Rational && self.rows > 2 * DENSE_CUTOFF {
            if let Some(k) = super::modular::nullspace(self) {
                return k;
            }
        }
        self.nullspace_exact()
    }

    fn nullspace_exact(&self) -> Matrix {
        self.kernel_with_pivots().0
    }

    /// Kernel basis by elimination, with the pivot-column flags of the echelon form.
    pub(super) fn kernel_with_pivots(&self) -> (Matrix, Vec<bool>) {
        let ech = self.echelon();
        let n = self.cols;
        let mut is_pivot = vec![false; n];
        for (c, _) in &ech.pivots {
            is_pivot[*c] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut free_pos = vec![usize::MAX; n];
        for (k, &f) in free.iter().enumerate() {
            free_pos[f] = k;
        }
        let neg1 = self.field.from_i64(-1);
        let x = ech.back_substitute(n, |row| {
            row.iter()
                .filter(|(c, _)| free_pos[*c] != usize::MAX)
                .map(|(c, s)| (free_pos[*c], &neg1 * s))
                .collect()
        });
        let data = (0..n)
            .map(|r| {
                if is_pivot[r] {
                    x[r].clone().unwrap_or_default()
                } else {
                    vec![(free_pos[r], self.field.one())]
                }
            })
            .collect();
        let k = Matrix {
            field: self.field,
            rows: n,
            cols: free.len(),
            data,
        };
        (k, is_pivot)
    }

    /// Some X with `self * X = b`, free variables set to zero.
    pub fn solve_matrix(&self, b: &Matrix) -> Option<Matrix> {
        assert_eq!(self.rows, b.rows, "solve: row count mismatch");
        let n = self.cols;
        let aug = self.hstack(b);
        let ech = aug.echelon();
        if ech.pivots.iter().any(|(c, _)| *c >= n) {
            return None;
        }
        let x = ech.back_substitute(n, |row| {
            row.iter()
                .filter(|(c, _)| *c >= n)
                .map(|(c, s)| (c - n, s.clone()))
                .collect()
        });
        let data = x.into_iter().map(|r| r.unwrap_or_default()).collect();
        Some(Matrix {
            field: self.field,
            rows: n,
            cols: b.cols,
            data,
        })
    }

    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        let bm = Matrix::from_rows(self.field, b.iter().map(|s| vec![s.clone()]).collect(), 1);
        let x = self.solve_matrix(&bm)?;
        Some((0..self.cols).map(|r| x.get(r, 0)).collect())
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve_matrix(&Matrix::identity(self.field, self.rows))?;
        (x.mul(self) == Matrix::identity(self.field, self.rows)).then_some(x)
    }
}

pub fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0;
    off.push(0);
    for s in sizes {
        acc += s;
        off.push(acc);
    }
    off
}

/// Rank of `A`, the oracle-free entry point.
pub fn rank(a: &Matrix) -> usize {
    a.rank()
}

/// Some x with `Ax = b`, or `None` when inconsistent.
pub fn solve_linear(a: &Matrix, b: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(a.rows(), b.len(), "solve_linear: dimension mismatch");
    a.solve(b)
}
