use super::matrix::Matrix;
use super::scalar::{Field, Scalar};

/// One summand `coeff * left * X * right` of a matrix equation.
#[derive(Clone, Debug)]
pub struct Term {
    pub unknown: usize,
    pub coeff: Scalar,
    pub left: Option<Matrix>,
    pub right: Option<Matrix>,
}

#[derive(Clone, Debug)]
pub struct BlockEquation {
    pub terms: Vec<Term>,
    pub rhs: Matrix,
}

/// Linear equations whose unknowns are matrices, flattened into one sparse system.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    field: Field,
    unknowns: Vec<(usize, usize)>,
    equations: Vec<BlockEquation>,
}

impl BlockSystem {
    pub fn new(field: Field) -> BlockSystem {
        BlockSystem {
            field,
            unknowns: Vec::new(),
            equations: Vec::new(),
        }
    }

    pub fn add_unknown(&mut self, rows: usize, cols: usize) -> usize {
        self.unknowns.push((rows, cols));
        self.unknowns.len() - 1
    }

    pub fn unknown_shape(&self, k: usize) -> (usize, usize) {
        self.unknowns[k]
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.iter().map(|(r, c)| r * c).sum()
    }

    pub fn add_equation(&mut self, eq: BlockEquation) {
        if eq.rhs.rows() == 0 || eq.rhs.cols() == 0 {
            return;
        }
        for t in &eq.terms {
            let (r, c) = self.unknowns[t.unknown];
            let lr = t.left.as_ref().map_or(r, |l| {
                assert_eq!(l.cols(), r, "left factor shape");
                l.rows()
            });
            let rc = t.right.as_ref().map_or(c, |m| {
                assert_eq!(m.rows(), c, "right factor shape");
                m.cols()
            });
            assert_eq!((lr, rc), (eq.rhs.rows(), eq.rhs.cols()), "term shape differs from rhs");
        }
        self.equations.push(eq);
    }

    /// Flattened coefficient matrix and right-hand side.
    pub fn flatten(&self) -> (Matrix, Matrix) {
        let mut xoff = Vec::with_capacity(self.unknowns.len());
        let mut acc = 0;
        for (r, c) in &self.unknowns {
            xoff.push(acc);
            acc += r * c;
        }
        let ncols = acc;
        let mut trip = Vec::new();
        let mut rhs = Vec::new();
        let mut row0 = 0;
        for eq in &self.equations {
            let n = eq.rhs.cols();
            for t in &eq.terms {
                if t.coeff.is_zero() {
                    continue;
                }
                let (r, c) = self.unknowns[t.unknown];
                let base = xoff[t.unknown];
                // coefficient of X[i][j] in Y[a][b] is L[a][i] * R[j][b]
                match (&t.left, &t.right) {
                    (None, None) => {
                        for i in 0..r {
                            for j in 0..c {
                                trip.push((row0 + i * n + j, base + i * c + j, t.coeff.clone()));
                            }
                        }
                    }
                    (Some(l), None) => {
                        for (a, i, s) in l.entries() {
                            let v = &t.coeff * s;
                            for j in 0..c {
                                trip.push((row0 + a * n + j, base + i * c + j, v.clone()));
                            }
                        }
                    }
                    (None, Some(rm)) => {
                        for (j, b, s) in rm.entries() {
                            let v = &t.coeff * s;
                            for i in 0..r {
                                trip.push((row0 + i * n + b, base + i * c + j, v.clone()));
                            }
                        }
                    }
                    (Some(l), Some(rm)) => {
                        let rents: Vec<_> = rm.entries().collect();
                        for (a, i, s) in l.entries() {
                            let v = &t.coeff * s;
                            for (j, b, w) in &rents {
                                trip.push((row0 + a * n + b, base + i * c + j, &v * w));
                            }
                        }
                    }
                }
            }
            for (a, b, s) in eq.rhs.entries() {
                rhs.push((row0 + a * n + b, 0, s.clone()));
            }
            row0 += eq.rhs.rows() * n;
        }
        (
            Matrix::from_triplets(self.field, row0, ncols, trip),
            Matrix::from_triplets(self.field, row0, 1, rhs),
        )
    }

    /// One solution (free variables zero), or `None` when inconsistent.
    pub fn solve(&self) -> Option<Vec<Matrix>> {
        let (a, b) = self.flatten();
        let x = a.solve_matrix(&b)?;
        let mut out = Vec::with_capacity(self.unknowns.len());
        let mut off = 0;
        for (r, c) in &self.unknowns {
            let mut trip = Vec::new();
            for i in 0..*r {
                for j in 0..*c {
                    let s = x.get(off + i * c + j, 0);
                    if !s.is_zero() {
                        trip.push((i, j, s));
                    }
                }
            }
            out.push(Matrix::from_triplets(self.field, *r, *c, trip));
            off += r * c;
        }
        Some(out)
    }
}
